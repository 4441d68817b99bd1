#pragma once

// Readable failure output for the value types the tests compare.

#include <doctest.h>

#include <sstream>

#include "encounter/geometry.hpp"

namespace doctest {

template <>
struct StringMaker<encounter::Vec2> {
  static String convert(const encounter::Vec2& v) {
    std::ostringstream out;
    out.precision(17);
    out << '(' << v.x << ", " << v.y << ')';
    return out.str().c_str();
  }
};

}  // namespace doctest
