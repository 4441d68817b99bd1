#pragma once

// Strict JSON object reading shared by the file formats and the live
// protocol: every value is type-checked and unknown keys are rejected with
// their full path.

#include <cmath>
#include <json.hpp>
#include <set>
#include <string>
#include <string_view>

#include "encounter/geometry.hpp"
#include "encounter/io.hpp"

namespace encounter::detail {

using ordered_json = nlohmann::ordered_json;
// Parsed documents keep key order so weight maps round-trip in file order.
using json = nlohmann::ordered_json;

struct Where {
  std::string source;
  std::size_t line = 0;

  [[noreturn]] void fail(const std::string& field, const std::string& what) const {
    throw FormatError(source, line, field, what);
  }
};

inline std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

// Walks one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class Fields {
 public:
  Fields(const json& j, std::string path, const Where& where)
      : j_(j), path_(std::move(path)), where_(where) {
    if (!j.is_object()) where_.fail(path_, "expected an object");
  }

  const json* find(std::string_view key) {
    used_.emplace(key);
    const auto it = j_.find(std::string(key));
    return it == j_.end() ? nullptr : &*it;
  }

  const json& at(std::string_view key) {
    const json* v = find(key);
    if (!v) where_.fail(join(path_, key), "missing");
    return *v;
  }

  double number(std::string_view key) { return as_number(at(key), join(path_, key)); }

  double number_or(std::string_view key, double fallback) {
    const json* v = find(key);
    return v ? as_number(*v, join(path_, key)) : fallback;
  }

  bool boolean(std::string_view key) {
    const json& v = at(key);
    if (!v.is_boolean()) where_.fail(join(path_, key), "expected true or false");
    return v.get<bool>();
  }

  bool boolean_or(std::string_view key, bool fallback) {
    return find(key) ? boolean(key) : fallback;
  }

  std::string string(std::string_view key) {
    const json& v = at(key);
    if (!v.is_string()) where_.fail(join(path_, key), "expected a string");
    return v.get<std::string>();
  }

  Vec2 vec(std::string_view key) { return read_vec(at(key), join(path_, key), where_); }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.contains(key)) where_.fail(join(path_, key), "unknown field");
    }
  }

  static double as_number(const json& v, const std::string& path, const Where& where) {
    if (!v.is_number()) where.fail(path, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) where.fail(path, "must be finite");
    return d;
  }

  static Vec2 read_vec(const json& j, const std::string& path, const Where& where) {
    Fields f(j, path, where);
    const Vec2 v{f.number("x"), f.number("y")};
    f.finish();
    return v;
  }

 private:
  double as_number(const json& v, const std::string& path) const {
    return as_number(v, path, where_);
  }

  const json& j_;
  std::string path_;
  const Where& where_;
  std::set<std::string, std::less<>> used_;
};

}  // namespace encounter::detail
