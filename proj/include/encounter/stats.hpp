#pragma once

#include <span>

namespace encounter {

struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;  // 95% two-sided, Student t with n-1 dof
};

/// Sample mean and 95% t-interval half-width. Requires at least two samples.
MeanCi summarize(std::span<const double> samples);

/// Two-sided 97.5% quantile of Student's t with `dof` degrees of freedom.
double t_critical_975(double dof);

}  // namespace encounter
