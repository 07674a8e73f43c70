#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace vinestress {

using Column = std::vector<double>;
using Columns = std::vector<Column>;

/// Copula-scale values are kept inside [kUnitClamp, 1 - kUnitClamp] before
/// any density or h-function evaluation.
inline constexpr double kUnitClamp = 1e-10;

/// Floor for probabilities passed between the stages of a vine, where values
/// far below kUnitClamp are still meaningful.
inline constexpr double kTinyProb = 1e-300;

inline double clamp_unit(double u) {
  return std::clamp(u, kUnitClamp, 1.0 - kUnitClamp);
}

double normal_cdf(double x);
double normal_quantile(double p);
double normal_pdf(double x);

/// log(exp(a) + exp(b)) without overflow.
inline double log_sum_exp(double a, double b) {
  const double m = std::max(a, b);
  if (!std::isfinite(m)) return m;
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

/// log(1 + exp(x)).
inline double softplus(double x) {
  return x > 35.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace vinestress
