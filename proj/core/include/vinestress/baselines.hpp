#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace vinestress {

/// Linear fit y ~ intercept + slopes' x at a quantile or expectile level.
struct LinearFit {
  double level = 0.5;
  double intercept = 0.0;
  std::vector<double> slopes;
  double objective = 0.0;
  std::size_t iterations = 0;

  double predict(std::span<const double> x) const;
  /// Predictions for each row of X.
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

/// Sum of pinball losses rho_alpha(y - intercept - X slopes).
double pinball_objective(const Eigen::MatrixXd& X, std::span<const double> y, double alpha, double intercept,
                         std::span<const double> slopes);

/// Sum of asymmetric squared losses at expectile level alpha.
double expectile_objective(const Eigen::MatrixXd& X, std::span<const double> y, double alpha, double intercept,
                           std::span<const double> slopes);

/**
 * Linear quantile regression.
 *
 * Solves the dual linear program max y'a s.t. X1'a = (1-alpha) X1'1,
 * 0 <= a <= 1 (X1 = [1 X]) with a bounded-variable revised simplex; the
 * coefficients are the simplex multipliers of the optimal basis. X may have
 * zero columns (intercept-only). Throws InputError for a rank-deficient
 * design, naming the dependent columns.
 */
LinearFit fit_linear_quantile(const Eigen::MatrixXd& X, std::span<const double> y, double alpha);

/// Ordinary least squares with intercept.
LinearFit fit_ols(const Eigen::MatrixXd& X, std::span<const double> y);

/**
 * Expectile regression by iteratively reweighted least squares.
 *
 * Weights are alpha for nonnegative residuals and 1-alpha otherwise; the
 * iteration stops once the largest coefficient change is below tol. Throws
 * NumericalError if max_iter is exhausted.
 */
LinearFit fit_expectile(const Eigen::MatrixXd& X, std::span<const double> y, double alpha,
                        std::size_t max_iter = 500, double tol = 1e-10);

struct CrossingReport {
  std::vector<double> levels;
  std::vector<std::size_t> per_pair;   // per adjacent level pair
  std::vector<std::size_t> per_point;  // per evaluation point
  std::size_t total = 0;
};

/// Counts adjacent level pairs whose lower-level prediction exceeds the
/// higher-level one by more than 1e-12. predictions[level][point].
CrossingReport detect_crossings(std::span<const double> levels, const std::vector<std::vector<double>>& predictions);

CrossingReport detect_crossings(std::span<const LinearFit> fits, const Eigen::MatrixXd& X_eval);

inline constexpr double kDefaultLevels[] = {0.05, 0.25, 0.5, 0.75, 0.95};

}  // namespace vinestress
