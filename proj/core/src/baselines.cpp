#include "vinestress/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "vinestress/errors.hpp"

namespace vinestress {

double LinearFit::predict(std::span<const double> x) const {
  if (x.size() != slopes.size()) throw InputError("predict: expected " + std::to_string(slopes.size()) + " covariates");
  double q = intercept;
  for (std::size_t k = 0; k < x.size(); ++k) q += slopes[k] * x[k];
  return q;
}

Eigen::VectorXd LinearFit::predict(const Eigen::MatrixXd& X) const {
  if (static_cast<std::size_t>(X.cols()) != slopes.size())
    throw InputError("predict: expected " + std::to_string(slopes.size()) + " covariate columns");
  Eigen::VectorXd out = Eigen::VectorXd::Constant(X.rows(), intercept);
  for (Eigen::Index k = 0; k < X.cols(); ++k) out += slopes[static_cast<std::size_t>(k)] * X.col(k);
  return out;
}

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> y) {
  return {y.data(), static_cast<Eigen::Index>(y.size())};
}

Eigen::VectorXd residuals(const Eigen::MatrixXd& X, std::span<const double> y, double intercept,
                          std::span<const double> slopes) {
  if (static_cast<std::size_t>(X.cols()) != slopes.size()) throw InputError("coefficient count mismatch");
  Eigen::VectorXd r = as_vector(y).array() - intercept;
  for (Eigen::Index k = 0; k < X.cols(); ++k) r -= slopes[static_cast<std::size_t>(k)] * X.col(k);
  return r;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd X1(X.rows(), X.cols() + 1);
  X1.col(0).setOnes();
  X1.rightCols(X.cols()) = X;
  return X1;
}

// Validates shapes and throws InputError naming dependent columns if the
// design [1 X] is rank deficient.
Eigen::MatrixXd checked_design(const Eigen::MatrixXd& X, std::span<const double> y, double level) {
  if (static_cast<std::size_t>(X.rows()) != y.size())
    throw InputError("design has " + std::to_string(X.rows()) + " rows but response has " + std::to_string(y.size()));
  if (!(level > 0.0 && level < 1.0)) throw InputError("level must lie in (0,1)");
  if (X.rows() < X.cols() + 1)
    throw InputError("need at least " + std::to_string(X.cols() + 1) + " rows for " + std::to_string(X.cols()) +
                     " covariates plus intercept");
  for (double v : y)
    if (!std::isfinite(v)) throw InputError("response contains a non-finite value");
  if (!X.allFinite()) throw InputError("design contains a non-finite value");
  Eigen::MatrixXd X1 = with_intercept(X);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X1);
  qr.setThreshold(1e-10);
  if (qr.rank() < X1.cols()) {
    std::ostringstream msg;
    msg << "rank-deficient design; linearly dependent columns:";
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < X1.cols(); ++k) {
      const auto col = perm[k];
      msg << (k > qr.rank() ? ", " : " ") << (col == 0 ? std::string("intercept") : "x" + std::to_string(col));
    }
    throw InputError(msg.str());
  }
  return X1;
}

LinearFit make_fit(double level, const Eigen::VectorXd& beta) {
  LinearFit fit;
  fit.level = level;
  fit.intercept = beta[0];
  fit.slopes.assign(beta.data() + 1, beta.data() + beta.size());
  return fit;
}

/**
 * Revised simplex for  max c'x  s.t.  A x = b,  lb <= x <= ub  with a dense
 * p x p basis. Phase 1 starts from all structural variables at their lower
 * bound and one artificial per row. Dantzig pricing falls back to Bland's
 * rule after a run of degenerate pivots.
 */
class BoundedSimplex {
 public:
  BoundedSimplex(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const Eigen::VectorXd& cost)
      : A_(A), b_(b), p_(A.rows()), n_(A.cols()) {
    const Eigen::Index total = n_ + p_;
    lb_ = Eigen::VectorXd::Zero(total);
    ub_ = Eigen::VectorXd::Ones(total);
    x_ = Eigen::VectorXd::Zero(total);
    sign_ = Eigen::VectorXd::Ones(p_);
    for (Eigen::Index i = 0; i < p_; ++i) {
      sign_[i] = b_[i] >= 0.0 ? 1.0 : -1.0;
      x_[n_ + i] = std::abs(b_[i]);
      ub_[n_ + i] = std::numeric_limits<double>::infinity();
      basis_.push_back(n_ + i);
    }
    structural_cost_ = cost;
    scale_ = std::max(1.0, cost.cwiseAbs().maxCoeff());
  }

  void solve() {
    Eigen::VectorXd c1 = Eigen::VectorXd::Zero(n_ + p_);
    c1.tail(p_).setConstant(-1.0);
    run(c1, 1.0);
    if (x_.tail(p_).sum() > 1e-9 * std::max(1.0, b_.cwiseAbs().maxCoeff()))
      throw NumericalError("quantile regression LP: phase 1 found no feasible point");
    for (Eigen::Index i = 0; i < p_; ++i) {
      x_[n_ + i] = 0.0;
      ub_[n_ + i] = 0.0;
    }
    drive_out_artificials();
    Eigen::VectorXd c2 = Eigen::VectorXd::Zero(n_ + p_);
    c2.head(n_) = structural_cost_;
    run(c2, scale_);
    duals_ = duals(c2);
  }

  const Eigen::VectorXd& multipliers() const { return duals_; }
  std::size_t iterations() const { return iterations_; }

 private:
  Eigen::VectorXd column(Eigen::Index j) const {
    if (j < n_) return A_.col(j);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(p_);
    e[j - n_] = sign_[j - n_];
    return e;
  }

  Eigen::MatrixXd basis_matrix() const {
    Eigen::MatrixXd B(p_, p_);
    for (Eigen::Index r = 0; r < p_; ++r) B.col(r) = column(basis_[static_cast<std::size_t>(r)]);
    return B;
  }

  bool is_basic(Eigen::Index j) const { return std::find(basis_.begin(), basis_.end(), j) != basis_.end(); }

  Eigen::VectorXd duals(const Eigen::VectorXd& c) const {
    Eigen::VectorXd cb(p_);
    for (Eigen::Index r = 0; r < p_; ++r) cb[r] = c[basis_[static_cast<std::size_t>(r)]];
    return basis_matrix().transpose().fullPivLu().solve(cb);
  }

  // Recomputes basic values from the nonbasic ones.
  void refresh_basic(const Eigen::FullPivLU<Eigen::MatrixXd>& lu) {
    Eigen::VectorXd rhs = b_;
    for (Eigen::Index j = 0; j < n_ + p_; ++j)
      if (!is_basic(j) && x_[j] != 0.0) rhs -= x_[j] * column(j);
    const Eigen::VectorXd xb = lu.solve(rhs);
    for (Eigen::Index r = 0; r < p_; ++r) x_[basis_[static_cast<std::size_t>(r)]] = xb[r];
  }

  void drive_out_artificials() {
    for (Eigen::Index r = 0; r < p_; ++r) {
      if (basis_[static_cast<std::size_t>(r)] < n_) continue;
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(basis_matrix());
      Eigen::Index best = -1;
      double best_mag = 1e-9;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (is_basic(j)) continue;
        const double mag = std::abs(lu.solve(column(j))[r]);
        if (mag > best_mag) {
          best_mag = mag;
          best = j;
        }
      }
      if (best >= 0) basis_[static_cast<std::size_t>(r)] = best;
    }
    refresh_basic(Eigen::FullPivLU<Eigen::MatrixXd>(basis_matrix()));
  }

  void run(const Eigen::VectorXd& c, double cost_scale) {
    const double dtol = 1e-11 * cost_scale;
    const std::size_t max_iter = 50 * static_cast<std::size_t>(n_ + p_) + 1000;
    std::size_t degenerate = 0;
    for (std::size_t it = 0; it < max_iter; ++it, ++iterations_) {
      const Eigen::MatrixXd B = basis_matrix();
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
      refresh_basic(lu);
      const Eigen::VectorXd pi = duals(c);
      const bool bland = degenerate > 50;

      Eigen::Index enter = -1;
      double enter_score = 0.0;
      double dir = 0.0;
      for (Eigen::Index j = 0; j < n_ + p_; ++j) {
        if (is_basic(j) || lb_[j] == ub_[j]) continue;
        const double dj = c[j] - pi.dot(column(j));
        double s = 0.0;
        if (x_[j] <= lb_[j] && dj > dtol) s = dj;
        else if (x_[j] >= ub_[j] && dj < -dtol) s = -dj;
        if (s <= 0.0) continue;
        if (bland) {
          enter = j;
          dir = dj > 0.0 ? 1.0 : -1.0;
          break;
        }
        if (s > enter_score) {
          enter_score = s;
          enter = j;
          dir = dj > 0.0 ? 1.0 : -1.0;
        }
      }
      if (enter < 0) return;

      const Eigen::VectorXd w = lu.solve(column(enter));
      double step = ub_[enter] - lb_[enter];
      Eigen::Index leave = -1;
      bool leave_to_upper = false;
      for (Eigen::Index r = 0; r < p_; ++r) {
        const Eigen::Index var = basis_[static_cast<std::size_t>(r)];
        const double rate = -dir * w[r];
        double limit = std::numeric_limits<double>::infinity();
        bool to_upper = false;
        if (rate < -1e-12) {
          limit = std::max(0.0, (x_[var] - lb_[var]) / -rate);
        } else if (rate > 1e-12 && std::isfinite(ub_[var])) {
          limit = std::max(0.0, (ub_[var] - x_[var]) / rate);
          to_upper = true;
        }
        if (limit < step || (bland && limit == step && leave >= 0 && var < basis_[static_cast<std::size_t>(leave)])) {
          step = limit;
          leave = r;
          leave_to_upper = to_upper;
        }
      }
      if (!std::isfinite(step)) throw NumericalError("quantile regression LP is unbounded");

      degenerate = step < 1e-12 ? degenerate + 1 : 0;
      x_[enter] += dir * step;
      if (leave < 0) {
        x_[enter] = dir > 0.0 ? ub_[enter] : lb_[enter];  // bound flip
        continue;
      }
      const Eigen::Index out = basis_[static_cast<std::size_t>(leave)];
      x_[out] = leave_to_upper ? ub_[out] : lb_[out];
      basis_[static_cast<std::size_t>(leave)] = enter;
    }
    throw NumericalError("quantile regression LP exceeded its iteration budget");
  }

  const Eigen::MatrixXd& A_;
  Eigen::VectorXd b_;
  Eigen::Index p_, n_;
  Eigen::VectorXd lb_, ub_, x_, sign_, structural_cost_, duals_;
  std::vector<Eigen::Index> basis_;
  double scale_ = 1.0;
  std::size_t iterations_ = 0;
};

}  // namespace

double pinball_objective(const Eigen::MatrixXd& X, std::span<const double> y, double alpha, double intercept,
                         std::span<const double> slopes) {
  const Eigen::VectorXd r = residuals(X, y, intercept, slopes);
  double obj = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) obj += r[i] >= 0.0 ? alpha * r[i] : (alpha - 1.0) * r[i];
  return obj;
}

double expectile_objective(const Eigen::MatrixXd& X, std::span<const double> y, double alpha, double intercept,
                           std::span<const double> slopes) {
  const Eigen::VectorXd r = residuals(X, y, intercept, slopes);
  double obj = 0.0;
  for (Eigen::Index i = 0; i < r.size(); ++i) obj += (r[i] >= 0.0 ? alpha : 1.0 - alpha) * r[i] * r[i];
  return obj;
}

LinearFit fit_linear_quantile(const Eigen::MatrixXd& X, std::span<const double> y, double alpha) {
  const Eigen::MatrixXd X1 = checked_design(X, y, alpha);
  const Eigen::MatrixXd A = X1.transpose();
  const Eigen::VectorXd b = (1.0 - alpha) * A.rowwise().sum();
  BoundedSimplex lp(A, b, as_vector(y));
  lp.solve();
  LinearFit fit = make_fit(alpha, lp.multipliers());
  fit.objective = pinball_objective(X, y, alpha, fit.intercept, fit.slopes);
  fit.iterations = lp.iterations();
  return fit;
}

LinearFit fit_ols(const Eigen::MatrixXd& X, std::span<const double> y) {
  const Eigen::MatrixXd X1 = checked_design(X, y, 0.5);
  const Eigen::VectorXd beta = X1.colPivHouseholderQr().solve(as_vector(y));
  LinearFit fit = make_fit(0.5, beta);
  fit.objective = (as_vector(y) - X1 * beta).squaredNorm();
  return fit;
}

LinearFit fit_expectile(const Eigen::MatrixXd& X, std::span<const double> y, double alpha, std::size_t max_iter,
                        double tol) {
  const Eigen::MatrixXd X1 = checked_design(X, y, alpha);
  const auto yv = as_vector(y);
  Eigen::VectorXd beta = X1.colPivHouseholderQr().solve(yv);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const Eigen::VectorXd r = yv - X1 * beta;
    Eigen::VectorXd sw(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i) sw[i] = std::sqrt(r[i] >= 0.0 ? alpha : 1.0 - alpha);
    const Eigen::MatrixXd Xw = sw.asDiagonal() * X1;
    const Eigen::VectorXd yw = sw.cwiseProduct(yv);
    const Eigen::VectorXd next = Xw.colPivHouseholderQr().solve(yw);
    const double change = (next - beta).cwiseAbs().maxCoeff();
    beta = next;
    if (change < tol) {
      LinearFit fit = make_fit(alpha, beta);
      fit.objective = expectile_objective(X, y, alpha, fit.intercept, fit.slopes);
      fit.iterations = it;
      return fit;
    }
  }
  std::ostringstream msg;
  msg << "expectile IRLS did not converge in " << max_iter << " iterations; last iterate:";
  for (Eigen::Index k = 0; k < beta.size(); ++k) msg << ' ' << beta[k];
  throw NumericalError(msg.str());
}

CrossingReport detect_crossings(std::span<const double> levels, const std::vector<std::vector<double>>& predictions) {
  if (levels.size() < 2) throw InputError("crossing detection needs at least 2 levels");
  if (predictions.size() != levels.size()) throw InputError("one prediction row per level is required");
  for (std::size_t k = 1; k < levels.size(); ++k)
    if (!(levels[k - 1] < levels[k])) throw InputError("levels must be strictly increasing");
  const std::size_t points = predictions.front().size();
  for (const auto& row : predictions)
    if (row.size() != points) throw InputError("prediction rows differ in length");

  CrossingReport report;
  report.levels.assign(levels.begin(), levels.end());
  report.per_pair.assign(levels.size() - 1, 0);
  report.per_point.assign(points, 0);
  for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
    for (std::size_t i = 0; i < points; ++i) {
      if (predictions[k][i] > predictions[k + 1][i] + 1e-12) {
        ++report.per_pair[k];
        ++report.per_point[i];
        ++report.total;
      }
    }
  }
  return report;
}

CrossingReport detect_crossings(std::span<const LinearFit> fits, const Eigen::MatrixXd& X_eval) {
  std::vector<double> levels;
  std::vector<std::vector<double>> preds;
  for (const auto& f : fits) {
    levels.push_back(f.level);
    const Eigen::VectorXd p = f.predict(X_eval);
    preds.emplace_back(p.data(), p.data() + p.size());
  }
  return detect_crossings(levels, preds);
}

}  // namespace vinestress
