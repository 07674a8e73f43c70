#include "vinestress/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <string>

#include <boost/math/distributions/students_t.hpp>

#include "vinestress/errors.hpp"
#include "vinestress/rng.hpp"

namespace vinestress {

void GroundTruthSpec::validate() const {
  if (labels.size() < 2) throw InputError("spec needs at least 2 sector labels");
  if (std::set<std::string>(labels.begin(), labels.end()).size() != labels.size())
    throw InputError("spec labels contain duplicates");
  for (const auto& l : labels)
    if (l.empty() || l == "date") throw InputError("spec label '" + l + "' is reserved or empty");
  if (rows < 24) throw InputError("spec rows must be at least 24, got " + std::to_string(rows));
  if (correlation.has_value() == vine.has_value())
    throw InputError("spec needs exactly one of a correlation matrix or a D-vine");

  const auto d = static_cast<Eigen::Index>(labels.size());
  if (correlation) {
    const Eigen::MatrixXd& R = *correlation;
    if (R.rows() != d || R.cols() != d)
      throw InputError("correlation matrix must be " + std::to_string(d) + "x" + std::to_string(d));
    if (!R.allFinite()) throw InputError("correlation matrix has non-finite entries");
    for (Eigen::Index i = 0; i < d; ++i) {
      if (std::abs(R(i, i) - 1.0) > 1e-12) throw InputError("correlation matrix diagonal must be 1");
      for (Eigen::Index j = 0; j < i; ++j)
        if (std::abs(R(i, j) - R(j, i)) > 1e-12) throw InputError("correlation matrix is not symmetric");
    }
    if (Eigen::LLT<Eigen::MatrixXd>(R).info() != Eigen::Success)
      throw InputError("correlation matrix is not positive definite");
  }
  if (vine) {
    auto a = vine->order();
    auto b = labels;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw InputError("D-vine order must contain exactly the spec labels");
  }

  if (!(marginal.volatility > 0.0) || !std::isfinite(marginal.volatility))
    throw InputError("marginal volatility must be positive");
  if (!(marginal.base_level >= 0.0 && marginal.base_level <= 1.0))
    throw InputError("marginal base level must lie in [0,1]");
  if (marginal.tail_dof < 3) throw InputError("marginal tail_dof must be at least 3 for a finite variance");
  if (const auto& w = marginal.crisis) {
    if (!(w->start < w->end && w->end <= rows))
      throw InputError("crisis window must satisfy start < end <= rows");
    if (!(w->height > 0.0)) throw InputError("crisis height must be positive");
  }
}

std::vector<std::string> monthly_dates(const std::string& start, std::size_t n) {
  int year = 0, month = 0;
  char tail = 0;
  if (start.size() != 7 || std::sscanf(start.c_str(), "%4d-%2d%c", &year, &month, &tail) != 2 || month < 1 ||
      month > 12)
    throw InputError("start date '" + start + "' is not YYYY-MM");
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    const int m0 = (month - 1) + static_cast<int>(t);
    const int y = year + m0 / 12;
    if (y > 9999) throw InputError("date range runs past year 9999");
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", y, m0 % 12 + 1);
    out.emplace_back(buf);
  }
  return out;
}

Columns simulate_gaussian_copula(const Eigen::MatrixXd& correlation, std::size_t n, std::uint64_t seed) {
  const Eigen::LLT<Eigen::MatrixXd> llt(correlation);
  if (llt.info() != Eigen::Success) throw InputError("correlation matrix is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  const auto d = correlation.rows();
  Columns out(static_cast<std::size_t>(d), Column(n));
  Rng rng(seed);
  Eigen::VectorXd z(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) z[k] = rng.normal();
    const Eigen::VectorXd x = L * z;
    for (Eigen::Index k = 0; k < d; ++k) out[static_cast<std::size_t>(k)][i] = clamp_unit(normal_cdf(x[k]));
  }
  return out;
}

namespace {

// Copula-scale draws with one column per spec label.
Columns copula_draws(const GroundTruthSpec& spec, std::size_t n, std::uint64_t seed) {
  if (spec.correlation) return simulate_gaussian_copula(*spec.correlation, n, seed);
  const Columns sim = simulate(*spec.vine, n, seed);
  const auto& order = spec.vine->order();
  Columns out;
  for (const auto& label : spec.labels) {
    const auto pos = static_cast<std::size_t>(std::find(order.begin(), order.end(), label) - order.begin());
    out.push_back(sim[pos]);
  }
  return out;
}

void add_crisis(Column& level, const CrisisWindow& w) {
  const double walk_max = *std::max_element(level.begin(), level.end());
  const std::size_t width = w.end - w.start;
  const std::size_t peak = w.start + (width - 1) / 2;
  const auto shape = [&](std::size_t t) {
    const double x = (static_cast<double>(t - w.start) + 0.5) / static_cast<double>(width);
    return std::sin(std::numbers::pi * x);
  };
  const double amplitude = (walk_max + w.height - level[peak]) / shape(peak);
  for (std::size_t t = w.start; t < w.end; ++t) level[t] += amplitude * shape(t);
}

}  // namespace

GeneratedPanel generate_panel(const GroundTruthSpec& spec) {
  spec.validate();
  GeneratedPanel out;
  out.seed_randomized = !spec.seed.has_value();
  out.seed = spec.seed ? *spec.seed : random_seed();

  const std::size_t n_diff = spec.rows - 1;
  const Columns u = copula_draws(spec, n_diff, out.seed);

  const auto& m = spec.marginal;
  const boost::math::students_t_distribution<double> tdist(m.tail_dof);
  const double k = m.tail_dof;
  const double scale = m.volatility * std::sqrt((k - 2.0) / k);

  out.panel.dates = monthly_dates(spec.start_date, spec.rows);
  out.panel.labels = spec.labels;
  for (const auto& col : u) {
    Column level(spec.rows);
    level[0] = m.base_level;
    for (std::size_t t = 0; t < n_diff; ++t) level[t + 1] = level[t] + scale * boost::math::quantile(tdist, col[t]);
    if (m.crisis) add_crisis(level, *m.crisis);
    for (double& x : level) {
      if (x < 0.0 || x > 1.0) {
        ++out.clipped_cells;
        x = std::clamp(x, 0.0, 1.0);
      }
    }
    out.panel.columns.push_back(std::move(level));
  }

  const double cells = static_cast<double>(spec.rows * spec.labels.size());
  if (static_cast<double>(out.clipped_cells) > 0.01 * cells)
    out.warnings.push_back(std::to_string(out.clipped_cells) + " of " + std::to_string(spec.rows * spec.labels.size()) +
                           " PD levels were clipped to [0,1]");
  return out;
}

GroundTruthSpec default_ground_truth_spec() {
  GroundTruthSpec spec;
  spec.labels = {"Basic Materials", "Communications", "Cyclical Consumer Goods & Services",
                 "Non-cyclical Consumer Goods & Services", "Energy", "Financials", "Industrials", "Technology",
                 "Utilities"};
  // Weak to medium, mostly positive; Industrials (index 6) most connected,
  // Energy and Utilities comparatively detached.
  const double r[9][9] = {
      // BM    Com   Cyc   NCyc  Ene   Fin   Ind   Tech  Util
      {1.00, 0.35, 0.45, 0.30, 0.15, 0.25, 0.60, 0.35, 0.10},
      {0.35, 1.00, 0.40, 0.30, 0.05, 0.20, 0.50, 0.45, 0.15},
      {0.45, 0.40, 1.00, 0.35, 0.10, 0.30, 0.60, 0.40, 0.10},
      {0.30, 0.30, 0.35, 1.00, 0.10, 0.25, 0.45, 0.30, 0.20},
      {0.15, 0.05, 0.10, 0.10, 1.00, -0.05, 0.20, 0.05, 0.15},
      {0.25, 0.20, 0.30, 0.25, -0.05, 1.00, 0.35, 0.20, 0.25},
      {0.60, 0.50, 0.60, 0.45, 0.20, 0.35, 1.00, 0.55, 0.20},
      {0.35, 0.45, 0.40, 0.30, 0.05, 0.20, 0.55, 1.00, 0.10},
      {0.10, 0.15, 0.10, 0.20, 0.15, 0.25, 0.20, 0.10, 1.00},
  };
  Eigen::MatrixXd R(9, 9);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) R(i, j) = r[i][j];
  spec.correlation = R;
  spec.rows = 1000;
  spec.seed = 20170501;
  return spec;
}

}  // namespace vinestress
