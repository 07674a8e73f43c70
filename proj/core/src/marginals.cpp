#include "vinestress/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "vinestress/errors.hpp"

namespace vinestress {

void RawPanel::validate() const {
  if (labels.size() != columns.size())
    throw InputError("panel has " + std::to_string(labels.size()) + " labels but " +
                     std::to_string(columns.size()) + " columns");
  if (rows() < 3) throw InputError("panel needs at least 3 rows, got " + std::to_string(rows()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    if (columns[j].size() != rows())
      throw InputError("column '" + labels[j] + "' has " + std::to_string(columns[j].size()) +
                       " values, expected " + std::to_string(rows()));
  }
  for (std::size_t t = 1; t < dates.size(); ++t) {
    if (!(dates[t - 1] < dates[t]))
      throw InputError("dates not strictly increasing at row " + std::to_string(t + 1) + " (" + dates[t - 1] +
                       " then " + dates[t] + ")");
  }
}

std::size_t PseudoPanel::index_of(const std::string& label) const {
  const auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw InputError("unknown sector label '" + label + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

DiffPanel difference(const RawPanel& panel) {
  if (panel.rows() < 2) throw InputError("series shorter than 2 cannot be differenced");
  DiffPanel out;
  out.labels = panel.labels;
  out.source_length = panel.rows();
  out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
  out.columns.reserve(panel.columns.size());
  for (const auto& col : panel.columns) {
    if (col.size() < 2) throw InputError("series shorter than 2 cannot be differenced");
    Column d(col.size() - 1);
    for (std::size_t t = 0; t + 1 < col.size(); ++t) d[t] = col[t + 1] - col[t];
    out.columns.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------

MarginalEcdf::MarginalEcdf(std::vector<double> sample) : sorted_(std::move(sample)) {
  if (sorted_.empty()) throw InputError("empirical CDF needs a nonempty sample");
  for (double x : sorted_)
    if (!std::isfinite(x)) throw InputError("empirical CDF sample contains a non-finite value");
  std::sort(sorted_.begin(), sorted_.end());
}

// Mean of the plotting positions (k+1)/(n+1) for k in [lo, hi).
double MarginalEcdf::average_position(std::size_t lo, std::size_t hi) const {
  const double avg_rank = 0.5 * static_cast<double>(lo + 1 + hi);
  return avg_rank / static_cast<double>(sorted_.size() + 1);
}

double MarginalEcdf::operator()(double x) const {
  const auto lo = std::lower_bound(sorted_.begin(), sorted_.end(), x);
  const auto hi = std::upper_bound(lo, sorted_.end(), x);
  const auto ilo = static_cast<std::size_t>(lo - sorted_.begin());
  const auto ihi = static_cast<std::size_t>(hi - sorted_.begin());
  if (ilo != ihi) return average_position(ilo, ihi);
  const std::size_t n = sorted_.size();
  if (ilo == 0) return 1.0 / static_cast<double>(n + 1);
  if (ilo == n) return static_cast<double>(n) / static_cast<double>(n + 1);

  // Strictly between two distinct sample values.
  const double left = sorted_[ilo - 1];
  const double right = sorted_[ilo];
  const auto left_lo = static_cast<std::size_t>(std::lower_bound(sorted_.begin(), sorted_.end(), left) - sorted_.begin());
  const auto right_hi = static_cast<std::size_t>(std::upper_bound(sorted_.begin(), sorted_.end(), right) - sorted_.begin());
  const double f_left = average_position(left_lo, ilo);
  const double f_right = average_position(ilo, right_hi);
  const double w = (x - left) / (right - left);
  return f_left + w * (f_right - f_left);
}

double MarginalEcdf::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw InputError("quantile level must lie in (0,1), got " + std::to_string(u));
  const std::size_t n = sorted_.size();
  double k = u * static_cast<double>(n + 1);  // 1-based fractional order statistic
  // Snap plotting positions k/(n+1) back onto their order statistic.
  if (const double r = std::round(k); std::abs(k - r) < 1e-9) k = r;
  if (k <= 1.0) return sorted_.front();
  if (k >= static_cast<double>(n)) return sorted_.back();
  const auto below = static_cast<std::size_t>(std::floor(k));
  const double frac = k - static_cast<double>(below);
  const double a = sorted_[below - 1];
  if (frac == 0.0) return a;
  return a + frac * (sorted_[below] - a);
}

Column pseudo_observations(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  Column u(n);
  const double denom = static_cast<double>(n + 1);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && x[idx[j]] == x[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) u[idx[k]] = avg_rank / denom;
    i = j;
  }
  return u;
}

PseudoPanel pit_transform(const DiffPanel& panel) {
  PseudoPanel out;
  out.dates = panel.dates;
  out.labels = panel.labels;
  for (std::size_t j = 0; j < panel.columns.size(); ++j) {
    const auto& col = panel.columns[j];
    if (col.size() < 2)
      throw InputError("column '" + panel.labels[j] + "' needs at least 2 observations for the PIT");
    out.columns.push_back(pseudo_observations(col));
    out.marginals.emplace_back(col);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::int64_t tie_pairs(std::int64_t run) { return run * (run - 1) / 2; }

// Counts inversions of v by merge sort; v ends up sorted.
std::int64_t count_inversions(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = count_inversions(v, buf, lo, mid) + count_inversions(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError("kendall_tau: series lengths differ");
  const std::size_t n = x.size();
  if (n < 2) throw InputError("kendall_tau: need at least 2 observations");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });

  // Ties in x (n1) and joint ties (n3) from the lexicographic order.
  std::int64_t n1 = 0, n3 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && x[idx[j]] == x[idx[i]]) ++j;
    n1 += tie_pairs(static_cast<std::int64_t>(j - i));
    for (std::size_t a = i; a < j;) {
      std::size_t b = a + 1;
      while (b < j && y[idx[b]] == y[idx[a]]) ++b;
      n3 += tie_pairs(static_cast<std::int64_t>(b - a));
      a = b;
    }
    i = j;
  }

  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  const std::int64_t swaps = count_inversions(ys, buf, 0, n);

  std::int64_t n2 = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && ys[j] == ys[i]) ++j;
    n2 += tie_pairs(static_cast<std::int64_t>(j - i));
    i = j;
  }

  const std::int64_t n0 = tie_pairs(static_cast<std::int64_t>(n));
  if (n0 == n1 || n0 == n2) throw DegenerateInputError("kendall_tau: constant input series");
  const std::int64_t numer = n0 - n1 - n2 + n3 - 2 * swaps;
  return static_cast<double>(numer) /
         std::sqrt(static_cast<double>(n0 - n1) * static_cast<double>(n0 - n2));
}

std::vector<std::vector<double>> kendall_tau_matrix(const Columns& columns) {
  const std::size_t d = columns.size();
  std::vector<std::vector<double>> tau(d, std::vector<double>(d, 1.0));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) tau[i][j] = tau[j][i] = kendall_tau(columns[i], columns[j]);
  return tau;
}

std::vector<double> autocorrelations(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (max_lag >= n) throw InputError("autocorrelation lag must be below the series length");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double denom = 0.0;
  for (double v : x) denom += (v - mean) * (v - mean);
  if (denom == 0.0) throw DegenerateInputError("autocorrelation of a constant series is undefined");
  std::vector<double> acf(max_lag);
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double num = 0.0;
    for (std::size_t t = 0; t + k < n; ++t) num += (x[t] - mean) * (x[t + k] - mean);
    acf[k - 1] = num / denom;
  }
  return acf;
}

AutocorrReport autocorr_check(const DiffPanel& panel, std::size_t max_lag) {
  AutocorrReport report;
  report.labels = panel.labels;
  for (const auto& col : panel.columns) {
    auto acf = autocorrelations(col, max_lag);
    const double threshold = 1.96 / std::sqrt(static_cast<double>(col.size()));
    const bool flag = std::any_of(acf.begin(), acf.end(), [&](double a) { return std::abs(a) > threshold; });
    report.acf.push_back(std::move(acf));
    report.flagged.push_back(flag);
    report.thresholds.push_back(threshold);
  }
  return report;
}

}  // namespace vinestress
