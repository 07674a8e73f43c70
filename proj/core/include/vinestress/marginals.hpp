#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vinestress/numeric.hpp"

namespace vinestress {

/// Monthly sector PD levels. Column j belongs to labels[j].
struct RawPanel {
  std::vector<std::string> dates;  // "YYYY-MM", strictly increasing
  std::vector<std::string> labels;
  Columns columns;

  std::size_t rows() const { return dates.size(); }
  /// Throws InputError if lengths disagree, dates are not increasing or
  /// there are fewer than three rows.
  void validate() const;
};

/// First differences of a RawPanel. dates[t] is the later month of the pair.
struct DiffPanel {
  std::vector<std::string> dates;
  std::vector<std::string> labels;
  Columns columns;
  std::size_t source_length = 0;

  std::size_t rows() const { return dates.size(); }
};

/**
 * Empirical CDF with plotting positions k/(n+1).
 *
 * Evaluation at a sample point returns its average rank divided by n+1;
 * between distinct sample points the value is linearly interpolated and
 * outside the sample range it is held at the extreme plotting positions.
 * The result therefore always lies in [1/(n+1), n/(n+1)].
 */
class MarginalEcdf {
 public:
  explicit MarginalEcdf(std::vector<double> sample);

  double operator()(double x) const;
  /// Empirical quantile: linear interpolation between order statistics at
  /// plotting positions k/(n+1). Throws InputError unless u is in (0,1).
  double quantile(double u) const;

  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }

  friend bool operator==(const MarginalEcdf&, const MarginalEcdf&) = default;

 private:
  double average_position(std::size_t lo, std::size_t hi) const;

  std::vector<double> sorted_;
};

/// Copula-scale panel. marginals is empty when the panel was loaded from a
/// pseudo-observation file without its companion differenced series.
struct PseudoPanel {
  std::vector<std::string> dates;
  std::vector<std::string> labels;
  Columns columns;
  std::vector<MarginalEcdf> marginals;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  bool has_marginals() const { return marginals.size() == columns.size() && !columns.empty(); }
  /// Index of a column; throws InputError naming the label when absent.
  std::size_t index_of(const std::string& label) const;
};

DiffPanel difference(const RawPanel& panel);

/// Average-rank pseudo-observations rank / (n+1) of one series.
Column pseudo_observations(std::span<const double> x);

PseudoPanel pit_transform(const DiffPanel& panel);

inline double pit_inverse(const MarginalEcdf& ecdf, double u) { return ecdf.quantile(u); }

/// Tie-adjusted Kendall tau (tau-b), O(n log n).
double kendall_tau(std::span<const double> x, std::span<const double> y);

/// Symmetric matrix of pairwise tau-b values with a unit diagonal.
std::vector<std::vector<double>> kendall_tau_matrix(const Columns& columns);

/// Sample autocorrelations at lags 1..max_lag.
std::vector<double> autocorrelations(std::span<const double> x, std::size_t max_lag);

struct AutocorrReport {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> acf;  // acf[column][lag - 1]
  std::vector<bool> flagged;
  std::vector<double> thresholds;  // 1.96 / sqrt(n) per column
};

/// Flags columns whose |acf(k)| exceeds 1.96/sqrt(n) at some k <= max_lag.
AutocorrReport autocorr_check(const DiffPanel& panel, std::size_t max_lag);

}  // namespace vinestress
