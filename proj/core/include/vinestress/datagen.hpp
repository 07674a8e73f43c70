#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vinestress/dvine.hpp"
#include "vinestress/marginals.hpp"

namespace vinestress {

/// Additive hump on the PD level over rows [start, end). Its height is
/// chosen so the peak sits `height` above the largest level the random walk
/// reaches anywhere, which puts the series maximum inside the window.
struct CrisisWindow {
  std::size_t start = 0;
  std::size_t end = 0;
  double height = 0.05;

  friend bool operator==(const CrisisWindow&, const CrisisWindow&) = default;
};

struct MarginalShape {
  double base_level = 0.05;
  /// Standard deviation of the monthly differences.
  double volatility = 5e-4;
  /// Differences are scaled Student-t with this many degrees of freedom.
  int tail_dof = 5;
  std::optional<CrisisWindow> crisis;

  friend bool operator==(const MarginalShape&, const MarginalShape&) = default;
};

struct GroundTruthSpec {
  std::vector<std::string> labels;
  /// Exactly one of correlation / vine is set.
  std::optional<Eigen::MatrixXd> correlation;
  std::optional<DVineModel> vine;
  MarginalShape marginal;
  std::size_t rows = 1000;
  std::optional<std::uint64_t> seed;
  std::string start_date = "2007-05";

  /// Throws InputError on inconsistent labels, rows < 24, a correlation
  /// matrix that is not symmetric positive definite, or a malformed window.
  void validate() const;
};

struct GeneratedPanel {
  RawPanel panel;
  std::uint64_t seed = 0;
  bool seed_randomized = false;
  std::size_t clipped_cells = 0;
  std::vector<std::string> warnings;
};

/// Simulates copula-scale differences, maps them through the marginal,
/// cumulates from the base level and clips to [0,1].
GeneratedPanel generate_panel(const GroundTruthSpec& spec);

/// Nine sectors with weak-to-medium, mostly positive Gaussian dependence and
/// Industrials most connected; 1000 rows, seed 20170501.
GroundTruthSpec default_ground_truth_spec();

/// Draws from a Gaussian copula with the given correlation, one column per
/// variable.
Columns simulate_gaussian_copula(const Eigen::MatrixXd& correlation, std::size_t n, std::uint64_t seed);

/// "YYYY-MM" labels for n consecutive months.
std::vector<std::string> monthly_dates(const std::string& start, std::size_t n);

}  // namespace vinestress
