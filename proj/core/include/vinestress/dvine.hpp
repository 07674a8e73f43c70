#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vinestress/bicop.hpp"
#include "vinestress/numeric.hpp"

namespace vinestress {

/// One adopted step of forward covariate selection.
struct SelectionStep {
  std::string candidate;
  std::size_t position = 0;  // index in the variable order, 1 = next to the response
  double cll = 0.0;          // conditional log-likelihood after the step
  double aic = 0.0;          // -2 cll + 2 * (parameters of the whole vine)

  friend bool operator==(const SelectionStep&, const SelectionStep&) = default;
};

/**
 * Simplified D-vine on the path order[0] - order[1] - ... - order[d], with
 * the response at order[0].
 *
 * pair(t, e) for tree t in 1..d and edge e in 0..d-t is the copula
 * c_{e, e+t; e+1..e+t-1}. Its first argument is F(x_e | x_{e+1..e+t-1}) and
 * its second F(x_{e+t} | x_{e+1..e+t-1}).
 */
class DVineModel {
 public:
  DVineModel() = default;
  /// trees[t-1] holds the d+1-t copulas of tree t. Throws InputError on
  /// duplicate labels or a malformed triangle.
  DVineModel(std::vector<std::string> order, std::vector<std::vector<BivariateCopula>> trees);

  /// Model over the given order with every pair independent.
  static DVineModel independent(std::vector<std::string> order);

  const std::vector<std::string>& order() const { return order_; }
  std::size_t dimension() const { return order_.size(); }
  std::size_t num_covariates() const { return order_.empty() ? 0 : order_.size() - 1; }
  const std::string& response() const { return order_.front(); }
  std::vector<std::string> covariates() const { return {order_.begin() + 1, order_.end()}; }

  const BivariateCopula& pair(std::size_t tree, std::size_t edge) const;
  const std::vector<std::vector<BivariateCopula>>& trees() const { return trees_; }
  std::size_t num_pairs() const;
  int num_parameters() const;

  /// Copulas c_{0,t; 1..t-1}, t = 1..d: the factors of the conditional
  /// density of the response.
  std::vector<BivariateCopula> response_path() const;

  std::vector<SelectionStep> trace;
  double conditional_loglik = 0.0;
  std::size_t n = 0;
  bool no_covariate_selected = false;

  friend bool operator==(const DVineModel& a, const DVineModel& b) {
    return a.order_ == b.order_ && a.trees_ == b.trees_ && a.trace == b.trace;
  }

 private:
  std::vector<std::string> order_;
  std::vector<std::vector<BivariateCopula>> trees_;
};

/// Joint log-density of the copula data; columns are given in model order.
double dvine_loglik(const DVineModel& model, const Columns& columns);

/// Sum over rows of log c_{V|U1..Ud}(v | u).
double conditional_loglik(const DVineModel& model, const Columns& columns);

/// C_{V|U1..Ud}(v | u); u holds the covariates in model order.
double conditional_cdf(const DVineModel& model, double v, std::span<const double> u);

/// Conditional quantile by chained inverse h-functions.
double conditional_quantile(const DVineModel& model, double alpha, std::span<const double> u);

/// Quantiles for several levels at one covariate point; the covariate
/// recursion is shared.
std::vector<double> conditional_quantiles(const DVineModel& model, std::span<const double> alphas,
                                          std::span<const double> u);

struct VineFitConfig {
  std::vector<FamilySpec> families = candidate_specs();
  /// Level of the per-pair independence pre-test; 0 disables it.
  double independence_level = 0.05;
  /// Adopt the best candidate at every step until the pool is exhausted.
  bool force_all = false;
};

/// Fit every pair of a D-vine with a fixed order by sequential family
/// selection. columns are given in that order.
DVineModel fit_dvine(std::vector<std::string> order, const Columns& columns, const VineFitConfig& config = {});

/**
 * Greedy forward covariate selection.
 *
 * Each step tries every unused candidate at every insertion position in the
 * covariate sequence, fits the pairs that the new order introduces and
 * scores the order by conditional log-likelihood. The step adopts the order
 * with the best AIC-penalized score if it beats the current model (always,
 * under force_all); otherwise selection stops.
 */
DVineModel forward_select(const std::string& response_label, std::span<const double> response,
                          const std::vector<std::string>& candidate_labels, const Columns& candidates,
                          const VineFitConfig& config = {});

/// n draws from the vine by inverse Rosenblatt transform, columns in model
/// order. Deterministic in seed.
Columns simulate(const DVineModel& model, std::size_t n, std::uint64_t seed);

}  // namespace vinestress
