#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vinestress/dvine.hpp"
#include "vinestress/marginals.hpp"

namespace vinestress {

struct StressScenario {
  std::vector<std::string> stressed;
  std::vector<double> kappas{0.95, 0.99};
  std::vector<double> alpha_grid{0.025, 0.5, 0.975};
  std::size_t lag = 0;

  /// Throws InputError for an empty stressed set or kappa list, levels
  /// outside (0,1) or a grid that is not strictly increasing.
  void validate() const;

  friend bool operator==(const StressScenario&, const StressScenario&) = default;
};

struct StressConfig {
  std::vector<FamilySpec> families = candidate_specs();
  /// Force every stressed covariate into each response's vine. When false the
  /// stressed sectors only form the candidate pool of forward selection.
  bool force_stressed = true;
  /// 0 = take VINESTRESS_THREADS from the environment, else hardware threads.
  unsigned threads = 0;
};

struct QuantilePrediction {
  std::string response;
  double kappa = 0.0;
  std::vector<double> alphas;
  std::vector<double> q_copula;
  std::vector<double> q_pd_scale;  // NaN when the panel has no marginals
  std::vector<std::string> families_on_path;
  std::vector<std::string> covariates;  // model order after the response
  /// Every stressed covariate on the response path was fitted as Independence.
  bool stress_effect_absent = false;
  std::size_t n_rows = 0;
  std::vector<SelectionStep> trace;
};

/// Rows of a scenario run sorted by (response, kappa) plus per-response
/// notes.
struct ScenarioTable {
  StressScenario scenario;
  std::vector<QuantilePrediction> predictions;
  std::vector<std::string> warnings;
  /// Per response: all response-path copulas positively dependent, and
  /// whether the conditional median was nondecreasing in kappa.
  std::vector<std::string> responses;
  std::vector<bool> positive_path;
  std::vector<bool> median_monotone_in_kappa;
};

/**
 * Aligns covariates lag rows behind the remaining columns: row t of the
 * result holds covariates from source row t and every other column from row
 * t + lag. Values are not re-ranked. Throws InputError when lag >= rows.
 */
PseudoPanel lag_covariates(const PseudoPanel& panel, const std::vector<std::string>& covariates, std::size_t lag);

/// Fit-and-predict for every non-stressed column at every kappa of the
/// scenario. Degenerate responses are skipped and reported in warnings.
ScenarioTable run_scenario(const PseudoPanel& panel, const StressScenario& scenario, const StressConfig& config = {});

/// One stressed sector at several stress levels.
ScenarioTable run_scenario_matrix(const PseudoPanel& panel, const std::string& stressed_label,
                                  const std::vector<double>& kappas, const std::vector<double>& alpha_grid,
                                  std::size_t lag = 0, const StressConfig& config = {});

/// Effective worker count: config value, else VINESTRESS_THREADS, else the
/// hardware concurrency.
unsigned resolve_threads(unsigned requested);

}  // namespace vinestress
