#include "vinestress/stress.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <thread>

#include "vinestress/errors.hpp"
#include "vinestress/parallel.hpp"

namespace vinestress {

void StressScenario::validate() const {
  if (stressed.empty()) throw InputError("scenario: stressed set is empty");
  if (std::set<std::string>(stressed.begin(), stressed.end()).size() != stressed.size())
    throw InputError("scenario: stressed set contains duplicates");
  if (kappas.empty()) throw InputError("scenario: kappa list is empty");
  for (double k : kappas)
    if (!(k > 0.0 && k < 1.0)) throw InputError("scenario: kappa " + std::to_string(k) + " outside the (0,1) domain");
  if (alpha_grid.empty()) throw InputError("scenario: alpha grid is empty");
  for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
    const double a = alpha_grid[i];
    if (!(a > 0.0 && a < 1.0)) throw InputError("scenario: alpha " + std::to_string(a) + " outside the (0,1) domain");
    if (i > 0 && !(alpha_grid[i - 1] < a)) throw InputError("scenario: alpha grid must be strictly increasing");
  }
}

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("VINESTRESS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

PseudoPanel lag_covariates(const PseudoPanel& panel, const std::vector<std::string>& covariates, std::size_t lag) {
  const std::size_t n = panel.rows();
  if (lag >= n) throw InputError("lag " + std::to_string(lag) + " must be below the row count " + std::to_string(n));
  if (lag == 0) return panel;
  std::vector<bool> is_cov(panel.labels.size(), false);
  for (const auto& label : covariates) is_cov[panel.index_of(label)] = true;

  PseudoPanel out;
  out.labels = panel.labels;
  out.marginals = panel.marginals;
  if (panel.dates.size() == n) out.dates.assign(panel.dates.begin() + static_cast<std::ptrdiff_t>(lag), panel.dates.end());
  for (std::size_t j = 0; j < panel.columns.size(); ++j) {
    const auto& col = panel.columns[j];
    if (is_cov[j])
      out.columns.emplace_back(col.begin(), col.end() - static_cast<std::ptrdiff_t>(lag));
    else
      out.columns.emplace_back(col.begin() + static_cast<std::ptrdiff_t>(lag), col.end());
  }
  return out;
}

namespace {

struct ResponseFit {
  std::optional<DVineModel> model;
  std::string warning;
};

ResponseFit fit_response(const PseudoPanel& panel, const std::string& response, const StressScenario& scenario,
                         const StressConfig& config) {
  ResponseFit out;
  Columns cands;
  for (const auto& s : scenario.stressed) cands.push_back(panel.columns[panel.index_of(s)]);
  try {
    VineFitConfig vc;
    vc.families = config.families;
    vc.force_all = config.force_stressed;
    out.model = forward_select(response, panel.columns[panel.index_of(response)], scenario.stressed, cands, vc);
  } catch (const DegenerateInputError& e) {
    out.warning = "response '" + response + "' skipped: " + e.what();
  }
  return out;
}

}  // namespace

ScenarioTable run_scenario(const PseudoPanel& panel, const StressScenario& scenario, const StressConfig& config) {
  scenario.validate();
  for (const auto& s : scenario.stressed) panel.index_of(s);

  std::vector<std::string> responses;
  for (const auto& label : panel.labels)
    if (std::find(scenario.stressed.begin(), scenario.stressed.end(), label) == scenario.stressed.end())
      responses.push_back(label);
  if (responses.empty()) throw InputError("scenario stresses every sector; no responses left");
  std::sort(responses.begin(), responses.end());

  const PseudoPanel aligned = lag_covariates(panel, scenario.stressed, scenario.lag);
  if (aligned.rows() < 10)
    throw InputError("only " + std::to_string(aligned.rows()) + " aligned rows remain after lag " +
                     std::to_string(scenario.lag) + "; at least 10 are needed");

  std::vector<ResponseFit> fits(responses.size());
  parallel_for(responses.size(), resolve_threads(config.threads),
               [&](std::size_t i) { fits[i] = fit_response(aligned, responses[i], scenario, config); });

  std::vector<double> kappas = scenario.kappas;
  std::sort(kappas.begin(), kappas.end());

  ScenarioTable table;
  table.scenario = scenario;
  for (std::size_t i = 0; i < responses.size(); ++i) {
    if (!fits[i].model) {
      table.warnings.push_back(fits[i].warning);
      continue;
    }
    const DVineModel& model = *fits[i].model;
    const std::size_t resp_idx = aligned.index_of(responses[i]);
    const std::vector<BivariateCopula> path = model.response_path();

    std::vector<std::string> families;
    bool positive = !path.empty();
    for (const auto& c : path) {
      families.push_back(to_string(c.spec()));
      positive = positive && c.tau() > 0.0;
    }
    const bool effect_absent = std::all_of(path.begin(), path.end(), [](const BivariateCopula& c) {
      return c.family() == Family::Independence;
    });

    std::vector<double> medians;
    for (double kappa : kappas) {
      QuantilePrediction pred;
      pred.response = responses[i];
      pred.kappa = kappa;
      pred.alphas = scenario.alpha_grid;
      const std::vector<double> u(model.num_covariates(), kappa);
      pred.q_copula = conditional_quantiles(model, pred.alphas, u);
      for (double q : pred.q_copula)
        pred.q_pd_scale.push_back(aligned.has_marginals() ? pit_inverse(aligned.marginals[resp_idx], q)
                                                          : std::numeric_limits<double>::quiet_NaN());
      pred.families_on_path = families;
      pred.covariates = model.covariates();
      pred.stress_effect_absent = effect_absent;
      pred.n_rows = aligned.rows();
      pred.trace = model.trace;
      // Conditional median, or the grid point closest to 0.5.
      std::size_t mid = 0;
      for (std::size_t k = 0; k < pred.alphas.size(); ++k)
        if (std::abs(pred.alphas[k] - 0.5) < std::abs(pred.alphas[mid] - 0.5)) mid = k;
      medians.push_back(pred.q_copula[mid]);
      table.predictions.push_back(std::move(pred));
    }
    table.responses.push_back(responses[i]);
    table.positive_path.push_back(positive);
    table.median_monotone_in_kappa.push_back(std::is_sorted(medians.begin(), medians.end()));
    if (effect_absent) table.warnings.push_back("response '" + responses[i] + "': stressed pair fitted as Independence");
  }
  return table;
}

ScenarioTable run_scenario_matrix(const PseudoPanel& panel, const std::string& stressed_label,
                                  const std::vector<double>& kappas, const std::vector<double>& alpha_grid,
                                  std::size_t lag, const StressConfig& config) {
  StressScenario scenario;
  scenario.stressed = {stressed_label};
  scenario.kappas = kappas;
  scenario.alpha_grid = alpha_grid;
  scenario.lag = lag;
  return run_scenario(panel, scenario, config);
}

}  // namespace vinestress
