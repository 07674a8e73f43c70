#include "vinestress/cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <iostream>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "vinestress/baselines.hpp"
#include "vinestress/datagen.hpp"
#include "vinestress/dvine.hpp"
#include "vinestress/errors.hpp"
#include "vinestress/io.hpp"
#include "vinestress/marginals.hpp"
#include "vinestress/stress.hpp"

namespace vinestress::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Bad flag combination, reported with usage text.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string subcommand;
  fs::path input;
  fs::path output;
  fs::path scenario;
  fs::path marginals;
  std::vector<double> kappas;
  std::vector<double> alpha_grid;
  std::optional<std::size_t> lag;
  std::vector<std::string> families;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
  std::string response;
  std::vector<std::string> covariates;
  std::vector<std::string> stressed;
  std::size_t max_lag = 12;
  std::size_t grid_points = 101;
  fs::path spec_out;
};

class Log {
 public:
  Log(std::ostream& err, bool verbose) : err_(err), verbose_(verbose) {}

  using Fields = std::vector<std::pair<std::string, std::string>>;

  void stage(const std::string& stage, const Fields& fields) const {
    err_ << "stage=" << stage;
    for (const auto& [k, v] : fields) err_ << ' ' << k << '=' << quoted(v);
    err_ << '\n';
  }
  void detail(const std::string& stage, const Fields& fields) const {
    if (verbose_) this->stage(stage, fields);
  }
  void warn(const std::string& stage, const std::string& message) const {
    err_ << "stage=" << stage << " level=warning message=" << quoted(message) << '\n';
  }

 private:
  static std::string quoted(const std::string& v) {
    if (!v.empty() && v.find_first_of(" \t\"=") == std::string::npos) return v;
    std::string out = "\"";
    for (char c : v) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    return out + '"';
  }

  std::ostream& err_;
  bool verbose_;
};

std::string num(double x) { return io::format_number(x); }
std::string num(std::size_t x) { return std::to_string(x); }

/// out.csv -> out<suffix> in the same directory.
fs::path sibling(const fs::path& p, const std::string& suffix) { return p.parent_path() / (p.stem().string() + suffix); }

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<FamilySpec> family_whitelist(const std::vector<std::string>& names) {
  if (names.empty()) return candidate_specs();
  std::vector<Family> fams;
  for (const auto& name : names) {
    bool found = false;
    for (Family f : {Family::Independence, Family::Gaussian, Family::Clayton, Family::Gumbel, Family::Frank,
                     Family::Joe}) {
      if (lower(std::string(family_name(f))) == lower(name)) {
        if (std::find(fams.begin(), fams.end(), f) == fams.end()) fams.push_back(f);
        found = true;
      }
    }
    if (!found) throw UsageError("--families: unknown copula family '" + name + "'");
  }
  return candidate_specs(fams);
}

json family_json(const std::vector<FamilySpec>& specs) {
  json j = json::array();
  for (const auto& s : specs) j.push_back(to_string(s));
  return j;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

/// Pseudo-panel plus the differenced series it came from, when available.
struct LoadedPseudo {
  PseudoPanel pseudo;
  std::optional<DiffPanel> diff;
  fs::path diff_path;
};

LoadedPseudo load_pseudo(const RunConfig& cfg, const Log& log, const std::string& stage) {
  LoadedPseudo out;
  out.pseudo = io::read_pseudo(cfg.input);
  out.diff_path = cfg.marginals.empty() ? sibling(cfg.input, ".diff.csv") : cfg.marginals;
  if (!cfg.marginals.empty() || fs::exists(out.diff_path)) {
    out.diff = io::read_diff(out.diff_path);
    io::attach_marginals(out.pseudo, *out.diff);
  } else {
    log.warn(stage, "no differenced companion at " + out.diff_path.string() + "; PD-scale output unavailable");
    out.diff_path.clear();
  }
  return out;
}

std::string join(const std::vector<std::string>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? std::string(1, sep) : "") + v[i];
  return out;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + '"';
}

// transform ----------------------------------------------------------------

int cmd_transform(const RunConfig& cfg, const Log& log) {
  require(!cfg.output.empty(), "transform needs --output");
  const RawPanel raw = io::read_panel(cfg.input);
  const DiffPanel diff = difference(raw);
  const PseudoPanel pseudo = pit_transform(diff);
  const std::size_t max_lag = std::min(cfg.max_lag, diff.rows() - 1);
  const AutocorrReport acf = autocorr_check(diff, max_lag);
  const auto tau = kendall_tau_matrix(diff.columns);

  io::write_pseudo(cfg.output, pseudo);
  io::write_diff(sibling(cfg.output, ".diff.csv"), diff);

  std::ostringstream tau_csv;
  tau_csv << "sector";
  for (const auto& l : diff.labels) tau_csv << ',' << csv_cell(l);
  tau_csv << '\n';
  for (std::size_t i = 0; i < tau.size(); ++i) {
    tau_csv << csv_cell(diff.labels[i]);
    for (double t : tau[i]) tau_csv << ',' << num(t);
    tau_csv << '\n';
  }
  io::write_text(sibling(cfg.output, ".tau.csv"), tau_csv.str());

  json diag;
  diag["source_rows"] = raw.rows();
  diag["rows"] = diff.rows();
  diag["labels"] = diff.labels;
  diag["max_lag"] = max_lag;
  json ac = json::array();
  std::size_t flagged = 0;
  for (std::size_t j = 0; j < acf.labels.size(); ++j) {
    ac.push_back({{"label", acf.labels[j]}, {"flagged", static_cast<bool>(acf.flagged[j])},
                  {"threshold", acf.thresholds[j]}, {"acf", acf.acf[j]}});
    flagged += acf.flagged[j] ? 1 : 0;
    if (acf.flagged[j]) log.detail("transform", {{"autocorrelated", acf.labels[j]}});
  }
  diag["autocorrelation"] = ac;
  diag["kendall_tau"] = tau;
  io::write_json(sibling(cfg.output, ".diag.json"), diag);

  log.stage("transform", {{"status", "ok"},
                          {"rows", num(diff.rows())},
                          {"columns", num(diff.labels.size())},
                          {"autocorr_flagged", num(flagged)},
                          {"output", cfg.output.string()}});
  return kExitOk;
}

// fit ----------------------------------------------------------------------

int cmd_fit(const RunConfig& cfg, const Log& log) {
  require(!cfg.response.empty(), "fit needs --response");
  require(!cfg.output.empty(), "fit needs --output");
  VineFitConfig vc;
  vc.families = family_whitelist(cfg.families);
  const PseudoPanel pseudo = io::read_pseudo(cfg.input);
  const std::size_t r = pseudo.index_of(cfg.response);
  std::vector<std::string> labels = cfg.covariates;
  if (labels.empty())
    for (const auto& l : pseudo.labels)
      if (l != cfg.response) labels.push_back(l);
  Columns cands;
  for (const auto& l : labels) {
    if (l == cfg.response) throw InputError("covariate '" + l + "' is the response");
    cands.push_back(pseudo.columns[pseudo.index_of(l)]);
  }
  const DVineModel model = forward_select(cfg.response, pseudo.columns[r], labels, cands, vc);
  for (const auto& step : model.trace)
    log.detail("fit", {{"candidate", step.candidate}, {"position", num(step.position)}, {"cll", num(step.cll)},
                       {"aic", num(step.aic)}});
  io::write_model(cfg.output, model);
  log.stage("fit", {{"status", "ok"},
                    {"response", cfg.response},
                    {"selected", num(model.num_covariates())},
                    {"cll", num(model.conditional_loglik)},
                    {"output", cfg.output.string()}});
  return kExitOk;
}

// stress -------------------------------------------------------------------

std::string pd_cell(double x) { return std::isnan(x) ? "NA" : num(x); }

int cmd_stress(const RunConfig& cfg, const Log& log) {
  require(!cfg.output.empty(), "stress needs --output (a directory)");
  require(!cfg.scenario.empty() || !cfg.stressed.empty(), "stress needs --scenario or --stressed");
  StressScenario scenario = cfg.scenario.empty() ? StressScenario{} : io::read_scenario(cfg.scenario);
  if (!cfg.stressed.empty()) scenario.stressed = cfg.stressed;
  if (!cfg.kappas.empty()) scenario.kappas = cfg.kappas;
  if (!cfg.alpha_grid.empty()) scenario.alpha_grid = cfg.alpha_grid;
  if (cfg.lag) scenario.lag = *cfg.lag;
  scenario.validate();
  StressConfig sc;
  sc.families = family_whitelist(cfg.families);

  const LoadedPseudo in = load_pseudo(cfg, log, "stress");
  for (const auto& s : scenario.stressed) in.pseudo.index_of(s);
  const ScenarioTable table = run_scenario(in.pseudo, scenario, sc);
  for (const auto& w : table.warnings) log.warn("stress", w);

  std::ostringstream report;
  report << "response,kappa,alpha,q_copula,q_pd_scale,families_on_path\n";
  std::ostringstream intervals;
  intervals << "response,kappa,alpha_low,q_low,alpha_mid,q_mid,alpha_high,q_high\n";
  for (const auto& p : table.predictions) {
    for (std::size_t k = 0; k < p.alphas.size(); ++k)
      report << csv_cell(p.response) << ',' << num(p.kappa) << ',' << num(p.alphas[k]) << ',' << num(p.q_copula[k])
             << ',' << pd_cell(p.q_pd_scale[k]) << ',' << csv_cell(join(p.families_on_path, ';')) << '\n';
    std::size_t mid = 0;
    for (std::size_t k = 0; k < p.alphas.size(); ++k)
      if (std::abs(p.alphas[k] - 0.5) < std::abs(p.alphas[mid] - 0.5)) mid = k;
    const std::size_t hi = p.alphas.size() - 1;
    intervals << csv_cell(p.response) << ',' << num(p.kappa) << ',' << num(p.alphas[0]) << ',' << num(p.q_copula[0])
              << ',' << num(p.alphas[mid]) << ',' << num(p.q_copula[mid]) << ',' << num(p.alphas[hi]) << ','
              << num(p.q_copula[hi]) << '\n';
    log.detail("stress", {{"response", p.response}, {"kappa", num(p.kappa)}, {"median", num(p.q_copula[mid])},
                          {"covariates", join(p.covariates, ';')}});
  }
  io::write_text(cfg.output / "report.csv", report.str());
  io::write_text(cfg.output / "plot_intervals.csv", intervals.str());

  json prov;
  prov["input"] = cfg.input.string();
  prov["marginals"] = in.diff_path.empty() ? json(nullptr) : json(in.diff_path.string());
  prov["scenario"] = io::to_json(scenario);
  prov["families"] = family_json(sc.families);
  prov["force_stressed"] = sc.force_stressed;
  prov["rows_source"] = in.pseudo.rows();
  prov["rows_used"] = table.predictions.empty() ? in.pseudo.rows() - scenario.lag : table.predictions.front().n_rows;
  prov["warnings"] = table.warnings;
  json responses = json::array();
  for (std::size_t i = 0; i < table.responses.size(); ++i) {
    json r{{"response", table.responses[i]},
           {"positive_path", static_cast<bool>(table.positive_path[i])},
           {"median_monotone_in_kappa", static_cast<bool>(table.median_monotone_in_kappa[i])}};
    for (const auto& p : table.predictions)
      if (p.response == table.responses[i]) {
        r["covariates"] = p.covariates;
        r["families_on_path"] = p.families_on_path;
        r["stress_effect_absent"] = p.stress_effect_absent;
        json trace = json::array();
        for (const auto& s : p.trace)
          trace.push_back({{"candidate", s.candidate}, {"position", s.position}, {"cll", s.cll}, {"aic", s.aic}});
        r["selection_trace"] = trace;
        break;
      }
    responses.push_back(r);
  }
  prov["responses"] = responses;
  io::write_json(cfg.output / "provenance.json", prov);

  log.stage("stress", {{"status", "ok"},
                       {"stressed", join(scenario.stressed, ';')},
                       {"responses", num(table.responses.size())},
                       {"n", prov["rows_used"].dump()},
                       {"lag", num(scenario.lag)},
                       {"warnings", num(table.warnings.size())},
                       {"output", cfg.output.string()}});
  return kExitOk;
}

// benchmark ----------------------------------------------------------------

struct Curves {
  std::string method;
  std::vector<std::vector<double>> predictions;  // [level][grid point]
};

std::string curves_csv(const Curves& c, const std::vector<double>& levels, const std::vector<double>& grid) {
  std::ostringstream s;
  s << "method,level,x,predicted_y\n";
  for (std::size_t l = 0; l < levels.size(); ++l)
    for (std::size_t i = 0; i < grid.size(); ++i)
      s << c.method << ',' << num(levels[l]) << ',' << num(grid[i]) << ',' << num(c.predictions[l][i]) << '\n';
  return s.str();
}

json crossing_json(const CrossingReport& r) {
  return {{"total", r.total}, {"per_level_pair", r.per_pair},
          {"points_with_crossing",
           std::count_if(r.per_point.begin(), r.per_point.end(), [](std::size_t k) { return k > 0; })}};
}

json linear_json(const LinearFit& f) {
  return {{"level", f.level}, {"intercept", f.intercept}, {"slope", f.slopes.at(0)}, {"objective", f.objective}};
}

int cmd_benchmark(const RunConfig& cfg, const Log& log) {
  require(!cfg.output.empty(), "benchmark needs --output (a directory)");
  require(!cfg.response.empty(), "benchmark needs --response");
  require(cfg.covariates.size() == 1, "benchmark needs exactly one --covariate");
  require(cfg.grid_points >= 2, "--grid-points must be at least 2");
  const std::string& cov = cfg.covariates.front();
  if (cov == cfg.response) throw InputError("covariate '" + cov + "' is the response");

  const LoadedPseudo in = load_pseudo(cfg, log, "benchmark");
  if (!in.diff) throw InputError("benchmark needs the differenced series; pass --marginals or keep the .diff.csv companion");
  const std::size_t ry = in.pseudo.index_of(cfg.response);
  const std::size_t rx = in.pseudo.index_of(cov);
  const Column& y = in.diff->columns[ry];
  const Column& x = in.diff->columns[rx];

  std::vector<double> levels = cfg.alpha_grid;
  if (levels.empty()) levels.assign(std::begin(kDefaultLevels), std::end(kDefaultLevels));
  for (std::size_t i = 0; i < levels.size(); ++i)
    if (!(levels[i] > 0.0 && levels[i] < 1.0) || (i > 0 && !(levels[i - 1] < levels[i])))
      throw UsageError("--alpha-grid must be strictly increasing inside (0,1)");
  require(levels.size() >= 2, "--alpha-grid needs at least two levels");

  const auto [xmin_it, xmax_it] = std::minmax_element(x.begin(), x.end());
  const double span = *xmax_it - *xmin_it;
  if (!(span > 0.0)) throw DegenerateInputError("covariate '" + cov + "' is constant");
  const double lo = *xmin_it - 0.25 * span, hi = *xmax_it + 0.25 * span;
  std::vector<double> grid(cfg.grid_points);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = lo + (hi - lo) * static_cast<double>(i) / (grid.size() - 1);
  const Eigen::Map<const Eigen::VectorXd> grid_v(grid.data(), static_cast<Eigen::Index>(grid.size()));
  const Eigen::MatrixXd X_eval = grid_v;
  Eigen::MatrixXd X(static_cast<Eigen::Index>(x.size()), 1);
  for (std::size_t i = 0; i < x.size(); ++i) X(static_cast<Eigen::Index>(i), 0) = x[i];

  Curves qr{"linear_qr", {}}, ex{"expectile", {}}, dv{"dvine_qr", {}};
  std::vector<LinearFit> qr_fits, ex_fits;
  json coeffs{{"linear_qr", json::array()}, {"expectile", json::array()}};
  for (double a : levels) {
    qr_fits.push_back(fit_linear_quantile(X, y, a));
    ex_fits.push_back(fit_expectile(X, y, a));
    const Eigen::VectorXd pq = qr_fits.back().predict(X_eval);
    const Eigen::VectorXd pe = ex_fits.back().predict(X_eval);
    qr.predictions.emplace_back(pq.begin(), pq.end());
    ex.predictions.emplace_back(pe.begin(), pe.end());
    coeffs["linear_qr"].push_back(linear_json(qr_fits.back()));
    coeffs["expectile"].push_back(linear_json(ex_fits.back()));
  }

  VineFitConfig vc;
  vc.families = family_whitelist(cfg.families);
  const DVineModel model =
      fit_dvine({cfg.response, cov}, {in.pseudo.columns[ry], in.pseudo.columns[rx]}, vc);
  const MarginalEcdf& Fx = in.pseudo.marginals[rx];
  const MarginalEcdf& Fy = in.pseudo.marginals[ry];
  dv.predictions.assign(levels.size(), std::vector<double>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double u = Fx(grid[i]);
    const std::vector<double> q = conditional_quantiles(model, levels, std::vector<double>{u});
    for (std::size_t l = 0; l < levels.size(); ++l) dv.predictions[l][i] = pit_inverse(Fy, q[l]);
  }

  json report;
  report["response"] = cfg.response;
  report["covariate"] = cov;
  report["levels"] = levels;
  report["grid"] = {{"from", lo}, {"to", hi}, {"points", grid.size()}, {"data_min", *xmin_it}, {"data_max", *xmax_it}};
  report["n"] = x.size();
  Log::Fields fields{{"status", "ok"}, {"response", cfg.response}, {"covariate", cov}};
  for (const Curves* c : {&qr, &ex, &dv}) {
    const CrossingReport r = detect_crossings(levels, c->predictions);
    report["crossings"][c->method] = crossing_json(r);
    fields.emplace_back("crossings_" + c->method, num(r.total));
    io::write_text(cfg.output / ("curves_" + c->method + ".csv"), curves_csv(*c, levels, grid));
  }
  report["coefficients"] = coeffs;
  report["dvine_pair"] = io::to_json(model.pair(1, 0));
  io::write_json(cfg.output / "crossings.json", report);
  fields.emplace_back("output", cfg.output.string());
  log.stage("benchmark", fields);
  return kExitOk;
}

// simulate -----------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg, const Log& log) {
  require(!cfg.output.empty(), "simulate needs --output");
  GroundTruthSpec spec = cfg.input.empty() ? default_ground_truth_spec() : io::read_spec(cfg.input);
  if (cfg.seed) spec.seed = cfg.seed;
  spec.validate();
  const GeneratedPanel gen = generate_panel(spec);
  for (const auto& w : gen.warnings) log.warn("simulate", w);
  io::write_panel(cfg.output, gen.panel);

  GroundTruthSpec resolved = spec;
  resolved.seed = gen.seed;
  json meta;
  meta["spec_source"] = cfg.input.empty() ? json("bundled default") : json(cfg.input.string());
  meta["seed"] = gen.seed;
  meta["seed_randomized"] = gen.seed_randomized;
  meta["rows"] = gen.panel.rows();
  meta["columns"] = gen.panel.labels.size();
  meta["clipped_cells"] = gen.clipped_cells;
  meta["warnings"] = gen.warnings;
  meta["spec"] = io::to_json(resolved);
  io::write_json(sibling(cfg.output, ".meta.json"), meta);
  if (!cfg.spec_out.empty()) io::write_json(cfg.spec_out, io::to_json(spec));
  if (gen.seed_randomized) log.warn("simulate", "no seed given; drew seed " + std::to_string(gen.seed));

  log.stage("simulate", {{"status", "ok"},
                         {"rows", num(gen.panel.rows())},
                         {"columns", num(gen.panel.labels.size())},
                         {"seed", std::to_string(gen.seed)},
                         {"seed_randomized", gen.seed_randomized ? "true" : "false"},
                         {"output", cfg.output.string()}});
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vine copula quantile regression for sector PD stress tests", "vinestress"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_flag("-v,--verbose", cfg.verbose, "Per-item log lines");
  };
  auto add_families = [&](CLI::App* sub) {
    sub->add_option("--families", cfg.families, "Copula family whitelist, e.g. gaussian,clayton")->delimiter(',');
  };

  auto* transform = app.add_subcommand("transform", "Difference a PD panel and map it to the copula scale");
  transform->add_option("-i,--input", cfg.input, "PD level CSV")->required()->check(CLI::ExistingFile);
  transform->add_option("-o,--output", cfg.output, "Pseudo-observation CSV")->required();
  transform->add_option("--max-lag", cfg.max_lag, "Largest autocorrelation lag checked")->check(CLI::PositiveNumber);
  add_common(transform);

  auto* fit = app.add_subcommand("fit", "Forward-select a D-vine for one response");
  fit->add_option("-i,--input", cfg.input, "Pseudo-observation CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("-o,--output", cfg.output, "Model JSON")->required();
  fit->add_option("--response", cfg.response, "Response sector")->required();
  fit->add_option("--covariate", cfg.covariates, "Candidate covariate (repeatable; default all others)");
  add_families(fit);
  add_common(fit);

  auto* stress = app.add_subcommand("stress", "Conditional quantiles of responses under stressed sectors");
  stress->add_option("-i,--input", cfg.input, "Pseudo-observation CSV")->required()->check(CLI::ExistingFile);
  stress->add_option("-o,--output", cfg.output, "Output directory")->required();
  stress->add_option("--scenario", cfg.scenario, "Scenario JSON")->check(CLI::ExistingFile);
  stress->add_option("--stressed", cfg.stressed, "Stressed sector (repeatable; overrides the scenario)");
  stress->add_option("--kappa", cfg.kappas, "Stress levels, comma separated")->delimiter(',');
  stress->add_option("--alpha-grid", cfg.alpha_grid, "Quantile levels, comma separated")->delimiter(',');
  stress->add_option("--lag", cfg.lag, "Covariate lag in months");
  stress->add_option("--marginals", cfg.marginals, "Differenced CSV for PD-scale output")->check(CLI::ExistingFile);
  add_families(stress);
  add_common(stress);

  auto* bench = app.add_subcommand("benchmark", "Linear QR, expectile and D-vine curves for one pair");
  bench->add_option("-i,--input", cfg.input, "Pseudo-observation CSV")->required()->check(CLI::ExistingFile);
  bench->add_option("-o,--output", cfg.output, "Output directory")->required();
  bench->add_option("--response", cfg.response, "Response sector")->required();
  bench->add_option("--covariate", cfg.covariates, "Covariate sector")->required();
  bench->add_option("--alpha-grid", cfg.alpha_grid, "Levels, comma separated")->delimiter(',');
  bench->add_option("--grid-points", cfg.grid_points, "Evaluation points");
  bench->add_option("--marginals", cfg.marginals, "Differenced CSV")->check(CLI::ExistingFile);
  add_families(bench);
  add_common(bench);

  auto* sim = app.add_subcommand("simulate", "Synthetic PD panel from a ground-truth spec");
  sim->add_option("-i,--input", cfg.input, "Spec JSON (default: bundled nine-sector spec)")->check(CLI::ExistingFile);
  sim->add_option("-o,--output", cfg.output, "PD level CSV")->required();
  sim->add_option("--seed", cfg.seed, "Overrides the spec seed");
  sim->add_option("--spec-out", cfg.spec_out, "Also write the spec used");
  add_common(sim);

  std::vector<std::string> storage{"vinestress"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  cfg.subcommand = active->get_name();
  const Log log(err, cfg.verbose);
  try {
    if (cfg.subcommand == "transform") return cmd_transform(cfg, log);
    if (cfg.subcommand == "fit") return cmd_fit(cfg, log);
    if (cfg.subcommand == "stress") return cmd_stress(cfg, log);
    if (cfg.subcommand == "benchmark") return cmd_benchmark(cfg, log);
    return cmd_simulate(cfg, log);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << active->help();
    log.stage(cfg.subcommand, {{"status", "usage_error"}});
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    log.stage(cfg.subcommand, {{"status", "error"}});
    return kExitRuntime;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace vinestress::cli
