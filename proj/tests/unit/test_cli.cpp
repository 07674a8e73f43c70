#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vinestress/baselines.hpp"
#include "vinestress/cli.hpp"
#include "vinestress/datagen.hpp"
#include "vinestress/io.hpp"
#include "vinestress/rng.hpp"

using namespace vinestress;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path workdir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "vinestress_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t line_count(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

std::string arg(const fs::path& p) { return p.string(); }

// Simulated nine-sector panel transformed to the copula scale.
fs::path nine_sector(const fs::path& dir) {
  REQUIRE(run({"simulate", "-o", arg(dir / "pd.csv")}).code == 0);
  REQUIRE(run({"transform", "-i", arg(dir / "pd.csv"), "-o", arg(dir / "u.csv")}).code == 0);
  return dir / "u.csv";
}

}  // namespace

TEST_CASE("usage errors exit with status 2") {
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  CHECK(run({"transform", "-o", "x.csv"}).code == cli::kExitUsage);
  CHECK(run({"--help"}).code == cli::kExitOk);
  const auto dir = workdir("usage");
  const auto u = nine_sector(dir);
  const auto r = run({"stress", "-i", arg(u), "-o", arg(dir / "s")});
  CHECK(r.code == cli::kExitUsage);
  CHECK_THAT(r.err, ContainsSubstring("--stressed"));
  CHECK(run({"stress", "-i", arg(u), "-o", arg(dir / "s"), "--stressed", "Energy", "--families", "student"}).code ==
        cli::kExitUsage);
  CHECK(!fs::exists(dir / "s"));
}

TEST_CASE("simulate") {
  const auto dir = workdir("simulate");
  const auto r = run({"simulate", "-o", arg(dir / "a.csv")});
  REQUIRE(r.code == 0);
  CHECK_THAT(r.err, ContainsSubstring("stage=simulate status=ok"));
  const auto panel = io::read_panel(dir / "a.csv");
  CHECK(panel.rows() == 1000);
  CHECK(panel.labels.size() == 9);

  REQUIRE(run({"simulate", "-o", arg(dir / "b.csv")}).code == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));

  auto spec = default_ground_truth_spec();
  spec.seed.reset();
  spec.rows = 50;
  io::write_json(dir / "noseed.json", io::to_json(spec));
  REQUIRE(run({"simulate", "-i", arg(dir / "noseed.json"), "-o", arg(dir / "c.csv")}).code == 0);
  const auto meta = io::read_json(dir / "c.meta.json");
  CHECK(meta["seed_randomized"] == true);
  CHECK(meta["spec"]["seed"] == meta["seed"]);

  REQUIRE(run({"simulate", "-i", arg(dir / "noseed.json"), "-o", arg(dir / "d.csv"), "--seed", "5"}).code == 0);
  CHECK(io::read_json(dir / "d.meta.json")["seed_randomized"] == false);

  auto bad = io::to_json(spec);
  bad["rows"] = 5;
  io::write_json(dir / "bad.json", bad);
  CHECK(run({"simulate", "-i", arg(dir / "bad.json"), "-o", arg(dir / "e.csv")}).code == cli::kExitRuntime);
}

TEST_CASE("transform") {
  const auto dir = workdir("transform");
  const auto u = nine_sector(dir);
  const auto pseudo = io::read_pseudo(u);
  CHECK(pseudo.rows() == 999);
  CHECK(line_count(dir / "u.tau.csv") == 10);
  const auto diag = io::read_json(dir / "u.diag.json");
  CHECK(diag["autocorrelation"].size() == 9);
  CHECK(diag["kendall_tau"].size() == 9);
  CHECK(diag["kendall_tau"][6][6] == 1.0);
  CHECK(fs::exists(dir / "u.diff.csv"));

  const std::string first = slurp(u) + slurp(dir / "u.tau.csv") + slurp(dir / "u.diag.json");
  REQUIRE(run({"transform", "-i", arg(dir / "pd.csv"), "-o", arg(u)}).code == 0);
  CHECK(slurp(u) + slurp(dir / "u.tau.csv") + slurp(dir / "u.diag.json") == first);

  io::write_text(dir / "short.csv", "date,a,b\n2001-01,0.1,0.2\n2001-02,0.1,0.3\n");
  const auto r = run({"transform", "-i", arg(dir / "short.csv"), "-o", arg(dir / "short_u.csv")});
  CHECK(r.code == cli::kExitRuntime);
  CHECK_THAT(r.err, ContainsSubstring("rows"));
}

TEST_CASE("stress") {
  const auto dir = workdir("stress");
  const auto u = nine_sector(dir);
  io::write_json(dir / "scenario.json", {{"stressed", {"Industrials"}}, {"kappa", {0.95, 0.99}}});
  const auto r = run({"stress", "-i", arg(u), "--scenario", arg(dir / "scenario.json"), "-o", arg(dir / "out")});
  REQUIRE(r.code == 0);
  CHECK_THAT(r.err, ContainsSubstring("responses=8"));
  CHECK(line_count(dir / "out" / "report.csv") == 1 + 8 * 2 * 3);
  CHECK(line_count(dir / "out" / "plot_intervals.csv") == 1 + 8 * 2);
  const auto prov = io::read_json(dir / "out" / "provenance.json");
  CHECK(prov["responses"].size() == 8);
  CHECK(prov["rows_used"] == 999);
  CHECK(slurp(dir / "out" / "report.csv").find(",NA,") == std::string::npos);

  const auto lagged = run({"stress", "-i", arg(u), "--scenario", arg(dir / "scenario.json"), "--lag", "1", "-o",
                           arg(dir / "lag")});
  REQUIRE(lagged.code == 0);
  CHECK_THAT(lagged.err, ContainsSubstring("n=998"));
  CHECK(io::read_json(dir / "lag" / "provenance.json")["rows_used"] == 998);

  const auto unknown = run({"stress", "-i", arg(u), "--stressed", "Aerospace", "-o", arg(dir / "x")});
  CHECK(unknown.code == cli::kExitRuntime);
  CHECK_THAT(unknown.err, ContainsSubstring("Aerospace"));

  std::vector<std::string> all{"stress", "-i", arg(u), "-o", arg(dir / "all")};
  for (const auto& l : io::read_pseudo(u).labels) {
    all.push_back("--stressed");
    all.push_back(l);
  }
  const auto everything = run(all);
  CHECK(everything.code == cli::kExitRuntime);
  CHECK_THAT(everything.err, ContainsSubstring("no responses"));

  io::write_json(dir / "bad.json", {{"stressed", {"Industrials"}}, {"kappa", 1.2}});
  const auto bad = run({"stress", "-i", arg(u), "--scenario", arg(dir / "bad.json"), "-o", arg(dir / "b")});
  CHECK(bad.code == cli::kExitRuntime);
  CHECK_THAT(bad.err, ContainsSubstring("(0,1)"));
}

TEST_CASE("fit writes a readable model") {
  const auto dir = workdir("fit");
  const auto u = nine_sector(dir);
  REQUIRE(run({"fit", "-i", arg(u), "--response", "Technology", "--covariate", "Industrials", "--covariate", "Energy",
               "-o", arg(dir / "m.json")})
              .code == 0);
  const auto model = io::read_model(dir / "m.json");
  CHECK(model.response() == "Technology");
  CHECK(model.covariates().front() == "Industrials");
}

TEST_CASE("benchmark on a heteroscedastic pair") {
  const auto dir = workdir("benchmark");
  // y changes with spread proportional to the x change.
  Rng rng(3);
  const std::size_t n = 301;
  RawPanel p;
  p.labels = {"Financials", "Utilities"};
  p.dates = monthly_dates("1990-01", n);
  p.columns.assign(2, Column(n));
  p.columns[0][0] = 0.3;
  p.columns[1][0] = 0.3;
  for (std::size_t t = 1; t < n; ++t) {
    const double dx = 1e-4 * (1.0 + 9.0 * rng.uniform());
    p.columns[0][t] = p.columns[0][t - 1] + dx;
    p.columns[1][t] = p.columns[1][t - 1] + dx * rng.normal();
  }
  io::write_panel(dir / "pd.csv", p);
  REQUIRE(run({"transform", "-i", arg(dir / "pd.csv"), "-o", arg(dir / "u.csv")}).code == 0);
  const auto r = run({"benchmark", "-i", arg(dir / "u.csv"), "--response", "Utilities", "--covariate", "Financials",
                      "-o", arg(dir / "bm")});
  REQUIRE(r.code == 0);
  const auto rep = io::read_json(dir / "bm" / "crossings.json");
  CHECK(rep["crossings"]["linear_qr"]["total"].get<int>() >= 1);
  CHECK(rep["crossings"]["dvine_qr"]["total"] == 0);

  // The 50% expectile is the least-squares line.
  const auto diff = io::read_diff(dir / "u.diff.csv");
  Eigen::MatrixXd X(static_cast<Eigen::Index>(diff.rows()), 1);
  for (std::size_t i = 0; i < diff.rows(); ++i) X(static_cast<Eigen::Index>(i), 0) = diff.columns[0][i];
  const auto ols = fit_ols(X, diff.columns[1]);
  const auto& mid = rep["coefficients"]["expectile"][2];
  REQUIRE(mid["level"] == 0.5);
  CHECK(mid["intercept"].get<double>() == Approx(ols.intercept).margin(1e-8));
  CHECK(mid["slope"].get<double>() == Approx(ols.slopes[0]).margin(1e-8));

  // Identical evaluation grids.
  auto grid_of = [&](const std::string& method) {
    std::ifstream in(dir / "bm" / ("curves_" + method + ".csv"));
    std::string line;
    std::getline(in, line);
    std::vector<std::string> xs;
    while (std::getline(in, line)) {
      const auto a = line.find(',', line.find(',') + 1);
      xs.push_back(line.substr(a + 1, line.rfind(',') - a - 1));
    }
    return xs;
  };
  const auto g = grid_of("linear_qr");
  CHECK(g.size() == 5 * 101);
  CHECK(grid_of("expectile") == g);
  CHECK(grid_of("dvine_qr") == g);

  CHECK(run({"benchmark", "-i", arg(dir / "u.csv"), "--response", "Utilities", "--covariate", "Utilities", "-o",
             arg(dir / "bm2")})
            .code == cli::kExitRuntime);
}
