#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "vinestress/datagen.hpp"
#include "vinestress/errors.hpp"
#include "vinestress/io.hpp"

using namespace vinestress;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "vinestress_test_io";
  std::filesystem::create_directories(dir);
  return dir / name;
}

GroundTruthSpec small_spec(std::size_t d, double rho) {
  GroundTruthSpec s;
  for (std::size_t j = 0; j < d; ++j) s.labels.push_back("s" + std::to_string(j));
  Eigen::MatrixXd R = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d), rho);
  R.diagonal().setOnes();
  s.correlation = R;
  s.rows = 300;
  s.seed = 11;
  return s;
}

}  // namespace

TEST_CASE("default spec reproduces its Kendall tau") {
  const auto spec = default_ground_truth_spec();
  CHECK_NOTHROW(spec.validate());
  const auto gen = generate_panel(spec);
  CHECK(gen.seed == 20170501);
  CHECK(!gen.seed_randomized);
  CHECK(gen.panel.rows() == 1000);
  const auto d = difference(gen.panel);
  const auto tau = kendall_tau_matrix(d.columns);
  const auto& R = *spec.correlation;
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = i + 1; j < 9; ++j) {
      INFO(spec.labels[i] << " / " << spec.labels[j]);
      const double expected = 2.0 / std::numbers::pi * std::asin(R(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
      CHECK(tau[i][j] == Approx(expected).margin(0.05));
    }
}

TEST_CASE("identity correlation gives near-zero tau") {
  auto spec = small_spec(3, 0.0);
  spec.rows = 1000;
  const auto d = difference(generate_panel(spec).panel);
  const auto tau = kendall_tau_matrix(d.columns);
  CHECK(std::abs(tau[0][1]) < 0.05);
  CHECK(std::abs(tau[0][2]) < 0.05);
  CHECK(std::abs(tau[1][2]) < 0.05);
}

TEST_CASE("generation is deterministic per seed") {
  const auto spec = small_spec(3, 0.4);
  const auto a = generate_panel(spec);
  const auto b = generate_panel(spec);
  CHECK(a.panel.columns == b.panel.columns);
  auto other = spec;
  other.seed = 12;
  CHECK(generate_panel(other).panel.columns != a.panel.columns);
  auto none = spec;
  none.seed.reset();
  const auto r = generate_panel(none);
  CHECK(r.seed_randomized);
  CHECK_NOTHROW(r.panel.validate());
}

TEST_CASE("crisis window holds the series maximum") {
  auto spec = small_spec(2, 0.3);
  spec.marginal.crisis = CrisisWindow{100, 160, 0.02};
  const auto gen = generate_panel(spec);
  for (const auto& col : gen.panel.columns) {
    const auto at = static_cast<std::size_t>(std::max_element(col.begin(), col.end()) - col.begin());
    CHECK(at >= 100);
    CHECK(at < 160);
  }
}

TEST_CASE("clipping to the unit interval is counted and reported") {
  auto spec = small_spec(2, 0.3);
  spec.marginal.base_level = 0.001;
  spec.marginal.volatility = 0.01;
  const auto gen = generate_panel(spec);
  CHECK(gen.clipped_cells > 0);
  for (const auto& col : gen.panel.columns)
    for (double v : col) CHECK((v >= 0.0 && v <= 1.0));
  REQUIRE(!gen.warnings.empty());
  CHECK_THAT(gen.warnings.front(), ContainsSubstring("clip"));
}

TEST_CASE("spec validation") {
  auto s = small_spec(2, 0.3);
  s.rows = 10;
  CHECK_THROWS_AS(s.validate(), InputError);
  s = small_spec(2, 0.3);
  (*s.correlation)(0, 1) = 0.9;
  CHECK_THROWS_AS(s.validate(), InputError);
  s = small_spec(3, 0.0);
  Eigen::MatrixXd R(3, 3);
  R << 1, 0.99, -0.99, 0.99, 1, 0.99, -0.99, 0.99, 1;
  s.correlation = R;
  CHECK_THROWS_AS(s.validate(), InputError);
  s = small_spec(2, 0.3);
  s.labels = {"a", "a"};
  CHECK_THROWS_AS(s.validate(), InputError);
  s = small_spec(2, 0.3);
  s.marginal.crisis = CrisisWindow{50, 40, 0.01};
  CHECK_THROWS_AS(s.validate(), InputError);
}

TEST_CASE("monthly dates roll over the year") {
  CHECK(monthly_dates("2007-11", 3) == std::vector<std::string>{"2007-11", "2007-12", "2008-01"});
  CHECK_THROWS_AS(monthly_dates("2007-13", 2), InputError);
}

TEST_CASE("CSV parsing errors name row and column") {
  const std::string text = "date,Energy,Financials\n2008-01,0.01,0.02\n2008-02,,0.03\n";
  try {
    io::parse_panel(text, "pd.csv");
    FAIL("expected InputError");
  } catch (const InputError& e) {
    CHECK_THAT(e.what(), ContainsSubstring("pd.csv:3"));
    CHECK_THAT(e.what(), ContainsSubstring("Energy"));
    CHECK_THAT(e.what(), ContainsSubstring("missing"));
  }
  CHECK_THROWS_AS(io::parse_panel("when,a\n2008-01,1\n"), InputError);
  CHECK_THROWS_AS(io::parse_panel("date,a,a\n2008-01,1,2\n"), InputError);
  CHECK_THROWS_WITH(io::parse_panel("date,a\n2008-01,x\n2008-02,1\n2008-03,1\n"), ContainsSubstring("'a'"));
  CHECK_THROWS_AS(io::parse_panel("date,a\n2008/01,1\n"), InputError);
}

TEST_CASE("CSV parser accepts quotes, BOM and CRLF") {
  const auto p = io::parse_panel("\xEF\xBB\xBF" "date,\"Cyclical, Goods\",b\r\n2008-01,0.5,1\r\n2008-02,0.25,2\r\n"
                                 "2008-03,0.125,3\r\n");
  CHECK(p.labels == std::vector<std::string>{"Cyclical, Goods", "b"});
  CHECK(p.columns[0] == Column{0.5, 0.25, 0.125});
}

TEST_CASE("panel round trip is exact") {
  const auto gen = generate_panel(small_spec(3, 0.2));
  const auto path = scratch("panel.csv");
  io::write_panel(path, gen.panel);
  const auto back = io::read_panel(path);
  CHECK(back.labels == gen.panel.labels);
  CHECK(back.dates == gen.panel.dates);
  CHECK(back.columns == gen.panel.columns);

  const auto diff = difference(gen.panel);
  io::write_diff(scratch("panel.diff.csv"), diff);
  const auto dback = io::read_diff(scratch("panel.diff.csv"));
  CHECK(dback.columns == diff.columns);
  CHECK(dback.source_length == diff.source_length);

  auto pseudo = pit_transform(diff);
  io::write_pseudo(scratch("panel.u.csv"), pseudo);
  auto pback = io::read_pseudo(scratch("panel.u.csv"));
  CHECK(pback.columns == pseudo.columns);
  CHECK(!pback.has_marginals());
  io::attach_marginals(pback, dback);
  CHECK(pback.marginals == pseudo.marginals);
}

TEST_CASE("model JSON round trip") {
  DVineModel truth({"y", "a", "b", "c"},
                   {{BivariateCopula(Family::Gaussian, 0.6), BivariateCopula(Family::Clayton, Rotation::R180, 1.5),
                     BivariateCopula(Family::Frank, -3.0)},
                    {BivariateCopula(Family::Gumbel, Rotation::R90, 1.4), BivariateCopula()},
                    {BivariateCopula(Family::Joe, 1.3)}});
  const auto cols = simulate(truth, 400, 5);
  VineFitConfig cfg;
  cfg.force_all = true;
  const auto fitted = forward_select("y", cols[0], {"a", "b", "c"}, {cols[1], cols[2], cols[3]}, cfg);
  REQUIRE(fitted.num_covariates() == 3);
  const auto path = scratch("model.json");
  io::write_model(path, fitted);
  const auto back = io::read_model(path);
  CHECK(back == fitted);
  CHECK(back.conditional_loglik == fitted.conditional_loglik);
  CHECK(back.n == fitted.n);
  CHECK(conditional_loglik(back, cols) == conditional_loglik(fitted, cols));

  auto j = io::to_json(fitted);
  j["pairs"][0][0]["family"] = "Student";
  CHECK_THROWS_AS(io::model_from_json(j), InputError);
}

TEST_CASE("scenario JSON") {
  nlohmann::json j = {{"stressed", {"Industrials"}}, {"kappa", 1.2}};
  CHECK_THROWS_WITH(io::scenario_from_json(j), ContainsSubstring("(0,1)") && ContainsSubstring("kappa"));
  j["kappa"] = {0.95, 0.99};
  const auto s = io::scenario_from_json(j);
  CHECK(s.kappas == std::vector<double>{0.95, 0.99});
  CHECK(s.alpha_grid == std::vector<double>{0.025, 0.5, 0.975});
  CHECK(io::scenario_from_json(io::to_json(s)) == s);
  j["kappa"] = 0.9;
  CHECK(io::scenario_from_json(j).kappas == std::vector<double>{0.9});
  j.erase("stressed");
  CHECK_THROWS_AS(io::scenario_from_json(j), InputError);
}

TEST_CASE("spec JSON round trip") {
  auto spec = default_ground_truth_spec();
  spec.marginal.crisis = CrisisWindow{10, 40, 0.03};
  const auto path = scratch("spec.json");
  io::write_json(path, io::to_json(spec));
  const auto back = io::read_spec(path);
  CHECK(back.labels == spec.labels);
  CHECK(*back.correlation == *spec.correlation);
  CHECK(back.marginal == spec.marginal);
  CHECK(back.rows == spec.rows);
  CHECK(back.seed == spec.seed);
  CHECK(back.start_date == spec.start_date);
  CHECK(generate_panel(back).panel.columns == generate_panel(spec).panel.columns);

  auto vine_spec = small_spec(3, 0.0);
  vine_spec.correlation.reset();
  vine_spec.vine = DVineModel({"s0", "s1", "s2"}, {{BivariateCopula(Family::Clayton, 2.0), BivariateCopula(Family::Gaussian, 0.3)},
                                                     {BivariateCopula()}});
  const auto vback = io::spec_from_json(io::to_json(vine_spec));
  CHECK(*vback.vine == *vine_spec.vine);
  CHECK_NOTHROW(generate_panel(vback));
}

TEST_CASE("number formatting round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0})
    CHECK(std::stod(io::format_number(x)) == x);
  CHECK_THROWS_AS(io::read_json(scratch("does_not_exist.json")), InputError);
}
