#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "vinestress/dvine.hpp"
#include "vinestress/errors.hpp"
#include "vinestress/marginals.hpp"
#include "vinestress/rng.hpp"

using namespace vinestress;
using Catch::Approx;

namespace {

DVineModel gaussian3(double r01, double r12, double partial) {
  return DVineModel({"v", "a", "b"}, {{BivariateCopula(Family::Gaussian, r01), BivariateCopula(Family::Gaussian, r12)},
                                      {BivariateCopula(Family::Gaussian, partial)}});
}

Eigen::MatrixXd corr3(double r01, double r12, double partial) {
  Eigen::MatrixXd R(3, 3);
  const double r02 = oracle::compose_partial(r01, r12, partial);
  R << 1, r01, r02, r01, 1, r12, r02, r12, 1;
  return R;
}

DVineModel mixed4() {
  return DVineModel({"y", "x1", "x2", "x3"},
                    {{BivariateCopula(Family::Clayton, 2.0), BivariateCopula(Family::Gumbel, 1.5),
                      BivariateCopula(Family::Frank, 4.0)},
                     {BivariateCopula(Family::Gaussian, 0.3), BivariateCopula(Family::Joe, Rotation::R180, 1.5)},
                     {BivariateCopula(Family::Clayton, Rotation::R90, 0.5)}});
}

Columns gaussian_sample(const Eigen::MatrixXd& R, std::size_t n, std::uint64_t seed) {
  const Eigen::MatrixXd L = R.llt().matrixL();
  Rng rng(seed);
  Columns out(static_cast<std::size_t>(R.rows()), Column(n));
  Eigen::VectorXd z(R.rows());
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < R.rows(); ++k) z[k] = rng.normal();
    const Eigen::VectorXd x = L * z;
    for (Eigen::Index k = 0; k < R.rows(); ++k) out[static_cast<std::size_t>(k)][i] = oracle::Phi(x[k]);
  }
  return out;
}

}  // namespace

TEST_CASE("model construction") {
  CHECK_THROWS_AS(DVineModel({"a", "a"}, {{BivariateCopula()}}), InputError);
  CHECK_THROWS_AS(DVineModel({"a", "b", "c"}, {{BivariateCopula()}}), InputError);
  const auto m = DVineModel::independent({"y", "a", "b", "c"});
  CHECK(m.num_pairs() == 6);
  CHECK(m.num_covariates() == 3);
  CHECK(m.num_parameters() == 0);
  CHECK(mixed4().num_parameters() == 6);
  CHECK(mixed4().response_path().size() == 3);
  CHECK(mixed4().response_path()[1] == BivariateCopula(Family::Gaussian, 0.3));
}

TEST_CASE("log-likelihood special cases") {
  Rng rng(1);
  Columns data(3, Column(50));
  for (auto& c : data)
    for (auto& x : c) x = rng.uniform();
  CHECK(dvine_loglik(DVineModel::independent({"a", "b", "c"}), data) == 0.0);

  const BivariateCopula c(Family::Clayton, 1.7);
  const DVineModel two({"a", "b"}, {{c}});
  const Columns ab{data[0], data[1]};
  CHECK(dvine_loglik(two, ab) == Approx(c.loglik(data[0], data[1])).epsilon(1e-13));
  CHECK_THROWS_AS(dvine_loglik(two, data), InputError);
}

TEST_CASE("three-variable log-likelihood follows the pair decomposition") {
  const auto m = mixed4();
  const DVineModel three({"y", "x1", "x2"}, {{m.pair(1, 0), m.pair(1, 1)}, {m.pair(2, 0)}});
  Rng rng(2);
  Columns data(3, Column(100));
  for (auto& col : data)
    for (auto& x : col) x = rng.uniform();
  double expected = 0.0, cond = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    const double u1 = data[0][i], u2 = data[1][i], u3 = data[2][i];
    const double a = m.pair(1, 0).hfunc(Conditioning::OnSecond, u1, u2);
    const double b = m.pair(1, 1).hfunc(Conditioning::OnFirst, u2, u3);
    expected += m.pair(1, 0).log_density(u1, u2) + m.pair(1, 1).log_density(u2, u3) + m.pair(2, 0).log_density(a, b);
    cond += m.pair(1, 0).log_density(u1, u2) + m.pair(2, 0).log_density(a, b);
  }
  CHECK(dvine_loglik(three, data) == Approx(expected).epsilon(1e-12));
  CHECK(conditional_loglik(three, data) == Approx(cond).epsilon(1e-12));
}

TEST_CASE("all-Gaussian vine collapses to the Gaussian copula") {
  const double r01 = 0.5, r12 = 0.3, partial = 0.4;
  const auto m = gaussian3(r01, r12, partial);
  const auto R = corr3(r01, r12, partial);
  Rng rng(3);
  for (int k = 0; k < 100; ++k) {
    const std::vector<double> u{rng.uniform(), rng.uniform(), rng.uniform()};
    const Columns one{{u[0]}, {u[1]}, {u[2]}};
    CHECK(dvine_loglik(m, one) == Approx(oracle::gaussian_copula_logpdf(R, u)).margin(1e-6));
    const std::vector<double> cov{u[1], u[2]};
    CHECK(conditional_cdf(m, u[0], cov) == Approx(oracle::gaussian_conditional_cdf(R, u[0], cov)).margin(1e-6));
  }
}

TEST_CASE("conditional functions of trivial models") {
  const auto indep = DVineModel::independent({"y", "a", "b"});
  const std::vector<double> u{0.3, 0.9};
  CHECK(conditional_cdf(indep, 0.42, u) == Approx(0.42).margin(1e-15));
  CHECK(conditional_quantile(indep, 0.42, u) == Approx(0.42).margin(1e-15));

  const double rho = 0.6;
  const BivariateCopula g(Family::Gaussian, rho);
  const DVineModel one({"y", "x"}, {{g}});
  for (double a : {0.05, 0.3, 0.5, 0.9}) {
    for (double x : {0.1, 0.5, 0.95}) {
      const std::vector<double> cov{x};
      CHECK(conditional_cdf(one, a, cov) == Approx(g.hfunc(Conditioning::OnSecond, a, x)).margin(1e-15));
      const double closed = oracle::Phi(rho * oracle::Phi_inv(x) + std::sqrt(1 - rho * rho) * oracle::Phi_inv(a));
      const double q = conditional_quantile(one, a, cov);
      CHECK(q == Approx(closed).margin(1e-10));
      const double numeric = oracle::bisect([&](double v) { return conditional_cdf(one, v, cov); }, a, 0.0, 1.0);
      CHECK(q == Approx(numeric).margin(1e-10));
    }
  }
}

TEST_CASE("Gaussian conditional quantile matches the normal oracle") {
  const auto m = gaussian3(0.5, 0.3, 0.4);
  const auto R = corr3(0.5, 0.3, 0.4);
  Rng rng(4);
  for (int k = 0; k < 200; ++k) {
    const double a = rng.uniform();
    const std::vector<double> u{rng.uniform(), rng.uniform()};
    CHECK(conditional_quantile(m, a, u) == Approx(oracle::gaussian_conditional_quantile(R, a, u)).margin(1e-8));
  }
}

TEST_CASE("quantiles invert the conditional CDF on a mixed vine") {
  const auto m = mixed4();
  Rng rng(5);
  for (int k = 0; k < 500; ++k) {
    const double a = rng.uniform();
    const std::vector<double> u{rng.uniform(), rng.uniform(), rng.uniform()};
    const double q = conditional_quantile(m, a, u);
    CHECK(conditional_cdf(m, q, u) == Approx(a).margin(1e-8));
    const double numeric = oracle::bisect([&](double v) { return conditional_cdf(m, v, u); }, a, 0.0, 1.0);
    CHECK(q == Approx(numeric).margin(1e-7));
  }
}

TEST_CASE("quantiles invert the conditional CDF when conditioners sit in the tails") {
  // The second and fourth response-path conditioners are within 1e-7 and 1e-9 of 1.
  const DVineModel m({"y", "a", "b", "c", "d"},
                     {{BivariateCopula(Family::Gumbel, Rotation::R180, 1.546881),
                       BivariateCopula(Family::Clayton, Rotation::R270, 5.241532), BivariateCopula(),
                       BivariateCopula(Family::Gaussian, 0.623509)},
                      {BivariateCopula(Family::Joe, Rotation::R180, 1.316883),
                       BivariateCopula(Family::Clayton, Rotation::R270, 2.040061),
                       BivariateCopula(Family::Clayton, 0.925258)},
                      {BivariateCopula(Family::Gumbel, Rotation::R180, 1.052632),
                       BivariateCopula(Family::Joe, Rotation::R270, 2.717859)},
                      {BivariateCopula(Family::Clayton, Rotation::R270, 3.393613)}});
  const std::vector<std::pair<double, std::vector<double>>> cases{
      {0.2324238024, {0.72814553252437331, 0.948485398908258, 0.15205054703587356, 0.50743577058762868}},
      {0.3572956455, {0.83623329232210453, 0.9428041804385523, 0.053671101722879755, 0.41794882004690465}},
      {0.7483713176, {0.32066282160220821, 0.98861487662223579, 0.42948342673209911, 0.11370734840196622}}};
  for (const auto& [a, u] : cases) {
    const double q = conditional_quantile(m, a, u);
    CHECK(conditional_cdf(m, q, u) == Approx(a).margin(1e-8));
  }
}

TEST_CASE("quantiles are monotone in the level") {
  const auto m = mixed4();
  const std::vector<double> alphas{0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99};
  Rng rng(6);
  for (int k = 0; k < 100; ++k) {
    const std::vector<double> u{rng.uniform(), rng.uniform(), rng.uniform()};
    const auto q = conditional_quantiles(m, alphas, u);
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      CHECK(q[i] == conditional_quantile(m, alphas[i], u));
      if (i > 0) CHECK(q[i - 1] <= q[i]);
    }
  }
}

TEST_CASE("simulation is deterministic and reproduces dependence") {
  CHECK(simulate(mixed4(), 100, 9) == simulate(mixed4(), 100, 9));
  CHECK(simulate(mixed4(), 100, 9) != simulate(mixed4(), 100, 10));

  const auto indep = simulate(DVineModel::independent({"a", "b", "c"}), 5000, 1);
  CHECK(std::abs(kendall_tau(indep[0], indep[1])) < 0.05);
  CHECK(std::abs(kendall_tau(indep[1], indep[2])) < 0.05);
  CHECK(std::abs(kendall_tau(indep[0], indep[2])) < 0.05);

  const auto g = simulate(DVineModel({"a", "b"}, {{BivariateCopula(Family::Gaussian, 0.6)}}), 5000, 2);
  CHECK(kendall_tau(g[0], g[1]) == Approx(2.0 / std::numbers::pi * std::asin(0.6)).margin(0.03));
}

TEST_CASE("simulate then refit recovers pair taus") {
  const auto truth = mixed4();
  const auto data = simulate(truth, 5000, 11);
  Columns u;
  for (const auto& c : data) u.push_back(pseudo_observations(c));
  const auto fit = fit_dvine(truth.order(), u);
  for (std::size_t t = 1; t <= 3; ++t)
    for (std::size_t e = 0; e + t <= 3; ++e) {
      INFO("tree " << t << " edge " << e << ": " << to_string(fit.pair(t, e)));
      CHECK(fit.pair(t, e).tau() == Approx(truth.pair(t, e).tau()).margin(0.05));
    }
  CHECK(fit.order() == truth.order());
}

TEST_CASE("forward selection picks the signal covariate") {
  int first = 0;
  const int seeds = 30;
  for (int seed = 1; seed <= seeds; ++seed) {
    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(4, 4);
    R(0, 1) = R(1, 0) = 0.5;
    const auto d = gaussian_sample(R, 500, 1000 + seed);
    const auto m = forward_select("y", d[0], {"A", "B", "C"}, {d[1], d[2], d[3]});
    REQUIRE(!m.trace.empty());
    first += m.trace.front().candidate == "A";
    for (std::size_t k = 1; k < m.trace.size(); ++k) CHECK(m.trace[k - 1].cll <= m.trace[k].cll);
  }
  CHECK(first >= 0.9 * seeds);
}

TEST_CASE("forward selection on noise keeps at most one covariate") {
  int ok = 0;
  const int seeds = 30;
  for (int seed = 1; seed <= seeds; ++seed) {
    const auto d = gaussian_sample(Eigen::MatrixXd::Identity(4, 4), 500, 2000 + seed);
    const auto m = forward_select("y", d[0], {"A", "B", "C"}, {d[1], d[2], d[3]});
    ok += m.num_covariates() <= 1;
    if (m.num_covariates() == 0) CHECK(m.no_covariate_selected);
  }
  CHECK(ok >= 0.8 * seeds);
}

TEST_CASE("forward selection with a single strong candidate") {
  const double rho = std::sin(std::numbers::pi * 0.6 / 2.0);  // tau = 0.6
  Eigen::MatrixXd R = Eigen::MatrixXd::Identity(2, 2);
  R(0, 1) = R(1, 0) = rho;
  const auto d = gaussian_sample(R, 500, 5);
  const auto m = forward_select("y", d[0], {"x"}, {d[1]});
  CHECK(m.covariates() == std::vector<std::string>{"x"});
  CHECK(m.trace.size() == 1);
  CHECK(m.conditional_loglik > 0.0);
  CHECK(m.conditional_loglik == Approx(conditional_loglik(m, d)).epsilon(1e-12));
}

TEST_CASE("forced selection adopts every candidate") {
  const auto d = gaussian_sample(Eigen::MatrixXd::Identity(4, 4), 200, 8);
  VineFitConfig cfg;
  cfg.force_all = true;
  const auto m = forward_select("y", d[0], {"A", "B", "C"}, {d[1], d[2], d[3]}, cfg);
  CHECK(m.num_covariates() == 3);
  CHECK(m.trace.size() == 3);
  CHECK_THROWS_AS(forward_select("y", Column(5, 0.5), {"A"}, {Column(5, 0.5)}), InputError);
}

TEST_CASE("forward selection is insertion-aware") {
  // y depends on A only through B: a chain y - B - A. Whatever enters
  // first, the order must end with B next to the response.
  Eigen::MatrixXd R(3, 3);
  R << 1, 0.7, 0.49, 0.7, 1, 0.7, 0.49, 0.7, 1;
  const auto d = gaussian_sample(R, 1000, 12);
  VineFitConfig cfg;
  cfg.force_all = true;
  const auto m = forward_select("y", d[0], {"A", "B"}, {d[2], d[1]}, cfg);
  CHECK(m.order() == std::vector<std::string>{"y", "B", "A"});
}
