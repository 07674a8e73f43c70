#include "vinestress/bicop.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/owens_t.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "vinestress/errors.hpp"
#include "vinestress/marginals.hpp"
#include "vinestress/numeric.hpp"

namespace vinestress {

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Independence: return "Independence";
    case Family::Gaussian: return "Gaussian";
    case Family::Clayton: return "Clayton";
    case Family::Gumbel: return "Gumbel";
    case Family::Frank: return "Frank";
    case Family::Joe: return "Joe";
  }
  return "?";
}

Family family_from_name(std::string_view name) {
  for (Family f : {Family::Independence, Family::Gaussian, Family::Clayton, Family::Gumbel, Family::Frank, Family::Joe})
    if (family_name(f) == name) return f;
  throw InputError("unknown copula family '" + std::string(name) + "'");
}

int rotation_degrees(Rotation r) { return static_cast<int>(r); }

Rotation rotation_from_degrees(int degrees) {
  switch (degrees) {
    case 0: return Rotation::R0;
    case 90: return Rotation::R90;
    case 180: return Rotation::R180;
    case 270: return Rotation::R270;
    default: throw InputError("rotation must be 0, 90, 180 or 270, got " + std::to_string(degrees));
  }
}

bool is_rotatable(Family f) { return f == Family::Clayton || f == Family::Gumbel || f == Family::Joe; }

std::string to_string(const FamilySpec& spec) {
  std::string s(family_name(spec.family));
  if (spec.rotation != Rotation::R0) s += "_" + std::to_string(rotation_degrees(spec.rotation));
  return s;
}

std::vector<FamilySpec> candidate_specs(const std::vector<Family>& families) {
  const std::vector<Family> all{Family::Independence, Family::Gaussian, Family::Clayton,
                                Family::Gumbel,       Family::Frank,    Family::Joe};
  const auto& use = families.empty() ? all : families;
  std::vector<FamilySpec> out;
  for (Family f : use) {
    if (is_rotatable(f)) {
      for (Rotation r : {Rotation::R0, Rotation::R90, Rotation::R180, Rotation::R270}) out.push_back({f, r});
    } else {
      out.push_back({f, Rotation::R0});
    }
  }
  return out;
}

ParameterBounds fit_bounds(Family f) {
  switch (f) {
    case Family::Independence: return {0.0, 0.0};
    case Family::Gaussian: return {-0.9999, 0.9999};
    case Family::Clayton: return {1e-6, 50.0};
    case Family::Gumbel: return {1.0, 50.0};
    case Family::Frank: return {-80.0, 80.0};
    case Family::Joe: return {1.0 + 1e-6, 50.0};
  }
  return {0.0, 0.0};
}

// ---------------------------------------------------------------------------
// Unrotated families. All of them are exchangeable, so h(a|b) = dC(a,b)/db
// serves both conditioning directions.

namespace {

// Frank with |theta| below this is evaluated as the independence copula.
constexpr double kFrankTiny = 1e-10;

// A point of (0,1) carried together with its complement, so that rotations
// never have to recover a small value as 1 - (1 - x).
struct Arg {
  double x;
  double c;  // 1 - x
};

Arg arg(double x) { return {x, 1.0 - x}; }
Arg flip(double x) { return {1.0 - x, x}; }
Arg flip(Arg a) { return {a.c, a.x}; }

double log_of(Arg a) { return a.x < 0.5 ? std::log(a.x) : std::log1p(-a.c); }

// log(exp(y) - 1) for y >= 0.
double log_expm1(double y) { return y > 35.0 ? y + std::log1p(-std::exp(-y)) : std::log(std::expm1(y)); }

// log(1 - exp(x)) for x < 0.
double log1mexp(double x) { return x > -M_LN2 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x)); }

// h and 1 - h, each to full relative precision.
struct HPair {
  double h;
  double hc;
};

HPair from_log(double log_h) { return {std::exp(log_h), -std::expm1(log_h)}; }

double quantile_of(Arg a) { return a.x < 0.5 ? normal_quantile(a.x) : -normal_quantile(a.c); }

struct Gaussian {
  static double log_density(double rho, double u, double v) {
    const double x = normal_quantile(u), y = normal_quantile(v);
    const double s = 1.0 - rho * rho;
    return -0.5 * std::log(s) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * s);
  }
  static HPair h(double rho, Arg a, Arg b) {
    const double z = (quantile_of(a) - rho * quantile_of(b)) / std::sqrt(1.0 - rho * rho);
    return {normal_cdf(z), normal_cdf(-z)};
  }
  static Arg hinv(double rho, Arg p, Arg b) {
    const double z = quantile_of(p) * std::sqrt(1.0 - rho * rho) + rho * quantile_of(b);
    return {normal_cdf(z), normal_cdf(-z)};
  }
  // T(h, num/den) with the limits for den == 0.
  static double owens_t_ratio(double h, double num, double den) {
    if (den != 0.0) return boost::math::owens_t(h, num / den);
    if (num == 0.0) return 0.0;
    const double sign = num > 0.0 ? 1.0 : -1.0;
    return h == 0.0 ? 0.25 * sign : 0.5 * normal_cdf(-std::abs(h)) * sign;
  }
  static double cdf(double rho, double u, double v) {
    const double h = normal_quantile(u), k = normal_quantile(v);
    const double s = std::sqrt(1.0 - rho * rho);
    const double beta = (h * k > 0.0 || (h * k == 0.0 && h + k >= 0.0)) ? 0.0 : 0.5;
    return 0.5 * (u + v) - owens_t_ratio(h, k - rho * h, h * s) - owens_t_ratio(k, h - rho * k, k * s) - beta;
  }
};

struct Clayton {
  // log(u^-t + v^-t - 1)
  static double log_sum(double t, double u, double v) {
    const double a = -t * std::log(u), b = -t * std::log(v);
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m) - std::exp(-m));
  }
  static double log_density(double t, double u, double v) {
    return std::log1p(t) + (-1.0 - t) * (std::log(u) + std::log(v)) + (-1.0 / t - 2.0) * log_sum(t, u, v);
  }
  // h = (1 + b^t (a^-t - 1))^(-1 - 1/t)
  static HPair h(double t, Arg a, Arg b) {
    const double z = t * log_of(b) + log_expm1(-t * log_of(a));
    return from_log((-1.0 - 1.0 / t) * softplus(z));
  }
  static Arg hinv(double t, Arg p, Arg b) {
    // u^-t = 1 + b^-t * ((p)^(-t/(1+t)) - 1)
    const double c = -t / (1.0 + t) * log_of(p);
    const double l = -softplus(-t * log_of(b) + log_expm1(c)) / t;
    return {std::exp(l), -std::expm1(l)};
  }
  static double cdf(double t, double u, double v) { return std::exp(-log_sum(t, u, v) / t); }
};

struct Gumbel {
  struct Terms {
    double x, y, lx, ly, s, a;  // s = log(x^t + y^t), a = (x^t + y^t)^(1/t)
  };
  static Terms terms(double t, double u, double v) {
    Terms r{};
    r.x = -std::log(u);
    r.y = -std::log(v);
    r.lx = std::log(r.x);
    r.ly = std::log(r.y);
    r.s = log_sum_exp(t * r.lx, t * r.ly);
    r.a = std::exp(r.s / t);
    return r;
  }
  static double log_density(double t, double u, double v) {
    const Terms q = terms(t, u, v);
    return -q.a + q.x + q.y + (t - 1.0) * (q.lx + q.ly) + (1.0 / t - 2.0) * q.s + std::log(q.a + t - 1.0);
  }
  // With r = (x/y)^t: log h = -y ((1 + r)^(1/t) - 1) + (1/t - 1) log(1 + r).
  static HPair h(double t, Arg a, Arg b) {
    const double x = -log_of(a), y = -log_of(b);
    const double l1 = softplus(t * (std::log(x) - std::log(y)));
    return from_log(-y * std::expm1(l1 / t) + (1.0 / t - 1.0) * l1);
  }
  static double cdf(double t, double u, double v) { return std::exp(-terms(t, u, v).a); }
};

struct Frank {
  static double log_density(double t, double u, double v) {
    if (std::abs(t) < kFrankTiny) return 0.0;
    const double d = std::expm1(-t);
    const double a = std::expm1(-t * u), b = std::expm1(-t * v);
    const double den = d + a * b;
    return std::log(-t * d) - t * (u + v) - 2.0 * std::log(std::abs(den));
  }
  // 1 - h = (e^-t - e^-ta) / den
  static HPair h(double t, Arg a, Arg b) {
    if (std::abs(t) < kFrankTiny) return {a.x, a.c};
    // The denominator cancels when both arguments are near 1; use radial symmetry.
    if (a.x + b.x > 1.0) {
      const HPair r = h(t, flip(a), flip(b));
      return {r.hc, r.h};
    }
    const double d = std::expm1(-t);
    const double ea = std::expm1(-t * a.x), eb = std::expm1(-t * b.x);
    const double den = d + ea * eb;
    return {std::exp(-t * b.x) * ea / den, std::exp(-t * a.x) * std::expm1(-t * a.c) / den};
  }
  // a = -log(1 + p d / (p + (1 - p) e^-tb)) / t
  static double hinv_value(double t, Arg p, Arg b) {
    const double ea = p.x * std::expm1(-t) / (p.x + p.c * std::exp(-t * b.x));
    return -std::log1p(ea) / t;
  }
  static Arg hinv(double t, Arg p, Arg b) {
    if (std::abs(t) < kFrankTiny) return p;
    const double x = hinv_value(t, p, b);
    if (x <= 0.5) return arg(x);
    // Radial symmetry gives 1 - a directly.
    return flip(hinv_value(t, flip(p), flip(b)));
  }
  static double cdf(double t, double u, double v) {
    if (std::abs(t) < kFrankTiny) return u * v;
    return -std::log1p(std::expm1(-t * u) * std::expm1(-t * v) / std::expm1(-t)) / t;
  }
};

struct Joe {
  // T = ubar^t + vbar^t - ubar^t vbar^t; returns log T, log ubar^t, log vbar^t
  struct Terms {
    double lt, la, lb;
  };
  static Terms terms(double t, double u, double v) {
    Terms r{};
    r.la = t * std::log1p(-u);
    r.lb = t * std::log1p(-v);
    // T = a + b(1 - a)
    r.lt = log_sum_exp(r.la, r.lb + log1mexp(r.la));
    return r;
  }
  static double log_density(double t, double u, double v) {
    const Terms q = terms(t, u, v);
    return (1.0 / t - 2.0) * q.lt + (t - 1.0) * (std::log1p(-u) + std::log1p(-v)) +
           std::log(t - 1.0 + std::exp(q.lt));
  }
  // With x = ubar^t (1 - vbar^t) / vbar^t: log h = log(1 - ubar^t) + (1/t - 1) log(1 + x).
  static HPair h(double t, Arg a, Arg b) {
    const double la = t * log_of(flip(a)), lb = t * log_of(flip(b));
    const double lx = la - lb + log1mexp(lb);
    return from_log(log1mexp(la) + (1.0 / t - 1.0) * softplus(lx));
  }
  static double cdf(double t, double u, double v) { return -std::expm1(terms(t, u, v).lt / t); }
};

double base_log_density(Family f, double t, double u, double v) {
  switch (f) {
    case Family::Independence: return 0.0;
    case Family::Gaussian: return Gaussian::log_density(t, u, v);
    case Family::Clayton: return Clayton::log_density(t, u, v);
    case Family::Gumbel: return Gumbel::log_density(t, u, v);
    case Family::Frank: return Frank::log_density(t, u, v);
    case Family::Joe: return Joe::log_density(t, u, v);
  }
  return 0.0;
}

double base_cdf(Family f, double t, double u, double v) {
  switch (f) {
    case Family::Independence: return u * v;
    case Family::Gaussian: return Gaussian::cdf(t, u, v);
    case Family::Clayton: return Clayton::cdf(t, u, v);
    case Family::Gumbel: return Gumbel::cdf(t, u, v);
    case Family::Frank: return Frank::cdf(t, u, v);
    case Family::Joe: return Joe::cdf(t, u, v);
  }
  return 0.0;
}

// h(a|b) = dC(a,b)/db and its complement
HPair base_h2(Family f, double t, Arg a, Arg b) {
  HPair r{a.x, a.c};
  switch (f) {
    case Family::Independence: break;
    case Family::Gaussian: r = Gaussian::h(t, a, b); break;
    case Family::Clayton: r = Clayton::h(t, a, b); break;
    case Family::Gumbel: r = Gumbel::h(t, a, b); break;
    case Family::Frank: r = Frank::h(t, a, b); break;
    case Family::Joe: r = Joe::h(t, a, b); break;
  }
  return {std::clamp(r.h, 0.0, 1.0), std::clamp(r.hc, 0.0, 1.0)};
}

// Root of h(a|b) = p, searched over log a or log(1 - a), whichever side is small.
Arg numeric_hinv(Family f, double t, Arg p, Arg b) {
  auto residual = [&](Arg a) {
    const HPair h = base_h2(f, t, a, b);
    return p.x < 0.5 ? h.h - p.x : p.c - h.hc;
  };
  const double lo = kTinyProb;
  if (residual(arg(lo)) >= 0.0) return arg(lo);
  if (residual(flip(lo)) <= 0.0) return flip(lo);
  const bool low_side = residual(arg(0.5)) >= 0.0;
  auto at = [&](double s) { return low_side ? arg(std::exp(s)) : flip(std::exp(s)); };
  auto g = [&](double s) { return residual(at(s)); };
  std::uintmax_t iters = 200;
  auto tol = [](double x, double y) {
    return std::abs(x - y) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(x), std::abs(y));
  };
  const double s_lo = std::log(lo), s_hi = std::log(0.5);
  const auto [s0, s1] = boost::math::tools::toms748_solve(g, s_lo, s_hi, g(s_lo), g(s_hi), tol, iters);
  const double root = 0.5 * (s0 + s1);
  if (iters >= 200) {
    std::ostringstream msg;
    msg << "inverse h-function did not converge: family=" << family_name(f) << " parameter=" << t << " p=" << p.x
        << " conditioning=" << b.x << " bracket=[" << std::exp(s0) << ", " << std::exp(s1)
        << "] residual=" << g(root);
    throw NumericalError(msg.str());
  }
  return at(root);
}

// a with h(a|b) = p
Arg base_hinv2(Family f, double t, Arg p, Arg b) {
  switch (f) {
    case Family::Independence: return p;
    case Family::Gaussian: return Gaussian::hinv(t, p, b);
    case Family::Clayton: return Clayton::hinv(t, p, b);
    case Family::Frank: return Frank::hinv(t, p, b);
    case Family::Gumbel:
    case Family::Joe: return numeric_hinv(f, t, p, b);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Kendall's tau of the unrotated families.

double frank_tau(double t) {
  if (std::abs(t) < 1e-2) return t / 9.0 - t * t * t / 900.0;
  auto integrand = [](double s) { return s == 0.0 ? 1.0 : s / std::expm1(s); };
  const double debye1 = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, t, 15, 1e-14) / t;
  return 1.0 - 4.0 / t * (1.0 - debye1);
}

double joe_tau(double t) {
  // 1 + 2/(2-t) (psi(2) - psi(2/t + 1)); expanded around t = 2.
  const double delta = 2.0 - t;
  if (std::abs(delta) < 1e-5) {
    const double eps = delta / t;
    return 1.0 - 2.0 * (boost::math::trigamma(2.0) + 0.5 * boost::math::polygamma(2, 2.0) * eps) / t;
  }
  return 1.0 + 2.0 / delta * (boost::math::digamma(2.0) - boost::math::digamma(2.0 / t + 1.0));
}

double base_tau(Family f, double t) {
  switch (f) {
    case Family::Independence: return 0.0;
    case Family::Gaussian: return 2.0 / M_PI * std::asin(t);
    case Family::Clayton: return t / (t + 2.0);
    case Family::Gumbel: return 1.0 - 1.0 / t;
    case Family::Frank: return frank_tau(t);
    case Family::Joe: return joe_tau(t);
  }
  return 0.0;
}

bool negative_rotation(Rotation r) { return r == Rotation::R90 || r == Rotation::R270; }

// Solves tau_fn(t) = target on [lo, hi), growing hi until bracketed.
template <typename F>
double invert_tau(F tau_fn, double target, double lo, double hi) {
  auto g = [&](double t) { return tau_fn(t) - target; };
  double ghi = g(hi);
  for (int k = 0; ghi < 0.0 && k < 40; ++k) {
    lo = hi;
    hi *= 2.0;
    ghi = g(hi);
  }
  std::uintmax_t iters = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(50);
  const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, g(lo), ghi, tol, iters);
  return 0.5 * (a + b);
}

[[noreturn]] void tau_domain_error(FamilySpec spec, double tau, const char* range) {
  std::ostringstream msg;
  msg << "Kendall tau " << tau << " not attainable by " << to_string(spec) << " (tau range " << range << ")";
  throw DomainError(msg.str());
}

}  // namespace

// ---------------------------------------------------------------------------

BivariateCopula::BivariateCopula(Family family, Rotation rotation, double parameter)
    : family_(family), rotation_(rotation), parameter_(parameter) {
  if (rotation != Rotation::R0 && !is_rotatable(family))
    throw DomainError(std::string(family_name(family)) + " copula does not support rotation " +
                      std::to_string(rotation_degrees(rotation)));
  const double t = parameter;
  bool ok = std::isfinite(t);
  const char* domain = "";
  switch (family) {
    case Family::Independence: parameter_ = 0.0; break;
    case Family::Gaussian: ok = ok && t > -1.0 && t < 1.0; domain = "(-1, 1)"; break;
    case Family::Clayton: ok = ok && t > 0.0; domain = "(0, inf)"; break;
    case Family::Gumbel: ok = ok && t >= 1.0; domain = "[1, inf)"; break;
    case Family::Frank: ok = ok && t != 0.0; domain = "R \\ {0}"; break;
    case Family::Joe: ok = ok && t > 1.0; domain = "(1, inf)"; break;
  }
  if (!ok) {
    std::ostringstream msg;
    msg << family_name(family) << " parameter " << t << " outside domain " << domain;
    throw DomainError(msg.str());
  }
}

BivariateCopula BivariateCopula::with_fit(double loglik, std::size_t n) const {
  BivariateCopula c = *this;
  c.fitted_loglik_ = loglik;
  c.fitted_n_ = n;
  return c;
}

double BivariateCopula::log_density(double u, double v) const {
  u = clamp_unit(u);
  v = clamp_unit(v);
  const double t = parameter_;
  switch (rotation_) {
    case Rotation::R0: return base_log_density(family_, t, u, v);
    case Rotation::R90: return base_log_density(family_, t, 1.0 - u, v);
    case Rotation::R180: return base_log_density(family_, t, 1.0 - u, 1.0 - v);
    case Rotation::R270: return base_log_density(family_, t, u, 1.0 - v);
  }
  return 0.0;
}

double BivariateCopula::density(double u, double v) const { return std::exp(log_density(u, v)); }

double BivariateCopula::cdf(double u, double v) const {
  u = clamp_unit(u);
  v = clamp_unit(v);
  const double t = parameter_;
  switch (rotation_) {
    case Rotation::R0: return base_cdf(family_, t, u, v);
    case Rotation::R90: return v - base_cdf(family_, t, 1.0 - u, v);
    case Rotation::R180: return u + v - 1.0 + base_cdf(family_, t, 1.0 - u, 1.0 - v);
    case Rotation::R270: return u - base_cdf(family_, t, u, 1.0 - v);
  }
  return 0.0;
}

namespace {

Arg floored(Prob p) { return {std::max(p.value, kTinyProb), std::max(p.complement, kTinyProb)}; }

Prob to_prob(HPair h) { return {h.h, h.hc}; }
Prob to_prob(Arg a) { return {a.x, a.c}; }
Prob flipped(Arg a) { return {a.c, a.x}; }
Prob flipped(HPair h) { return {h.hc, h.h}; }

}  // namespace

Prob BivariateCopula::hfunc(Conditioning which, Prob u_in, Prob v_in) const {
  const Arg u = floored(u_in), v = floored(v_in);
  const double t = parameter_;
  const Family f = family_;
  if (which == Conditioning::OnSecond) {  // h_{1|2}(u|v)
    switch (rotation_) {
      case Rotation::R0: return to_prob(base_h2(f, t, u, v));
      case Rotation::R90: return flipped(base_h2(f, t, flip(u), v));
      case Rotation::R180: return flipped(base_h2(f, t, flip(u), flip(v)));
      case Rotation::R270: return to_prob(base_h2(f, t, u, flip(v)));
    }
  } else {  // h_{2|1}(v|u)
    switch (rotation_) {
      case Rotation::R0: return to_prob(base_h2(f, t, v, u));
      case Rotation::R90: return to_prob(base_h2(f, t, v, flip(u)));
      case Rotation::R180: return flipped(base_h2(f, t, flip(v), flip(u)));
      case Rotation::R270: return flipped(base_h2(f, t, flip(v), u));
    }
  }
  return u_in;
}

Prob BivariateCopula::hinv(Conditioning which, Prob p_in, Prob cond_in) const {
  const Arg p = floored(p_in), cond = floored(cond_in);
  const double t = parameter_;
  const Family f = family_;
  if (which == Conditioning::OnSecond) {  // solve h_{1|2}(u|cond) = p for u
    switch (rotation_) {
      case Rotation::R0: return to_prob(base_hinv2(f, t, p, cond));
      case Rotation::R90: return flipped(base_hinv2(f, t, flip(p), cond));
      case Rotation::R180: return flipped(base_hinv2(f, t, flip(p), flip(cond)));
      case Rotation::R270: return to_prob(base_hinv2(f, t, p, flip(cond)));
    }
  } else {  // solve h_{2|1}(v|cond) = p for v
    switch (rotation_) {
      case Rotation::R0: return to_prob(base_hinv2(f, t, p, cond));
      case Rotation::R90: return to_prob(base_hinv2(f, t, p, flip(cond)));
      case Rotation::R180: return flipped(base_hinv2(f, t, flip(p), flip(cond)));
      case Rotation::R270: return flipped(base_hinv2(f, t, flip(p), cond));
    }
  }
  return p_in;
}

double BivariateCopula::hfunc(Conditioning which, double u, double v) const {
  return hfunc(which, prob(clamp_unit(u)), prob(clamp_unit(v))).value;
}

double BivariateCopula::hinv(Conditioning which, double p, double cond) const {
  return clamp_unit(hinv(which, prob(clamp_unit(p)), prob(clamp_unit(cond))).value);
}

double BivariateCopula::tau() const {
  const double t = base_tau(family_, parameter_);
  return negative_rotation(rotation_) ? -t : t;
}

double BivariateCopula::loglik(std::span<const double> u, std::span<const double> v) const {
  if (u.size() != v.size()) throw InputError("loglik: u and v lengths differ");
  if (family_ == Family::Independence) return 0.0;
  double ll = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) ll += log_density(u[i], v[i]);
  return ll;
}

std::string to_string(const BivariateCopula& c) {
  std::ostringstream s;
  s << to_string(c.spec());
  if (c.family() != Family::Independence) s << "(" << c.parameter() << ")";
  return s.str();
}

// ---------------------------------------------------------------------------

ParameterBounds tau_range(Family family, Rotation rotation) {
  switch (family) {
    case Family::Independence: return {0.0, 0.0};
    case Family::Gaussian:
    case Family::Frank: return {-1.0, 1.0};
    default: return negative_rotation(rotation) ? ParameterBounds{-1.0, 0.0} : ParameterBounds{0.0, 1.0};
  }
}

double tau_to_parameter(Family family, Rotation rotation, double tau) {
  const FamilySpec spec{family, rotation};
  if (rotation != Rotation::R0 && !is_rotatable(family))
    throw DomainError(to_string(spec) + ": rotation not supported");
  const double mag = negative_rotation(rotation) ? -tau : tau;
  switch (family) {
    case Family::Independence:
      if (tau != 0.0) tau_domain_error(spec, tau, "{0}");
      return 0.0;
    case Family::Gaussian:
      if (!(tau > -1.0 && tau < 1.0)) tau_domain_error(spec, tau, "(-1, 1)");
      return std::sin(M_PI * tau / 2.0);
    case Family::Clayton:
      if (!(mag > 0.0 && mag < 1.0)) tau_domain_error(spec, tau, negative_rotation(rotation) ? "(-1, 0)" : "(0, 1)");
      return 2.0 * mag / (1.0 - mag);
    case Family::Gumbel:
      if (!(mag >= 0.0 && mag < 1.0)) tau_domain_error(spec, tau, negative_rotation(rotation) ? "(-1, 0]" : "[0, 1)");
      return 1.0 / (1.0 - mag);
    case Family::Frank: {
      if (!(tau > -1.0 && tau < 1.0) || tau == 0.0) tau_domain_error(spec, tau, "(-1, 1) \\ {0}");
      const double t = invert_tau(frank_tau, std::abs(tau), 0.0, 10.0);
      return tau < 0.0 ? -t : t;
    }
    case Family::Joe:
      if (!(mag > 0.0 && mag < 1.0)) tau_domain_error(spec, tau, negative_rotation(rotation) ? "(-1, 0)" : "(0, 1)");
      return invert_tau(joe_tau, mag, 1.0, 4.0);
  }
  return 0.0;
}

double parameter_to_tau(const BivariateCopula& c) { return c.tau(); }

// ---------------------------------------------------------------------------
// Maximum likelihood

namespace {

// Monotone map between the search variable z and the parameter.
struct Reparam {
  Family family;
  double to_param(double z) const {
    switch (family) {
      case Family::Gaussian: return std::tanh(z);
      case Family::Clayton:
      case Family::Gumbel:
      case Family::Joe: return std::exp(z);
      default: return z;
    }
  }
  double to_search(double t) const {
    switch (family) {
      case Family::Gaussian: return std::atanh(t);
      case Family::Clayton:
      case Family::Gumbel:
      case Family::Joe: return std::log(t);
      default: return t;
    }
  }
};

double sample_loglik(FamilySpec spec, double t, std::span<const double> u, std::span<const double> v) {
  double ll = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double a = clamp_unit(u[i]), b = clamp_unit(v[i]);
    switch (spec.rotation) {
      case Rotation::R0: break;
      case Rotation::R90: a = 1.0 - a; break;
      case Rotation::R180: a = 1.0 - a; b = 1.0 - b; break;
      case Rotation::R270: b = 1.0 - b; break;
    }
    ll += base_log_density(spec.family, t, a, b);
  }
  return std::isfinite(ll) ? ll : -std::numeric_limits<double>::infinity();
}

}  // namespace

BivariateCopula fit_mle(FamilySpec spec, std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw InputError("fit_mle: u and v lengths differ");
  if (u.size() < 10) throw InputError("fit_mle needs at least 10 observation pairs, got " + std::to_string(u.size()));
  return fit_mle(spec, u, v, kendall_tau(u, v));
}

BivariateCopula fit_mle(FamilySpec spec, std::span<const double> u, std::span<const double> v, double empirical_tau) {
  if (u.size() != v.size()) throw InputError("fit_mle: u and v lengths differ");
  if (u.size() < 10) throw InputError("fit_mle needs at least 10 observation pairs, got " + std::to_string(u.size()));
  for (std::size_t i = 0; i < u.size(); ++i)
    if (!(u[i] > 0.0 && u[i] < 1.0 && v[i] > 0.0 && v[i] < 1.0))
      throw InputError("fit_mle: observation " + std::to_string(i) + " outside (0,1)");
  const std::size_t n = u.size();
  if (spec.family == Family::Independence) return BivariateCopula::independence().with_fit(0.0, n);

  const ParameterBounds bounds = fit_bounds(spec.family);
  const double start = std::clamp(tau_to_parameter(spec.family, spec.rotation, empirical_tau), bounds.lower, bounds.upper);
  const Reparam rp{spec.family};

  auto negll = [&](double z) {
    const double t = std::clamp(rp.to_param(z), bounds.lower, bounds.upper);
    if (spec.family == Family::Frank && std::abs(t) < kFrankTiny) return 0.0;
    return -sample_loglik(spec, t, u, v);
  };
  std::uintmax_t iters = 200;
  const auto [zbest, fbest] =
      boost::math::tools::brent_find_minima(negll, rp.to_search(bounds.lower), rp.to_search(bounds.upper), 27, iters);

  double theta = std::clamp(rp.to_param(zbest), bounds.lower, bounds.upper);
  double ll = -fbest;
  const double ll_start = sample_loglik(spec, start, u, v);
  if (!(ll >= ll_start)) {
    theta = start;
    ll = ll_start;
  }
  if (spec.family == Family::Frank && std::abs(theta) < kFrankTiny) theta = empirical_tau < 0.0 ? -kFrankTiny : kFrankTiny;
  if (spec.family == Family::Joe && theta <= 1.0) theta = bounds.lower;
  return BivariateCopula(spec.family, spec.rotation, theta).with_fit(ll, n);
}

double independence_pvalue(double tau, std::size_t n) {
  const double m = static_cast<double>(n);
  const double z = 3.0 * std::abs(tau) * std::sqrt(m * (m - 1.0)) / std::sqrt(2.0 * (2.0 * m + 5.0));
  return 2.0 * normal_cdf(-z);
}

BivariateCopula select_family(std::span<const double> u, std::span<const double> v,
                              const std::vector<FamilySpec>& candidates, double independence_level) {
  if (u.size() != v.size()) throw InputError("select_family: u and v lengths differ");
  if (u.size() < 10)
    throw InputError("select_family needs at least 10 observation pairs, got " + std::to_string(u.size()));
  const double tau = kendall_tau(u, v);
  BivariateCopula best = BivariateCopula::independence().with_fit(0.0, u.size());
  if (independence_level > 0.0 && independence_pvalue(tau, u.size()) > independence_level) return best;
  double best_aic = 0.0;
  for (const FamilySpec& spec : candidates) {
    if (spec.family == Family::Independence) continue;
    BivariateCopula fitted;
    try {
      fitted = fit_mle(spec, u, v, tau);
    } catch (const DomainError&) {
      continue;  // tau outside this family's range
    }
    const double a = aic(fitted.fitted_loglik(), fitted.num_parameters());
    if (a < best_aic) {
      best_aic = a;
      best = fitted;
    }
  }
  return best;
}

}  // namespace vinestress
