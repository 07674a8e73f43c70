#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vinestress {

enum class Family { Independence, Gaussian, Clayton, Gumbel, Frank, Joe };

enum class Rotation { R0 = 0, R90 = 90, R180 = 180, R270 = 270 };

/// Which argument an h-function conditions on.
///   OnSecond: h_{1|2}(u|v) = dC(u,v)/dv
///   OnFirst:  h_{2|1}(v|u) = dC(u,v)/du
enum class Conditioning { OnSecond = 1, OnFirst = 2 };

std::string_view family_name(Family f);
Family family_from_name(std::string_view name);
int rotation_degrees(Rotation r);
Rotation rotation_from_degrees(int degrees);

/// Rotations other than 0 exist only for Clayton, Gumbel and Joe.
bool is_rotatable(Family f);

struct FamilySpec {
  Family family = Family::Independence;
  Rotation rotation = Rotation::R0;

  friend bool operator==(const FamilySpec&, const FamilySpec&) = default;
};

std::string to_string(const FamilySpec& spec);

/// Every (family, rotation) pair built from the given families. An empty
/// whitelist means all six families.
std::vector<FamilySpec> candidate_specs(const std::vector<Family>& families = {});

/// Open parameter interval of a family, and the closed interval searched
/// when fitting by maximum likelihood.
struct ParameterBounds {
  double lower;
  double upper;
};
ParameterBounds fit_bounds(Family f);

/// A probability together with its complement. Values near 1 keep their
/// distance to 1 instead of rounding to it.
struct Prob {
  double value;
  double complement;
};

inline Prob prob(double x) { return {x, 1.0 - x}; }

/**
 * One-parameter bivariate copula with optional rotation.
 *
 * Rotations follow the usual vine conventions:
 *   90:  C(u,v) = v - C0(1-u, v)
 *   180: C(u,v) = u + v - 1 + C0(1-u, 1-v)
 *   270: C(u,v) = u - C0(u, 1-v)
 * The double-valued evaluation routines clamp their copula-scale arguments into
 * [1e-10, 1 - 1e-10].
 */
class BivariateCopula {
 public:
  BivariateCopula() = default;
  /// Throws DomainError if the parameter is outside the family's domain or
  /// the rotation is not defined for the family.
  BivariateCopula(Family family, Rotation rotation, double parameter);
  BivariateCopula(Family family, double parameter) : BivariateCopula(family, Rotation::R0, parameter) {}

  static BivariateCopula independence() { return {}; }

  Family family() const { return family_; }
  Rotation rotation() const { return rotation_; }
  FamilySpec spec() const { return {family_, rotation_}; }
  double parameter() const { return parameter_; }
  int num_parameters() const { return family_ == Family::Independence ? 0 : 1; }

  double density(double u, double v) const;
  double log_density(double u, double v) const;
  double cdf(double u, double v) const;
  double hfunc(Conditioning which, double u, double v) const;

  /// Inverse of hfunc in its free argument.
  ///   OnSecond: returns u with h_{1|2}(u | cond) = p
  ///   OnFirst:  returns v with h_{2|1}(v | cond) = p
  /// Closed form for Independence, Gaussian, Clayton and Frank; bracketed
  /// root finding otherwise. Throws NumericalError if the root search fails.
  double hinv(Conditioning which, double p, double cond) const;

  /// Variants for chaining inside a vine. Both sides of each argument are
  /// floored at kTinyProb rather than clamped to [1e-10, 1 - 1e-10].
  Prob hfunc(Conditioning which, Prob u, Prob v) const;
  Prob hinv(Conditioning which, Prob p, Prob cond) const;

  /// Kendall's tau implied by family, rotation and parameter.
  double tau() const;

  double loglik(std::span<const double> u, std::span<const double> v) const;

  /// Fit metadata; zero for copulas that were constructed directly.
  double fitted_loglik() const { return fitted_loglik_; }
  std::size_t fitted_n() const { return fitted_n_; }
  BivariateCopula with_fit(double loglik, std::size_t n) const;

  friend bool operator==(const BivariateCopula& a, const BivariateCopula& b) {
    return a.family_ == b.family_ && a.rotation_ == b.rotation_ && a.parameter_ == b.parameter_;
  }

 private:
  Family family_ = Family::Independence;
  Rotation rotation_ = Rotation::R0;
  double parameter_ = 0.0;
  double fitted_loglik_ = 0.0;
  std::size_t fitted_n_ = 0;
};

std::string to_string(const BivariateCopula& c);

/// Parameter with the given Kendall tau. Throws DomainError naming the
/// attainable tau range when tau cannot be represented.
double tau_to_parameter(Family family, Rotation rotation, double tau);
double parameter_to_tau(const BivariateCopula& c);

/// Attainable open tau interval of a (family, rotation).
ParameterBounds tau_range(Family family, Rotation rotation);

/**
 * Maximum-likelihood fit of one (family, rotation) to copula data.
 *
 * Starts from tau_to_parameter(empirical tau) and runs a bounded Brent
 * search on a monotone reparameterization of the domain (200 iterations,
 * 1e-8 parameter tolerance). The returned log-likelihood is never below the
 * starting value. Throws InputError for fewer than 10 pairs and DomainError
 * when the empirical tau is outside the family's attainable range.
 */
BivariateCopula fit_mle(FamilySpec spec, std::span<const double> u, std::span<const double> v);

/// Same, with a precomputed empirical tau.
BivariateCopula fit_mle(FamilySpec spec, std::span<const double> u, std::span<const double> v,
                        double empirical_tau);

/**
 * AIC-minimizing candidate. Independence is always considered; candidates
 * whose tau range excludes the empirical tau are skipped.
 *
 * With independence_level > 0 the pair is first tested for independence
 * with the asymptotic normal test on Kendall's tau,
 *   z = 3 |tau| sqrt(n (n-1)) / sqrt(2 (2n+5)),
 * and Independence is returned without fitting when z does not exceed the
 * two-sided critical value at that level. 0 disables the test.
 */
BivariateCopula select_family(std::span<const double> u, std::span<const double> v,
                              const std::vector<FamilySpec>& candidates, double independence_level = 0.05);

/// Two-sided p-value of the Kendall tau independence test.
double independence_pvalue(double tau, std::size_t n);

inline double aic(double loglik, int num_parameters) { return -2.0 * loglik + 2.0 * num_parameters; }

}  // namespace vinestress
