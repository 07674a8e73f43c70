#include "vinestress/numeric.hpp"

#include <boost/math/distributions/normal.hpp>

#include "vinestress/rng.hpp"

namespace vinestress {

namespace {
const boost::math::normal_distribution<double> kStdNormal{0.0, 1.0};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

double normal_quantile(double p) { return boost::math::quantile(kStdNormal, p); }

double Rng::uniform() {
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  return (static_cast<double>(engine_() >> 11) + 0.5) * kScale;
}

double Rng::normal() { return normal_quantile(uniform()); }

double Rng::student_t(int dof) {
  double chi2 = 0.0;
  const double z = normal();
  for (int k = 0; k < dof; ++k) {
    const double g = normal();
    chi2 += g * g;
  }
  return z / std::sqrt(chi2 / dof);
}

std::uint64_t random_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

}  // namespace vinestress
