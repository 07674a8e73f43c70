#pragma once

#include <cstdint>
#include <random>

namespace vinestress {

/**
 * Seedable generator with a fully specified output stream.
 *
 * The engine is the standard 64-bit Mersenne Twister (mt19937_64), whose
 * output sequence is fixed by the C++ standard. Variates are derived from the
 * raw 64-bit words with explicit formulas rather than std:: distributions,
 * whose algorithms are implementation-defined:
 *
 *   uniform()  = ((w >> 11) + 0.5) * 2^-53          (open interval (0,1))
 *   normal()   = Phi^-1(uniform())
 *   student_t(k) = normal() / sqrt(sum of k squared normal() / k)
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform();
  double normal();
  /// Student-t draw with an integer number of degrees of freedom.
  double student_t(int dof);

 private:
  std::mt19937_64 engine_;
};

/// Nondeterministic seed for runs where the caller did not supply one.
std::uint64_t random_seed();

}  // namespace vinestress
