#pragma once

#include <cstdint>

namespace advd {

/// Deterministic xoshiro256++ generator with hand-rolled distributions.
/// All randomness in the library flows through this class so that a run is
/// reproducible from a single seed independent of the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0);

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller (spare value cached).
  double normal();
  /// Uniform integer in [0, n), n > 0.
  std::int64_t uniform_int(std::int64_t n);

  /// Derive an independent stream; (seed, stream) pairs never collide in
  /// practice because the derivation remixes through splitmix64.
  Rng fork(std::uint64_t stream) const;

 private:
  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
  std::uint64_t seed_ = 0;
};

}  // namespace advd
