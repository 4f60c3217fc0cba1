#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "damh/math.hpp"

namespace damh {

/// Named random-number substreams. Keeping proposal noise, estimator noise
/// and the two accept draws on separate engines makes trajectories of
/// different kernels comparable: e.g. a pseudo-marginal chain with a
/// zero-variance estimator consumes the same proposal/accept sequences as the
/// plain RWM chain and therefore follows the identical path.
enum class Stream : int {
  proposal = 0,
  estimator = 1,
  accept1 = 2,
  accept2 = 3,
  init = 4,
  data = 5,
};

inline constexpr int kNumStreams = 6;

/// Explicit-state generator with named substreams, seeded via splitmix64 so
/// that (seed, chain_id, stream) always yields the same engine state.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed, std::uint64_t chain_id = 0) {
    for (int s = 0; s < kNumStreams; ++s) {
      std::uint64_t z = mix(mix(mix(0x9e3779b97f4a7c15ULL ^ seed) + chain_id) +
                            static_cast<std::uint64_t>(s) + 1);
      engines_[s].seed(z);
    }
  }

  std::mt19937_64& engine(Stream s) { return engines_[static_cast<int>(s)]; }

  /// Uniform draw on [0, 1).
  double uniform(Stream s) { return unif_(engine(s)); }

  /// Standard normal draw. Stateless transform (no Box-Muller carry) so a
  /// substream's draw sequence depends only on how many draws were taken.
  double normal(Stream s) {
    // inverse-CDF from a 53-bit uniform kept away from the endpoints
    double u = (static_cast<double>(engine(s)() >> 11) + 0.5) * 0x1.0p-53;
    return norm_ppf(u);
  }

  /// Exponential with the given rate.
  double exponential(Stream s, double rate) {
    double u = unif_(engine(s));
    return -std::log1p(-u) / rate;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::array<std::mt19937_64, kNumStreams> engines_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

}  // namespace damh
