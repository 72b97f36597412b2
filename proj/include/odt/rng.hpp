#pragma once

#include <cstdint>
#include <random>

namespace odt {

// splitmix64 mix of a master seed and a stream tag. Used everywhere a
// deterministic, independent substream is needed (replications, policies,
// threshold draws vs. insertion order).
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + (stream + 1) * 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Seeded random stream. Copyable: a copy replays the same sequence from the
// current state, which the epsilon sweep uses to repeat one insertion order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }

  double exponential(double rate) {
    return std::exponential_distribution<double>(rate)(engine_);
  }

  // Unit-scale gamma draw; two of these make a Beta variate.
  double gamma(double shape) {
    return std::gamma_distribution<double>(shape, 1.0)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace odt
