#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace epitrack {

// splitmix64: tiny full-period 64-bit generator with a fixed reference
// output stream. <random> distributions are not bit-reproducible across
// standard libraries, so all sampling here goes through this engine.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// Mixes a stream index into a master seed; distinct indices give
// statistically independent substreams.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
  SplitMix64 g(master ^ (0x9e3779b97f4a7c15ull * (index + 1)));
  return g();
}

// Uniform draw in (0, 1]; 53-bit resolution, never returns 0 so logs are safe.
inline double uniform_unit(SplitMix64& g) {
  return (static_cast<double>(g() >> 11) + 1.0) * 0x1.0p-53;
}

// Exponential variate with the given rate; +inf when the rate is zero
// (a disabled clock never fires).
inline double exponential_draw(SplitMix64& g, double rate) {
  if (rate <= 0.0) return std::numeric_limits<double>::infinity();
  return -std::log(uniform_unit(g)) / rate;
}

}  // namespace epitrack
