#pragma once

#include <cstdint>
#include <vector>

namespace mmot {

// Counter-based generator: draw k of stream `seed` is a pure function of
// (seed, k). No global state, identical output on every platform.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() { return mix(seed_, counter_++); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in (0, 1); redraws the measure-zero hit on 0.
  double uniform_open01() {
    double u = uniform01();
    while (u == 0.0) u = uniform01();
    return u;
  }

  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  // splitmix64 finalizer on seed + (counter+1) * golden ratio.
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t z = seed + (counter + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

// Independent sub-stream seed, e.g. one per scan sample.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return DeterministicRng::mix(seed, tag);
}

// Fisher-Yates permutation of 0..n-1 driven by the given stream.
inline std::vector<std::size_t> random_permutation(std::size_t n, DeterministicRng& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t v = 0; v < n; ++v) order[v] = v;
  for (std::size_t k = n; k > 1; --k) {
    const std::size_t j = rng.next_u64() % k;
    std::swap(order[k - 1], order[j]);
  }
  return order;
}

}  // namespace mmot
