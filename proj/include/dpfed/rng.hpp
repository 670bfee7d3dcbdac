#pragma once

#include <cstdint>
#include <limits>

namespace dpfed {

/// Counter-based generator: the i-th output is a bijective 64-bit mix of
/// (key + i * golden gamma), i.e. SplitMix64 viewed as a keyed hash.  Streams
/// derived with different ids never share state.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed) : key_(mix(seed)), counter_(0) {}

  /// Independent stream `id` of master `seed`.
  static CounterRng stream(std::uint64_t seed, std::uint64_t id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (++counter_) * kGamma); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  static std::uint64_t mix(std::uint64_t z);

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_;
};

// Distribution helpers.  Written out rather than taken from <random> so the
// draws are identical across standard library implementations.

/// Uniform on the open interval (0, 1).
double uniform_open(CounterRng& rng);
/// Uniform on [a, b).
double uniform(CounterRng& rng, double a, double b);
double standard_normal(CounterRng& rng);
/// Laplace(0, b) by inverse CDF.
double laplace(CounterRng& rng, double scale);
/// Standard Cauchy, used to stress clipping.
double cauchy(CounterRng& rng);

}  // namespace dpfed

namespace dpfed {

/// 64-bit seed of sub-stream `id` of `seed` (for APIs taking a plain seed).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t id) {
  return CounterRng::mix(CounterRng::mix(seed) ^ CounterRng::mix(id + 0x632be59bd9b4e019ULL));
}

}  // namespace dpfed
