#include "dpfed/rng.hpp"

#include <cmath>
#include <numbers>

namespace dpfed {

std::uint64_t CounterRng::mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

CounterRng CounterRng::stream(std::uint64_t seed, std::uint64_t id) {
  return CounterRng(mix(seed) ^ mix(id + 0x632be59bd9b4e019ULL));
}

double uniform_open(CounterRng& rng) {
  // 53 random bits, shifted by half an ulp so 0 is never returned.
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double uniform(CounterRng& rng, double a, double b) {
  return a + (b - a) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

double standard_normal(CounterRng& rng) {
  const double u1 = uniform_open(rng);
  const double u2 = uniform_open(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double laplace(CounterRng& rng, double scale) {
  const double u = uniform_open(rng) - 0.5;
  const double s = u < 0 ? -1.0 : 1.0;
  return -scale * s * std::log1p(-2.0 * std::abs(u));
}

double cauchy(CounterRng& rng) {
  return std::tan(std::numbers::pi * (uniform_open(rng) - 0.5));
}

}  // namespace dpfed
