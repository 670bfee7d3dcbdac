#include "dpfed/privacy.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "dpfed/rng.hpp"

namespace dpfed {

namespace {

void check_common(double tau, int L, std::size_t n, const WaveletFamily& family) {
  if (!(tau > 0.0)) throw std::invalid_argument("privacy: tau must be positive");
  if (n == 0) throw std::invalid_argument("privacy: n must be at least 1");
  if (L < family.base_level())
    throw std::invalid_argument(
        fmt::format("privacy: level {} below base level {}", L, family.base_level()));
}

}  // namespace

PrivacyBudget PrivacyBudget::make(double eps, double delta, double eps_cap) {
  if (!(eps >= 0.0)) throw std::invalid_argument("privacy budget: eps must be >= 0");
  if (eps > eps_cap)
    throw std::invalid_argument(fmt::format("privacy budget: eps = {} exceeds cap {}", eps, eps_cap));
  if (!(delta >= 0.0 && delta < 1.0))
    throw std::invalid_argument("privacy budget: delta must lie in [0, 1)");
  return PrivacyBudget{eps, delta};
}

double clip(double x, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("clip: tau must be positive");
  return x > tau ? tau : (x < -tau ? -tau : x);
}

double gaussian_constant(const WaveletFamily& family) {
  return 2.0 * std::sqrt(2.0) * std::sqrt(static_cast<double>(family.overlap_constant())) *
         family.sup_norm();
}

double laplace_constant(const WaveletFamily& family) {
  return 2.0 * family.overlap_constant() * family.sup_norm() * family.sup_norm();
}

double l2_sensitivity_bound(const WaveletFamily& family, double tau, int L, std::size_t n) {
  check_common(tau, L, n, family);
  return gaussian_constant(family) * tau * std::sqrt(std::exp2(L)) / static_cast<double>(n);
}

GaussCalibration calibrate_gaussian(const WaveletFamily& family, double tau, int L, std::size_t n,
                                    const PrivacyBudget& budget) {
  check_common(tau, L, n, family);
  if (!(budget.delta > 0.0))
    throw std::invalid_argument("gaussian mechanism needs delta > 0");
  if (!(budget.eps > 0.0)) throw std::invalid_argument("gaussian mechanism needs eps > 0");
  const double c = gaussian_constant(family);
  const double nd = static_cast<double>(n);
  GaussCalibration cal;
  cal.variance = 4.0 * tau * tau * std::exp2(L) * c * c * std::log(2.0 / budget.delta) /
                 (nd * nd * budget.eps * budget.eps);
  cal.sensitivity_l2 = l2_sensitivity_bound(family, tau, L, n);
  cal.budget = budget;
  return cal;
}

double l1_sensitivity_bound_point(const WaveletFamily& family, double tau, int L, std::size_t n) {
  check_common(tau, L, n, family);
  return laplace_constant(family) * tau * std::exp2(L) / static_cast<double>(n);
}

LapCalibration calibrate_laplace(const WaveletFamily& family, double tau, int L, std::size_t n,
                                 const PrivacyBudget& budget) {
  if (!(budget.eps > 0.0)) throw std::invalid_argument("laplace mechanism needs eps > 0");
  LapCalibration cal;
  cal.sensitivity_l1 = l1_sensitivity_bound_point(family, tau, L, n);
  cal.scale = cal.sensitivity_l1 / budget.eps;
  cal.budget = budget;
  return cal;
}

std::vector<double> add_gaussian(std::span<const double> values, const GaussCalibration& cal,
                                 std::uint64_t seed) {
  if (!(cal.variance > 0.0)) throw std::invalid_argument("add_gaussian: variance must be positive");
  CounterRng rng(seed);
  const double sd = std::sqrt(cal.variance);
  std::vector<double> out(values.begin(), values.end());
  for (double& v : out) v += sd * standard_normal(rng);
  return out;
}

double add_laplace(double x, const LapCalibration& cal, std::uint64_t seed) {
  if (!(cal.scale > 0.0)) throw std::invalid_argument("add_laplace: scale must be positive");
  CounterRng rng(seed);
  return x + laplace(rng, cal.scale);
}

double empirical_sensitivity(const Statistic& stat, std::size_t n, std::size_t trials,
                             std::uint64_t seed, double y_scale) {
  if (trials == 0) throw std::invalid_argument("empirical_sensitivity: trials must be >= 1");
  if (n == 0) throw std::invalid_argument("empirical_sensitivity: n must be >= 1");
  CounterRng rng(seed);
  double worst = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    RegressionSample z;
    z.sigma = 0.0;
    z.x.resize(n);
    z.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      z.x[i] = uniform(rng, 0.0, 1.0);
      z.y[i] = y_scale * cauchy(rng);
    }
    RegressionSample zn = z;
    const auto i = static_cast<std::size_t>(rng() % n);
    if (t % 2 == 1) zn.x[i] = uniform(rng, 0.0, 1.0);
    zn.y[i] = y_scale * cauchy(rng);
    const auto a = stat(z);
    const auto b = stat(zn);
    if (a.size() != b.size()) throw std::logic_error("empirical_sensitivity: statistic changed length");
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

}  // namespace dpfed
