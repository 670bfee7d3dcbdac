#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dpfed/besov.hpp"
#include "dpfed/wavelet.hpp"

namespace dpfed {

/// Per-server (eps, delta) budget.
struct PrivacyBudget {
  static constexpr double kDefaultEpsCap = 10.0;

  double eps = 1.0;
  double delta = 0.0;

  /// Validated budget: 0 <= eps <= eps_cap, 0 <= delta < 1.  eps = 0 is
  /// admitted for servers that release nothing useful.
  static PrivacyBudget make(double eps, double delta, double eps_cap = kDefaultEpsCap);
};

struct GaussCalibration {
  double variance = 0.0;
  double sensitivity_l2 = 0.0;
  PrivacyBudget budget;
};

struct LapCalibration {
  double scale = 0.0;
  double sensitivity_l1 = 0.0;
  PrivacyBudget budget;
};

/// [x]_tau: projection onto [-tau, tau].
double clip(double x, double tau);

/// c_psi = 2 sqrt2 sqrt(c_A) ||psi||_inf.
double gaussian_constant(const WaveletFamily& family);
/// c'_psi = 2 c_A ||psi||_inf^2.
double laplace_constant(const WaveletFamily& family);

/// Bound c_psi tau sqrt(2^L) / n on the L2 distance between the clipped
/// coefficient vectors of two neighbouring samples.
double l2_sensitivity_bound(const WaveletFamily& family, double tau, int L, std::size_t n);

/// variance = 4 tau^2 2^L c_psi^2 log(2/delta) / (n^2 eps^2).
GaussCalibration calibrate_gaussian(const WaveletFamily& family, double tau, int L, std::size_t n,
                                    const PrivacyBudget& budget);

/// Bound c'_psi tau 2^L / n on the change of the local point estimate.
double l1_sensitivity_bound_point(const WaveletFamily& family, double tau, int L, std::size_t n);

/// Laplace scale b = l1 bound / eps; (eps, 0)-DP.
LapCalibration calibrate_laplace(const WaveletFamily& family, double tau, int L, std::size_t n,
                                 const PrivacyBudget& budget);

std::vector<double> add_gaussian(std::span<const double> values, const GaussCalibration& cal,
                                 std::uint64_t seed);
double add_laplace(double x, const LapCalibration& cal, std::uint64_t seed);

/// A statistic of one server's data.
using Statistic = std::function<std::vector<double>(const RegressionSample&)>;

/// Largest Euclidean change of `stat` observed over `trials` random pairs of
/// neighbouring samples of size n.  Responses are Cauchy distributed with
/// scale `y_scale` so clipping is exercised; half the pairs replace only the
/// response of the changed datum, the other half redraw its design point too.
double empirical_sensitivity(const Statistic& stat, std::size_t n, std::size_t trials,
                             std::uint64_t seed, double y_scale = 3.0);

}  // namespace dpfed
