#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "dpfed/coeff_tree.hpp"
#include "dpfed/wavelet.hpp"

namespace dpfed {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Besov ball B^{alpha,R}_{p,q}; p and q may be infinite.
struct BesovParams {
  double alpha = 1.0;
  double p = kInf;
  double q = kInf;
  double R = 1.0;

  /// Effective pointwise smoothness alpha - 1/p.
  double nu() const { return alpha - (std::isinf(p) ? 0.0 : 1.0 / p); }
  /// Throws std::invalid_argument unless alpha > 0, p >= 2, q >= 1, R > 0,
  /// nu >= 1/2 and alpha < A of `family`.
  void validate(const WaveletFamily& family) const;
};

struct RegressionSample {
  std::vector<double> x;
  std::vector<double> y;
  double sigma = 1.0;

  std::size_t size() const { return x.size(); }
};

enum class TruthStyle { uniform_decay, cosine_prior };
TruthStyle parse_truth_style(std::string_view s);
std::string to_string(TruthStyle s);

/// (sum_l (2^{l(alpha+1/2-1/p)} ||f_l.||_p)^q)^{1/q}, sup over levels when
/// q is infinite.  The father vector is the first term, weighted with l0.
double besov_norm(const CoeffTree& tree, const BesovParams& params);

/// Random member of the Besov ball with details up to `max_level`.
CoeffTree sample_besov(const BesovParams& params, const WaveletFamily& family, int max_level,
                       TruthStyle style, std::uint64_t seed);

/// Computable envelope sum_l 2^{l/2} ||psi||_inf c_A max_k |f_lk| >= ||f||_inf.
double sup_norm_bound(const CoeffTree& tree, const WaveletFamily& family);

/// Geometric-series constant c_alpha with sum_{l>L} sum_k f_lk^2 <= c_alpha 2^{-2 L alpha} R^2
/// over the ball when p >= 2.
double tail_constant(double alpha);

/// X_i ~ U[0,1], Y_i = f(X_i) + sigma xi_i.
RegressionSample generate_sample(const CoeffTree& tree, const WaveletFamily& family, std::size_t n,
                                 double sigma, std::uint64_t seed);

}  // namespace dpfed
