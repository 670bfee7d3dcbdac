#include "dpfed/besov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "dpfed/rng.hpp"

namespace dpfed {

namespace {

double lp_norm(std::span<const double> v, double p) {
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return std::pow(s, 1.0 / p);
}

// Draw from the density proportional to cos^2(pi t / 2) on [-1, 1] by
// rejection from the uniform proposal.
double draw_cosine_squared(CounterRng& rng) {
  for (;;) {
    const double t = uniform(rng, -1.0, 1.0);
    const double c = std::cos(std::numbers::pi * t / 2.0);
    if (uniform_open(rng) <= c * c) return t;
  }
}

}  // namespace

void BesovParams::validate(const WaveletFamily& family) const {
  if (!(alpha > 0.0)) throw std::invalid_argument("besov: alpha must be positive");
  if (!(p >= 2.0)) throw std::invalid_argument("besov: p must be >= 2");
  if (!(q >= 1.0)) throw std::invalid_argument("besov: q must be >= 1");
  if (!(R > 0.0)) throw std::invalid_argument("besov: R must be positive");
  if (nu() < 0.5)
    throw std::invalid_argument(fmt::format("besov: nu = alpha - 1/p = {} below 1/2", nu()));
  if (!(alpha < family.vanishing_moments()))
    throw std::invalid_argument(fmt::format("besov: alpha = {} not below A = {} of {}", alpha,
                                            family.vanishing_moments(), to_string(family.name())));
}

TruthStyle parse_truth_style(std::string_view s) {
  if (s == "uniform-decay") return TruthStyle::uniform_decay;
  if (s == "cosine-prior") return TruthStyle::cosine_prior;
  throw std::invalid_argument(fmt::format("unknown truth style '{}'", s));
}

std::string to_string(TruthStyle s) {
  return s == TruthStyle::uniform_decay ? "uniform-decay" : "cosine-prior";
}

double besov_norm(const CoeffTree& tree, const BesovParams& params) {
  if (!tree.has_coefficients()) return 0.0;
  const double inv_p = std::isinf(params.p) ? 0.0 : 1.0 / params.p;
  const double expo = params.alpha + 0.5 - inv_p;
  std::vector<double> terms;
  terms.push_back(std::exp2(tree.l0() * expo) * lp_norm(tree.father(), params.p));
  for (int l = tree.l0(); l <= tree.top_level(); ++l)
    terms.push_back(std::exp2(l * expo) * lp_norm(tree.level(l), params.p));
  return lp_norm(terms, params.q);
}

CoeffTree sample_besov(const BesovParams& params, const WaveletFamily& family, int max_level,
                       TruthStyle style, std::uint64_t seed) {
  const int l0 = family.base_level();
  if (max_level < l0 || max_level > family.max_level())
    throw std::invalid_argument(fmt::format("sample_besov: max level {} outside [{}, {}]", max_level,
                                            l0, family.max_level()));
  CounterRng rng(seed);
  CoeffTree tree(l0, max_level);
  const double decay = params.alpha + 0.5;
  if (style == TruthStyle::cosine_prior) {
    const double half_width = std::exp2(-max_level * decay) * params.R;
    for (double& v : tree.level(max_level)) v = half_width * draw_cosine_squared(rng);
    // Keeps the draw inside the ball when p < infinity inflates the level norm.
    const double norm = besov_norm(tree, params);
    return norm > params.R ? tree.scaled(params.R / norm) : tree;
  }
  for (double& v : tree.father()) v = uniform(rng, -1.0, 1.0) * std::exp2(-l0 * decay);
  for (int l = l0; l <= max_level; ++l)
    for (double& v : tree.level(l)) v = uniform(rng, -1.0, 1.0) * std::exp2(-l * decay);
  const double norm = besov_norm(tree, params);
  if (norm == 0.0) return tree;
  return tree.scaled(0.9 * params.R / norm);
}

double sup_norm_bound(const CoeffTree& tree, const WaveletFamily& family) {
  if (!tree.has_coefficients()) return 0.0;
  const double c = family.sup_norm() * family.overlap_constant();
  auto max_abs = [](std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  double bound = std::exp2(0.5 * tree.l0()) * c * max_abs(tree.father());
  for (int l = tree.l0(); l <= tree.top_level(); ++l)
    bound += std::exp2(0.5 * l) * c * max_abs(tree.level(l));
  return bound;
}

double tail_constant(double alpha) { return 1.0 / (std::exp2(2.0 * alpha) - 1.0); }

RegressionSample generate_sample(const CoeffTree& tree, const WaveletFamily& family, std::size_t n,
                                 double sigma, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("generate_sample: n must be at least 1");
  if (!(sigma >= 0.0)) throw std::invalid_argument("generate_sample: sigma must be >= 0");
  CounterRng rng(seed);
  RegressionSample s;
  s.sigma = sigma;
  s.x.resize(n);
  s.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = uniform(rng, 0.0, 1.0);
    s.x[i] = x;
    s.y[i] = family.synthesize(tree, x) + sigma * standard_normal(rng);
  }
  return s;
}

}  // namespace dpfed
