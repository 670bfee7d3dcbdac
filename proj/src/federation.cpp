#include "dpfed/federation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

namespace dpfed {

namespace {

void check_servers(std::span<const ServerSpec> servers) {
  if (servers.empty()) throw std::invalid_argument("server list is empty");
  for (const auto& s : servers) {
    if (s.n == 0) throw std::invalid_argument("server with n = 0");
    if (!(s.budget.eps >= 0.0)) throw std::invalid_argument("server with negative eps");
  }
}

void check_sample(const RegressionSample& data) {
  if (data.size() == 0) throw std::invalid_argument("empty sample");
  if (data.x.size() != data.y.size()) throw std::invalid_argument("sample x/y length mismatch");
}

void check_plan(const ProtocolPlan& plan, const WaveletFamily& family) {
  if (plan.l0 != family.base_level())
    throw std::invalid_argument("plan base level does not match the wavelet family");
  if (plan.L < plan.l0 || plan.L - 1 > family.max_level())
    throw std::invalid_argument(fmt::format("plan level {} outside family range", plan.L));
  if (!(plan.tau > 0.0)) throw std::invalid_argument("plan tau must be positive");
}

// Transcripts ordered by server id, with weights; rejects duplicates and
// missing positive-weight servers.
template <typename T>
std::vector<const T*> ordered_transcripts(std::span<const T> transcripts,
                                          std::span<const ServerSpec> servers,
                                          const std::vector<double>& u) {
  if (transcripts.empty()) throw std::invalid_argument("no transcripts to aggregate");
  std::vector<const T*> order;
  for (const auto& t : transcripts) {
    if (t.server_id() >= servers.size())
      throw std::invalid_argument(fmt::format("transcript from unknown server {}", t.server_id()));
    if (!t.plan().compatible(transcripts[0].plan()))
      throw std::invalid_argument("transcripts were produced under different plans");
    order.push_back(&t);
  }
  std::sort(order.begin(), order.end(),
            [](const T* a, const T* b) { return a->server_id() < b->server_id(); });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (order[i]->server_id() == order[i - 1]->server_id())
      throw std::invalid_argument(fmt::format("duplicate transcript from server {}", order[i]->server_id()));
  std::size_t next = 0;
  for (std::size_t j = 0; j < servers.size(); ++j) {
    const bool present = next < order.size() && order[next]->server_id() == j;
    if (present) ++next;
    if (!present && u[j] > 0.0)
      throw std::invalid_argument(fmt::format("missing transcript from server {}", j));
  }
  return order;
}

}  // namespace

double solve_resolution(double gamma, std::span<const ServerSpec> servers) {
  if (!(gamma > 0.0)) throw std::invalid_argument("solve_resolution: gamma must be positive");
  check_servers(servers);
  double active_n = 0.0, privacy_sum = 0.0, total_n = 0.0;
  for (const auto& s : servers) {
    const double n = static_cast<double>(s.n);
    total_n += n;
    if (s.budget.eps > 0.0) {
      active_n += n;
      privacy_sum += n * n * s.budget.eps * s.budget.eps;
    }
  }
  if (active_n == 0.0) return 0.0;

  // h(D) = D^{2g+1} - sum_j min(n_j^2 eps_j^2 / D, n_j) is increasing on
  // D > 0 with h(0+) < 0; its root is the positive solution.
  auto h = [&](double D) {
    double s = 0.0;
    for (const auto& srv : servers) {
      const double n = static_cast<double>(srv.n);
      const double e = srv.budget.eps;
      s += std::min(n * n * e * e / D, n);
    }
    return std::pow(D, 2.0 * gamma + 1.0) - s;
  };
  double lo = 0.0;
  double hi = std::pow(privacy_sum, 1.0 / (2.0 * gamma + 2.0)) +
              std::pow(total_n, 1.0 / (2.0 * gamma + 1.0)) + 1.0;
  // Bisect to full double resolution (well below the 1e-10 absolute target).
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (h(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

int level_from_resolution(double D, int l0) {
  if (!(D > 1.0)) return l0 + 1;
  return std::max(l0 + 1, static_cast<int>(std::ceil(std::log2(D))));
}

ProtocolPlan make_plan(const BesovParams& params, const WaveletFamily& family,
                       std::span<const ServerSpec> servers, const Target& target, double envelope) {
  params.validate(family);
  if (target.kind == TargetKind::point && !(target.x0 >= 0.0 && target.x0 <= 1.0))
    throw std::invalid_argument("point target outside [0,1]");
  if (!(envelope >= 0.0)) throw std::invalid_argument("sup-norm envelope must be >= 0");
  ProtocolPlan plan;
  plan.target = target;
  plan.l0 = family.base_level();
  plan.gamma = target.kind == TargetKind::global ? params.alpha : params.nu();
  plan.D = solve_resolution(plan.gamma, servers);
  plan.L = level_from_resolution(plan.D, plan.l0);
  const double slack = target.kind == TargetKind::global
                           ? (2.0 * params.alpha + 1.0) * plan.L
                           : 2.0 * (2.0 * params.nu() + 1.0) * plan.L;
  plan.tau = envelope + std::sqrt(slack);
  return plan;
}

CoeffTree local_coeffs(const RegressionSample& data, const WaveletFamily& family,
                       const ProtocolPlan& plan) {
  check_sample(data);
  check_plan(plan, family);
  CoeffTree tree(plan.l0, plan.L - 1);
  const double inv_n = 1.0 / static_cast<double>(data.size());
  auto father = tree.father();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double w = clip(data.y[i], plan.tau) * inv_n;
    if (w == 0.0) continue;
    const double x = data.x[i];
    const SupportSet fs = family.support_at(BasisKind::father, plan.l0, x);
    for (int s = 0; s < fs.size; ++s)
      father[static_cast<std::size_t>(fs.k[s])] += w * fs.value[s];
    for (int l = plan.l0; l < plan.L; ++l) {
      const SupportSet ms = family.support_at(BasisKind::mother, l, x);
      auto lvl = tree.level(l);
      for (int s = 0; s < ms.size; ++s) lvl[static_cast<std::size_t>(ms.k[s])] += w * ms.value[s];
    }
  }
  return tree;
}

GlobalTranscript make_global_transcript(const RegressionSample& data, const WaveletFamily& family,
                                        const ProtocolPlan& plan, const PrivacyBudget& budget,
                                        std::uint64_t seed, std::size_t server_id) {
  if (plan.target.kind != TargetKind::global)
    throw std::invalid_argument("global transcript requested under a point plan");
  const auto cal = calibrate_gaussian(family, plan.tau, plan.L, data.size(), budget);
  const auto coeffs = local_coeffs(data, family, plan).flatten();
  return GlobalTranscript(add_gaussian(coeffs, cal, seed), plan, server_id);
}

std::vector<double> aggregation_weights(std::span<const ServerSpec> servers, int L) {
  check_servers(servers);
  std::vector<double> v;
  v.reserve(servers.size());
  const double scale = std::exp2(L);
  for (const auto& s : servers) {
    const double n = static_cast<double>(s.n);
    v.push_back(std::min(n * n * s.budget.eps * s.budget.eps, n * scale));
  }
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("aggregation weights: every server has zero weight");
  for (double& x : v) x /= total;
  return v;
}

CoeffTree aggregate_global(std::span<const GlobalTranscript> transcripts,
                           std::span<const ServerSpec> servers) {
  if (transcripts.empty()) throw std::invalid_argument("no transcripts to aggregate");
  const ProtocolPlan& plan = transcripts[0].plan();
  const auto u = aggregation_weights(servers, plan.L);
  const auto order = ordered_transcripts(transcripts, servers, u);
  std::vector<double> sum(plan.dimension(), 0.0);
  for (const GlobalTranscript* t : order) {
    const auto& vals = t->noisy_coeffs();
    if (vals.size() != sum.size())
      throw std::invalid_argument("transcript length does not match its plan");
    const double w = u[t->server_id()];
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += w * vals[i];
  }
  return CoeffTree::from_flat(plan.l0, sum);
}

double local_point_estimate(const RegressionSample& data, const WaveletFamily& family,
                            const ProtocolPlan& plan) {
  check_sample(data);
  check_plan(plan, family);
  const double x0 = plan.target.x0;
  // Only the coefficients indexed by K_l(x0) enter the estimate.
  const SupportSet father0 = family.support_at(BasisKind::father, plan.l0, x0);
  std::vector<SupportSet> mother0;
  for (int l = plan.l0; l < plan.L; ++l) mother0.push_back(family.support_at(BasisKind::mother, l, x0));

  auto overlap = [](const SupportSet& at_x0, const SupportSet& at_x) {
    double s = 0.0;
    for (int a = 0; a < at_x0.size; ++a)
      for (int b = 0; b < at_x.size; ++b)
        if (at_x0.k[a] == at_x.k[b]) s += at_x0.value[a] * at_x.value[b];
    return s;
  };

  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double w = clip(data.y[i], plan.tau);
    if (w == 0.0) continue;
    const double x = data.x[i];
    double kernel = overlap(father0, family.support_at(BasisKind::father, plan.l0, x));
    for (int l = plan.l0; l < plan.L; ++l)
      kernel += overlap(mother0[static_cast<std::size_t>(l - plan.l0)],
                        family.support_at(BasisKind::mother, l, x));
    sum += w * kernel;
  }
  return sum / static_cast<double>(data.size());
}

PointTranscript make_point_transcript(const RegressionSample& data, const WaveletFamily& family,
                                      const ProtocolPlan& plan, const PrivacyBudget& budget,
                                      std::uint64_t seed, std::size_t server_id) {
  if (plan.target.kind != TargetKind::point)
    throw std::invalid_argument("point transcript requested under a global plan");
  const auto cal = calibrate_laplace(family, plan.tau, plan.L, data.size(), budget);
  return PointTranscript(add_laplace(local_point_estimate(data, family, plan), cal, seed), plan,
                         server_id);
}

double aggregate_point(std::span<const PointTranscript> transcripts,
                       std::span<const ServerSpec> servers) {
  if (transcripts.empty()) throw std::invalid_argument("no transcripts to aggregate");
  const auto u = aggregation_weights(servers, transcripts[0].plan().L);
  const auto order = ordered_transcripts(transcripts, servers, u);
  double sum = 0.0;
  for (const PointTranscript* t : order) sum += u[t->server_id()] * t->value();
  return sum;
}

}  // namespace dpfed
