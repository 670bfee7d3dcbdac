#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dpfed/besov.hpp"
#include "dpfed/coeff_tree.hpp"
#include "dpfed/privacy.hpp"
#include "dpfed/wavelet.hpp"

namespace dpfed {

enum class TargetKind { global, point };

struct Target {
  TargetKind kind = TargetKind::global;
  double x0 = 0.5;

  static Target global() { return {TargetKind::global, 0.5}; }
  static Target point(double x0) { return {TargetKind::point, x0}; }
  friend bool operator==(const Target&, const Target&) = default;
};

struct ServerSpec {
  std::size_t n = 1;
  PrivacyBudget budget;
};

/// Resolution, truncation level and clipping threshold shared by all servers.
struct ProtocolPlan {
  double gamma = 0.0;
  double D = 0.0;
  int L = 1;
  double tau = 1.0;
  Target target;
  int l0 = 0;

  /// Number of coefficients a server estimates: the span V_L has dimension 2^L.
  std::size_t dimension() const { return std::size_t{1} << L; }
  /// Fields that servers and the aggregator must agree on.
  bool compatible(const ProtocolPlan& other) const {
    return L == other.L && tau == other.tau && target == other.target && l0 == other.l0;
  }
};

struct TranscriptCodec;

/// Privatized coefficient vector of one server.  Only make_global_transcript
/// (and decoding of an already released message) can create one.
class GlobalTranscript {
 public:
  const std::vector<double>& noisy_coeffs() const { return values_; }
  const ProtocolPlan& plan() const { return plan_; }
  std::size_t server_id() const { return server_; }

 private:
  GlobalTranscript(std::vector<double> values, ProtocolPlan plan, std::size_t server)
      : values_(std::move(values)), plan_(plan), server_(server) {}
  friend GlobalTranscript make_global_transcript(const RegressionSample&, const WaveletFamily&,
                                                 const ProtocolPlan&, const PrivacyBudget&,
                                                 std::uint64_t, std::size_t);
  friend struct TranscriptCodec;

  std::vector<double> values_;
  ProtocolPlan plan_;
  std::size_t server_ = 0;
};

/// Privatized point estimate of one server.
class PointTranscript {
 public:
  double value() const { return value_; }
  const ProtocolPlan& plan() const { return plan_; }
  std::size_t server_id() const { return server_; }

 private:
  PointTranscript(double value, ProtocolPlan plan, std::size_t server)
      : value_(value), plan_(plan), server_(server) {}
  friend PointTranscript make_point_transcript(const RegressionSample&, const WaveletFamily&,
                                               const ProtocolPlan&, const PrivacyBudget&,
                                               std::uint64_t, std::size_t);
  friend struct TranscriptCodec;

  double value_ = 0.0;
  ProtocolPlan plan_;
  std::size_t server_ = 0;
};

/// Unique D >= 0 with D^{2 gamma + 2} = sum_j min(n_j^2 eps_j^2, n_j D).
double solve_resolution(double gamma, std::span<const ServerSpec> servers);

/// L = max(l0 + 1, ceil(log2 D)) (l0 + 1 when D <= 1).
int level_from_resolution(double D, int l0);

/// Plan for `target`: gamma = alpha (global) or nu (point), D from
/// solve_resolution, tau = envelope + sqrt((2 alpha + 1) L) for global and
/// envelope + sqrt(2 (2 nu + 1) L) for point targets.  `envelope` is an
/// upper bound on ||f||_inf over the truth class.
ProtocolPlan make_plan(const BesovParams& params, const WaveletFamily& family,
                       std::span<const ServerSpec> servers, const Target& target, double envelope);

/// Clipped empirical coefficients (1/n) sum_i [Y_i]_tau psi_lk(X_i) of V_L.
CoeffTree local_coeffs(const RegressionSample& data, const WaveletFamily& family,
                       const ProtocolPlan& plan);

GlobalTranscript make_global_transcript(const RegressionSample& data, const WaveletFamily& family,
                                        const ProtocolPlan& plan, const PrivacyBudget& budget,
                                        std::uint64_t seed, std::size_t server_id = 0);

/// u_j = v_j / sum v, v_j = min(n_j^2 eps_j^2, n_j 2^L).
std::vector<double> aggregation_weights(std::span<const ServerSpec> servers, int L);

/// Weighted coefficient tree sum_j u_j T^(j).  Servers with zero weight may
/// be absent; every server with positive weight must send exactly one transcript.
CoeffTree aggregate_global(std::span<const GlobalTranscript> transcripts,
                           std::span<const ServerSpec> servers);

/// The local estimator of V_L evaluated at plan.target.x0.
double local_point_estimate(const RegressionSample& data, const WaveletFamily& family,
                            const ProtocolPlan& plan);

PointTranscript make_point_transcript(const RegressionSample& data, const WaveletFamily& family,
                                      const ProtocolPlan& plan, const PrivacyBudget& budget,
                                      std::uint64_t seed, std::size_t server_id = 0);

double aggregate_point(std::span<const PointTranscript> transcripts,
                       std::span<const ServerSpec> servers);

}  // namespace dpfed
