#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpfed/besov.hpp"
#include "dpfed/federation.hpp"
#include "dpfed/theory.hpp"
#include "dpfed/wavelet.hpp"

namespace dpfed {

/// How the true regression function is obtained.
struct TruthSpec {
  std::optional<CoeffTree> tree;  // explicit coefficients win over the generator
  TruthStyle style = TruthStyle::uniform_decay;
  std::uint64_t seed = 1;
  int max_level = 12;
};

struct ExperimentConfig {
  std::string experiment_id = "experiment";
  BesovParams besov;
  FamilyName family = FamilyName::haar;
  int cascade_depth = WaveletFamily::kDefaultCascadeDepth;
  double sigma = 1.0;
  std::vector<ServerSpec> servers;
  Target target;
  TruthSpec truth;
  std::size_t reps = 1;
  std::uint64_t seed = 0;
  /// Quadrature points for the IMSE cross-check; the reported global risk is
  /// computed in coefficient space.
  std::size_t risk_grid = 4096;
  double eps_cap = PrivacyBudget::kDefaultEpsCap;
  /// Upper bound on ||f||_inf used for tau; defaults to sup_norm_bound(truth).
  std::optional<double> envelope;

  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
};

/// A validated configuration with everything shared by the repetitions.
struct Experiment {
  ExperimentConfig config;
  WaveletFamily family;
  CoeffTree truth;
  ProtocolPlan plan;
  double truth_at_x0 = 0.0;

  static Experiment prepare(const ExperimentConfig& config);
};

/// One simulated protocol run; returns the squared error (global: exact
/// coefficient-space IMSE including the truncation tail; point: (f^(x0)-f(x0))^2).
double run_trial(const Experiment& experiment, std::uint64_t rep_seed);
double run_trial(const ExperimentConfig& config, std::uint64_t rep_seed);

/// The aggregated estimate of one run (global target only), for diagnostics.
CoeffTree estimate_global(const Experiment& experiment, std::uint64_t rep_seed);

/// Midpoint-rule IMSE of `estimate` against `truth` on `grid` points.
double quadrature_imse(const WaveletFamily& family, const CoeffTree& estimate,
                       const CoeffTree& truth, std::size_t grid);

struct RiskReport {
  std::string experiment_id;
  TargetKind target = TargetKind::global;
  std::size_t m = 0;
  std::size_t N = 0;
  double gamma = 0.0;
  double D = 0.0;
  int L = 0;
  double tau = 0.0;
  double mean_risk = 0.0;
  double std_error = 0.0;
  std::size_t reps = 0;
  double theory_rate = 1.0;
  std::uint64_t seed = 0;

  std::string risk_kind() const { return target == TargetKind::global ? "IMSE" : "pointwise-SE"; }
};

/// Seed of repetition `rep` of an experiment with master seed `seed`.
std::uint64_t rep_seed(std::uint64_t seed, std::size_t rep);

/// Mean and standard error over config.reps repetitions (run concurrently,
/// reduced in repetition order).
RiskReport monte_carlo(const ExperimentConfig& config);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<std::pair<double, double>> points;  // (log x, log risk)
};

/// Ordinary least squares of log(risk) on log(x); needs >= 4 positive points.
RateFit fit_log_log(std::span<const double> x, std::span<const double> risk);

enum class SweepAxis { m, n, eps };
SweepAxis parse_sweep_axis(std::string_view s);
std::string to_string(SweepAxis a);

struct SweepResult {
  std::vector<RiskReport> reports;
  std::vector<double> abscissa;
  /// "privacy" (x = sum n_j^2 eps_j^2) or "sampling" (x = N).
  std::string branch;
  Regime regime = Regime::mixed;
  RateFit fit;
};

/// Copy of `base` with the swept quantity set to `value`.  Sweeping m needs a
/// homogeneous base and replicates its first server.
ExperimentConfig with_axis_value(const ExperimentConfig& base, SweepAxis axis, double value);

/// Which side of min(n_j^2 eps_j^2, n_j D) dominates the resolution equation.
bool privacy_dominated(std::span<const ServerSpec> servers, double D);

SweepResult rate_sweep(const ExperimentConfig& base, SweepAxis axis, std::span<const double> values);

/// CSV with the fixed column order experiment_id, target, m, N, gamma, D, L,
/// tau, mean_risk, stderr, theory_rate, seed.  Doubles use 17 significant digits.
void emit_csv(std::span<const RiskReport> reports, const std::filesystem::path& path);
std::string csv_header();
std::string csv_row(const RiskReport& r);
/// slope, intercept, r_squared, branch, regime, points.
void emit_fit_csv(const SweepResult& sweep, const std::filesystem::path& path);

/// One cell of the sensitivity conformance grid: empirical worst-case change
/// of the clipped coefficients (L2) and of the point estimate at x0 = 0.5
/// (L1) against the analytic bounds.
struct SensitivityRow {
  FamilyName family = FamilyName::haar;
  int L = 0;
  double tau = 0.0;
  std::size_t n = 0;
  double l2_empirical = 0.0;
  double l2_bound = 0.0;
  double l1_empirical = 0.0;
  double l1_bound = 0.0;

  double ratio() const { return std::max(l2_empirical / l2_bound, l1_empirical / l1_bound); }
};

/// The Haar point bound is attained exactly, so comparisons allow rounding.
inline constexpr double kSensitivityRoundoff = 1e-12;

/// L in {2, 4, 6}, tau in {1, 5}, n in {1, 10, 100}, `trials` pairs each.
std::vector<SensitivityRow> sensitivity_grid(FamilyName family, std::size_t trials, std::uint64_t seed);

}  // namespace dpfed
