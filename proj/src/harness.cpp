#include "dpfed/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "dpfed/rng.hpp"

namespace dpfed {

namespace {

// Runs body(i) for i in [0, count) on a small thread pool.  Callers write
// into slot i only, so the result never depends on scheduling.
template <typename Body>
void parallel_for(std::size_t count, Body&& body) {
  const std::size_t workers =
      std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void ExperimentConfig::validate() const {
  const auto fam = WaveletFamily::build(family, cascade_depth);
  besov.validate(fam);
  if (reps < 1) throw std::invalid_argument("config: reps must be >= 1");
  if (!(sigma >= 0.0)) throw std::invalid_argument("config: sigma must be >= 0");
  if (risk_grid < 1) throw std::invalid_argument("config: risk_grid must be >= 1");
  if (servers.empty()) throw std::invalid_argument("config: no servers");
  if (target.kind == TargetKind::point && !(target.x0 >= 0.0 && target.x0 <= 1.0))
    throw std::invalid_argument("config: x0 outside [0,1]");
  bool any_active = false;
  for (const auto& s : servers) {
    if (s.n == 0) throw std::invalid_argument("config: server with n = 0");
    PrivacyBudget::make(s.budget.eps, s.budget.delta, eps_cap);
    if (s.budget.eps > 0.0) {
      any_active = true;
      if (target.kind == TargetKind::global && !(s.budget.delta > 0.0))
        throw std::invalid_argument("config: the global protocol needs delta > 0 on every server");
    }
  }
  if (!any_active) throw std::invalid_argument("config: every server has eps = 0");
  if (truth.tree) {
    if (truth.tree->l0() != fam.base_level())
      throw std::invalid_argument("config: truth tree base level does not match the family");
  } else if (truth.max_level < fam.base_level() || truth.max_level > fam.max_level()) {
    throw std::invalid_argument("config: truth max_level outside the family range");
  }
  if (envelope && !(*envelope >= 0.0)) throw std::invalid_argument("config: envelope must be >= 0");
}

Experiment Experiment::prepare(const ExperimentConfig& config) {
  config.validate();
  Experiment e{config, WaveletFamily::build(config.family, config.cascade_depth), {}, {}, 0.0};
  e.truth = config.truth.tree ? *config.truth.tree
                              : sample_besov(config.besov, e.family, config.truth.max_level,
                                             config.truth.style, config.truth.seed);
  const double envelope = config.envelope.value_or(sup_norm_bound(e.truth, e.family));
  e.plan = make_plan(config.besov, e.family, config.servers, config.target, envelope);
  if (config.target.kind == TargetKind::point)
    e.truth_at_x0 = e.family.synthesize(e.truth, config.target.x0);
  return e;
}

CoeffTree estimate_global(const Experiment& e, std::uint64_t seed) {
  const auto& servers = e.config.servers;
  const auto u = aggregation_weights(servers, e.plan.L);
  std::vector<GlobalTranscript> transcripts;
  for (std::size_t j = 0; j < servers.size(); ++j) {
    if (u[j] == 0.0) continue;
    const auto data = generate_sample(e.truth, e.family, servers[j].n, e.config.sigma,
                                      derive_seed(seed, 2 * j));
    transcripts.push_back(make_global_transcript(data, e.family, e.plan, servers[j].budget,
                                                 derive_seed(seed, 2 * j + 1), j));
  }
  return aggregate_global(transcripts, servers);
}

double run_trial(const Experiment& e, std::uint64_t seed) {
  const auto& servers = e.config.servers;
  if (e.plan.target.kind == TargetKind::global) {
    const CoeffTree est = estimate_global(e, seed);
    double err = 0.0;
    const auto f0 = e.truth.father();
    const auto g0 = est.father();
    for (std::size_t k = 0; k < g0.size(); ++k) err += (g0[k] - f0[k]) * (g0[k] - f0[k]);
    for (int l = est.l0(); l <= est.top_level(); ++l) {
      const auto g = est.level(l);
      if (l <= e.truth.top_level()) {
        const auto f = e.truth.level(l);
        for (std::size_t k = 0; k < g.size(); ++k) err += (g[k] - f[k]) * (g[k] - f[k]);
      } else {
        for (double v : g) err += v * v;
      }
    }
    return err + e.truth.detail_energy_from(e.plan.L);
  }
  const auto u = aggregation_weights(servers, e.plan.L);
  std::vector<PointTranscript> transcripts;
  for (std::size_t j = 0; j < servers.size(); ++j) {
    if (u[j] == 0.0) continue;
    const auto data = generate_sample(e.truth, e.family, servers[j].n, e.config.sigma,
                                      derive_seed(seed, 2 * j));
    transcripts.push_back(make_point_transcript(data, e.family, e.plan, servers[j].budget,
                                                derive_seed(seed, 2 * j + 1), j));
  }
  const double diff = aggregate_point(transcripts, servers) - e.truth_at_x0;
  return diff * diff;
}

double run_trial(const ExperimentConfig& config, std::uint64_t seed) {
  return run_trial(Experiment::prepare(config), seed);
}

double quadrature_imse(const WaveletFamily& family, const CoeffTree& estimate,
                       const CoeffTree& truth, std::size_t grid) {
  if (grid == 0) throw std::invalid_argument("quadrature_imse: empty grid");
  double s = 0.0;
  for (std::size_t i = 0; i < grid; ++i) {
    const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(grid);
    const double d = family.synthesize(estimate, x) - family.synthesize(truth, x);
    s += d * d;
  }
  return s / static_cast<double>(grid);
}

std::uint64_t rep_seed(std::uint64_t seed, std::size_t rep) { return derive_seed(seed, rep); }

RiskReport monte_carlo(const ExperimentConfig& config) {
  const Experiment e = Experiment::prepare(config);
  std::vector<double> risks(config.reps, 0.0);
  parallel_for(config.reps, [&](std::size_t i) { risks[i] = run_trial(e, rep_seed(config.seed, i)); });

  RiskReport r;
  r.experiment_id = config.experiment_id;
  r.target = config.target.kind;
  r.m = config.servers.size();
  for (const auto& s : config.servers) r.N += s.n;
  r.gamma = e.plan.gamma;
  r.D = e.plan.D;
  r.L = e.plan.L;
  r.tau = e.plan.tau;
  r.reps = config.reps;
  r.seed = config.seed;
  r.theory_rate = rate_from_D(e.plan.D, e.plan.gamma);
  double sum = 0.0;
  for (double v : risks) sum += v;
  r.mean_risk = sum / static_cast<double>(risks.size());
  if (risks.size() > 1) {
    double ss = 0.0;
    for (double v : risks) ss += (v - r.mean_risk) * (v - r.mean_risk);
    const double var = ss / static_cast<double>(risks.size() - 1);
    r.std_error = std::sqrt(var / static_cast<double>(risks.size()));
  }
  return r;
}

RateFit fit_log_log(std::span<const double> x, std::span<const double> risk) {
  if (x.size() != risk.size()) throw std::invalid_argument("fit_log_log: length mismatch");
  if (x.size() < 4) throw std::invalid_argument("fit_log_log: need at least 4 points");
  RateFit fit;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && risk[i] > 0.0))
      throw std::invalid_argument("fit_log_log: abscissa and risks must be positive");
    fit.points.emplace_back(std::log(x[i]), std::log(risk[i]));
    mx += fit.points.back().first;
    my += fit.points.back().second;
  }
  const double n = static_cast<double>(x.size());
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [lx, ly] : fit.points) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
    syy += (ly - my) * (ly - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_log_log: abscissa values are all equal");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (const auto& [lx, ly] : fit.points) {
    const double r = ly - (fit.intercept + fit.slope * lx);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

SweepAxis parse_sweep_axis(std::string_view s) {
  if (s == "m") return SweepAxis::m;
  if (s == "n") return SweepAxis::n;
  if (s == "eps") return SweepAxis::eps;
  throw std::invalid_argument(fmt::format("unknown sweep axis '{}'", s));
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::m: return "m";
    case SweepAxis::n: return "n";
    case SweepAxis::eps: return "eps";
  }
  return "?";
}

ExperimentConfig with_axis_value(const ExperimentConfig& base, SweepAxis axis, double value) {
  ExperimentConfig c = base;
  c.experiment_id = fmt::format("{}/{}={}", base.experiment_id, to_string(axis), value);
  switch (axis) {
    case SweepAxis::m: {
      if (!(value >= 1.0) || value != std::floor(value))
        throw std::invalid_argument("sweep: m values must be positive integers");
      const auto& first = base.servers.at(0);
      for (const auto& s : base.servers)
        if (s.n != first.n || s.budget.eps != first.budget.eps || s.budget.delta != first.budget.delta)
          throw std::invalid_argument("sweep over m needs homogeneous servers");
      c.servers.assign(static_cast<std::size_t>(value), first);
      break;
    }
    case SweepAxis::n: {
      if (!(value >= 1.0) || value != std::floor(value))
        throw std::invalid_argument("sweep: n values must be positive integers");
      for (auto& s : c.servers) s.n = static_cast<std::size_t>(value);
      break;
    }
    case SweepAxis::eps:
      for (auto& s : c.servers) s.budget.eps = value;
      break;
  }
  return c;
}

bool privacy_dominated(std::span<const ServerSpec> servers, double D) {
  double privacy = 0.0, sampling = 0.0;
  for (const auto& s : servers) {
    const double n = static_cast<double>(s.n);
    const double a = n * n * s.budget.eps * s.budget.eps;
    const double b = n * D;
    (a <= b ? privacy : sampling) += std::min(a, b);
  }
  return privacy >= sampling;
}

SweepResult rate_sweep(const ExperimentConfig& base, SweepAxis axis, std::span<const double> values) {
  if (values.size() < 4) throw std::invalid_argument("rate_sweep: need at least 4 values");
  SweepResult out;
  std::vector<ExperimentConfig> configs;
  for (double v : values) configs.push_back(with_axis_value(base, axis, v));
  for (const auto& c : configs) out.reports.push_back(monte_carlo(c));

  // One branch for the whole sweep, by majority over the points.
  std::size_t privacy_votes = 0;
  for (std::size_t i = 0; i < configs.size(); ++i)
    if (privacy_dominated(configs[i].servers, out.reports[i].D)) ++privacy_votes;
  const bool privacy = 2 * privacy_votes >= configs.size();
  out.branch = privacy ? "privacy" : "sampling";
  const std::size_t mid = configs.size() / 2;
  out.regime = classify_regime(configs[mid].servers, out.reports[mid].gamma).regime;

  std::vector<double> risks;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    double x = 0.0;
    for (const auto& s : configs[i].servers) {
      const double n = static_cast<double>(s.n);
      x += privacy ? n * n * s.budget.eps * s.budget.eps : n;
    }
    out.abscissa.push_back(x);
    risks.push_back(out.reports[i].mean_risk);
  }
  out.fit = fit_log_log(out.abscissa, risks);
  return out;
}

std::string csv_header() {
  return "experiment_id,target,m,N,gamma,D,L,tau,mean_risk,stderr,theory_rate,seed";
}

std::string csv_row(const RiskReport& r) {
  return fmt::format("{},{},{},{},{:.17g},{:.17g},{},{:.17g},{:.17g},{:.17g},{:.17g},{}",
                     csv_field(r.experiment_id),
                     r.target == TargetKind::global ? "global" : "point", r.m, r.N, r.gamma, r.D,
                     r.L, r.tau, r.mean_risk, r.std_error, r.theory_rate, r.seed);
}

void emit_csv(std::span<const RiskReport> reports, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << csv_header() << '\n';
  for (const auto& r : reports) out << csv_row(r) << '\n';
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

void emit_fit_csv(const SweepResult& sweep, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << "slope,intercept,r_squared,branch,regime,points\n";
  out << fmt::format("{:.17g},{:.17g},{:.17g},{},{},{}\n", sweep.fit.slope, sweep.fit.intercept,
                     sweep.fit.r_squared, sweep.branch, to_string(sweep.regime),
                     sweep.fit.points.size());
  if (!out) throw std::runtime_error(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace dpfed

namespace dpfed {

std::vector<SensitivityRow> sensitivity_grid(FamilyName name, std::size_t trials, std::uint64_t seed) {
  const auto family = WaveletFamily::build(name);
  struct Cell {
    int L;
    double tau;
    std::size_t n;
  };
  std::vector<Cell> cells;
  for (int L : {2, 4, 6})
    for (double tau : {1.0, 5.0})
      for (std::size_t n : {1u, 10u, 100u}) cells.push_back({L, tau, n});

  std::vector<SensitivityRow> rows(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    const auto [L, tau, n] = cells[i];
    ProtocolPlan plan;
    plan.L = L;
    plan.tau = tau;
    plan.l0 = family.base_level();
    plan.target = Target::point(0.5);
    const std::uint64_t cell_seed = derive_seed(seed, i);
    SensitivityRow& r = rows[i];
    r.family = name;
    r.L = L;
    r.tau = tau;
    r.n = n;
    r.l2_bound = l2_sensitivity_bound(family, tau, L, n);
    r.l1_bound = l1_sensitivity_bound_point(family, tau, L, n);
    r.l2_empirical = empirical_sensitivity(
        [&](const RegressionSample& z) { return local_coeffs(z, family, plan).flatten(); }, n,
        trials, derive_seed(cell_seed, 0));
    r.l1_empirical = empirical_sensitivity(
        [&](const RegressionSample& z) {
          return std::vector<double>{local_point_estimate(z, family, plan)};
        },
        n, trials, derive_seed(cell_seed, 1));
  });
  return rows;
}

}  // namespace dpfed
