// Command-line front end: resolution solver, theoretical rates, Monte Carlo
// runs, rate sweeps and the sensitivity conformance check.

#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "dpfed/harness.hpp"
#include "dpfed/serialization.hpp"
#include "dpfed/theory.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kBadInput = 2;

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument(fmt::format("bad value '{}'", item));
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated differentially private wavelet regression simulator"};
  app.require_subcommand(1);

  double gamma = 0.0;
  std::string servers_path;
  auto* solve = app.add_subcommand("solve-d", "Solve the resolution equation for D");
  solve->add_option("--gamma", gamma, "Smoothness exponent")->required();
  solve->add_option("--servers", servers_path, "JSON list of {n, eps, delta}")->required();

  std::string mode = "global";
  double m = 1, n = 1, eps = 1, alpha = 1, p = dpfed::kInf;
  auto* rates = app.add_subcommand("rates", "Theoretical homogeneous rate");
  rates->add_option("--mode", mode)->check(CLI::IsMember({"global", "point"}));
  rates->add_option("--m", m)->required();
  rates->add_option("--n", n)->required();
  rates->add_option("--eps", eps)->required();
  rates->add_option("--alpha", alpha)->required();
  rates->add_option("--p", p);

  std::string config_path, out_path;
  auto* simulate = app.add_subcommand("simulate", "One Monte Carlo experiment");
  simulate->add_option("--config", config_path)->required();
  simulate->add_option("--out", out_path)->required();

  std::string axis, values;
  auto* sweep = app.add_subcommand("sweep", "Rate sweep with a log-log slope fit");
  sweep->add_option("--config", config_path)->required();
  sweep->add_option("--axis", axis)->required()->check(CLI::IsMember({"m", "n", "eps"}));
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--out", out_path)->required();

  std::string family = "haar";
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  auto* sens = app.add_subcommand("sens-test", "Empirical versus analytic sensitivity");
  sens->add_option("--family", family);
  sens->add_option("--trials", trials);
  sens->add_option("--seed", seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*solve) {
      const auto servers = dpfed::servers_from_json(dpfed::read_file(servers_path));
      fmt::print("{:.15g}\n", dpfed::solve_resolution(gamma, servers));
    } else if (*rates) {
      const double r = mode == "global" ? dpfed::rate_global_hom(m, n, eps, alpha)
                                        : dpfed::rate_point_hom(m, n, eps, alpha, p);
      fmt::print("{:.15g}\n", r);
    } else if (*simulate) {
      const auto config = dpfed::load_config(config_path);
      const auto report = dpfed::monte_carlo(config);
      dpfed::emit_csv(std::span(&report, 1), out_path);
      fmt::print("{} = {:.6g} (stderr {:.3g}, reps {}), theory rate {:.6g}\n", report.risk_kind(),
                 report.mean_risk, report.std_error, report.reps, report.theory_rate);
    } else if (*sweep) {
      const auto config = dpfed::load_config(config_path);
      const auto result =
          dpfed::rate_sweep(config, dpfed::parse_sweep_axis(axis), parse_values(values));
      dpfed::emit_csv(result.reports, out_path);
      const std::string fit_path = out_path + ".fit.csv";
      dpfed::emit_fit_csv(result, fit_path);
      fmt::print("slope {:.4f} intercept {:.4f} r^2 {:.4f} (branch {}, regime {})\n",
                 result.fit.slope, result.fit.intercept, result.fit.r_squared, result.branch,
                 dpfed::to_string(result.regime));
    } else if (*sens) {
      const auto rows = dpfed::sensitivity_grid(dpfed::parse_family_name(family), trials, seed);
      double worst = 0.0;
      for (const auto& r : rows) {
        fmt::print("L={} tau={} n={}: l2 {:.6g}/{:.6g} l1 {:.6g}/{:.6g}\n", r.L, r.tau, r.n,
                   r.l2_empirical, r.l2_bound, r.l1_empirical, r.l1_bound);
        worst = std::max(worst, r.ratio());
      }
      fmt::print("max ratio {:.15g}\n", worst);
      return worst > 1.0 + dpfed::kSensitivityRoundoff ? kFailure : kOk;
    }
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kBadInput;
  } catch (const std::domain_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kBadInput;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kFailure;
  }
  return kOk;
}
