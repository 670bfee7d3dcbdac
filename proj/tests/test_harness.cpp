#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dpfed/harness.hpp"
#include "dpfed/rng.hpp"

using namespace dpfed;

namespace {

ExperimentConfig base_config() {
  ExperimentConfig c;
  c.experiment_id = "unit";
  c.besov = {0.75, kInf, kInf, 1.0};
  c.family = FamilyName::haar;
  c.servers.assign(4, ServerSpec{60, {0.5, 1e-4}});
  c.truth.seed = 3;
  c.truth.max_level = 10;
  c.reps = 30;
  c.seed = 99;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("dpfed_unit_" + name);
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(base_config().validate());
  auto c = base_config();
  c.reps = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = base_config();
  c.servers.clear();
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = base_config();
  c.servers[0].budget.delta = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.target = Target::point(0.5);
  CHECK_NOTHROW(c.validate());
  c.target = Target::point(1.5);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = base_config();
  c.servers[1].budget.eps = 20.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.eps_cap = 50.0;
  CHECK_NOTHROW(c.validate());
  c = base_config();
  for (auto& s : c.servers) s.budget.eps = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = base_config();
  c.truth.tree = CoeffTree(2, 4);
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = base_config();
  c.besov.alpha = 1.5;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_THROWS_AS(run_trial(c, 1), std::invalid_argument);
}

TEST_CASE("zero signal without noise has vanishing risk") {
  auto c = base_config();
  c.truth.tree = CoeffTree(0, 5);
  c.sigma = 0.0;
  c.eps_cap = 1e7;
  for (auto& s : c.servers) s.budget.eps = 1e6;
  CHECK(run_trial(c, 1) <= 1e-6);
  c.target = Target::point(0.3);
  CHECK(run_trial(c, 1) <= 1e-6);
}

TEST_CASE("trials are deterministic and nonnegative") {
  auto c = base_config();
  const auto e = Experiment::prepare(c);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const double r = run_trial(e, s);
    CHECK(r == run_trial(e, s));
    CHECK(r >= 0.0);
    CHECK(r >= e.truth.detail_energy_from(e.plan.L));
  }
  c.target = Target::point(0.5);
  c.besov.p = 4.0;
  const auto p = Experiment::prepare(c);
  for (std::uint64_t s = 0; s < 20; ++s) {
    CHECK(run_trial(p, s) >= 0.0);
    CHECK(run_trial(p, s) == run_trial(p, s));
  }
}

TEST_CASE("coefficient risk matches quadrature for haar") {
  auto c = base_config();
  c.truth.max_level = 9;
  const auto e = Experiment::prepare(c);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto est = estimate_global(e, s);
    CHECK(run_trial(e, s) == doctest::Approx(quadrature_imse(e.family, est, e.truth, 4096)).epsilon(1e-9));
  }
}

TEST_CASE("monte carlo reports") {
  auto c = base_config();
  c.reps = 1;
  const auto one = monte_carlo(c);
  CHECK(one.std_error == 0.0);
  CHECK(one.reps == 1);
  CHECK(one.mean_risk == run_trial(c, rep_seed(c.seed, 0)));

  c.reps = 200;
  const auto a = monte_carlo(c);
  const auto again = monte_carlo(c);
  CHECK(a.mean_risk == again.mean_risk);
  CHECK(a.std_error == again.std_error);
  CHECK(a.D == solve_resolution(c.besov.alpha, c.servers));
  CHECK(a.m == 4);
  CHECK(a.N == 240);
  CHECK(a.risk_kind() == "IMSE");
  CHECK(a.theory_rate == rate_from_D(a.D, a.gamma));
  CHECK(a.std_error > 0.0);

  c.reps = 400;
  const auto doubled = monte_carlo(c);
  CHECK(std::abs(doubled.mean_risk - a.mean_risk) <= 3.0 * a.std_error);
}

TEST_CASE("more data lowers the risk in the unconstrained regime") {
  auto c = base_config();
  c.eps_cap = 100.0;
  for (auto& s : c.servers) s = ServerSpec{50, {50.0, 1e-4}};
  c.reps = 100;
  const auto small = monte_carlo(c);
  for (auto& s : c.servers) s.n = 800;
  const auto large = monte_carlo(c);
  CHECK(large.mean_risk + 3.0 * large.std_error < small.mean_risk - 3.0 * small.std_error);
}

TEST_CASE("log-log fit") {
  const std::vector<double> x{10, 20, 40, 80, 160};
  for (double s : {0.2, 0.4286, 1.0}) {
    std::vector<double> r;
    for (double v : x) r.push_back(3.5 * std::pow(v, -s));
    const auto fit = fit_log_log(x, r);
    CHECK(fit.slope == doctest::Approx(-s).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(std::log(3.5)).epsilon(1e-12));
    CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit.points.size() == 5);
  }
  CounterRng rng(4);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> r;
    for (std::size_t k = 0; k < x.size(); ++k) r.push_back(uniform(rng, 0.1, 10));
    const auto fit = fit_log_log(x, r);
    CHECK(fit.r_squared >= 0.0);
    CHECK(fit.r_squared <= 1.0);
  }
  const std::vector<double> three{1, 2, 3};
  CHECK_THROWS_AS(fit_log_log(three, three), std::invalid_argument);
  const std::vector<double> bad{1, 2, 3, -4};
  CHECK_THROWS_AS(fit_log_log(std::vector<double>(x.begin(), x.begin() + 4), bad), std::invalid_argument);
}

TEST_CASE("sweep axes") {
  const auto c = base_config();
  const auto m = with_axis_value(c, SweepAxis::m, 7);
  CHECK(m.servers.size() == 7);
  CHECK(m.experiment_id == "unit/m=7");
  CHECK(with_axis_value(c, SweepAxis::n, 33).servers[2].n == 33);
  CHECK(with_axis_value(c, SweepAxis::eps, 0.25).servers[3].budget.eps == 0.25);
  CHECK_THROWS_AS(with_axis_value(c, SweepAxis::m, 2.5), std::invalid_argument);
  auto het = c;
  het.servers[1].n = 5;
  CHECK_THROWS_AS(with_axis_value(het, SweepAxis::m, 3), std::invalid_argument);
  CHECK(parse_sweep_axis("eps") == SweepAxis::eps);
  CHECK_THROWS_AS(parse_sweep_axis("delta"), std::invalid_argument);

  const std::vector<ServerSpec> priv(3, ServerSpec{50, {0.1, 1e-4}});
  CHECK(privacy_dominated(priv, solve_resolution(0.75, priv)));
  const std::vector<ServerSpec> samp(3, ServerSpec{50, {10.0, 1e-4}});
  CHECK_FALSE(privacy_dominated(samp, solve_resolution(0.75, samp)));
}

TEST_CASE("small rate sweep") {
  auto c = base_config();
  c.reps = 20;
  for (auto& s : c.servers) s.budget.eps = 0.05;
  const std::vector<double> ms{2, 4, 8, 16};
  const auto sweep = rate_sweep(c, SweepAxis::m, ms);
  CHECK(sweep.reports.size() == 4);
  CHECK(sweep.branch == "privacy");
  for (std::size_t i = 0; i < ms.size(); ++i) {
    CHECK(sweep.abscissa[i] == doctest::Approx(ms[i] * 60.0 * 60.0 * 0.0025));
    CHECK(sweep.reports[i].m == static_cast<std::size_t>(ms[i]));
  }
  CHECK(sweep.fit.slope < 0.0);
  c.eps_cap = 100.0;
  for (auto& s : c.servers) s.budget.eps = 50.0;
  const auto samp = rate_sweep(c, SweepAxis::m, ms);
  CHECK(samp.branch == "sampling");
  CHECK(samp.abscissa[3] == 16.0 * 60.0);
  CHECK_THROWS_AS(rate_sweep(c, SweepAxis::m, std::vector<double>{2, 4, 8}), std::invalid_argument);
}

TEST_CASE("csv output") {
  const auto empty = temp_path("empty.csv");
  emit_csv({}, empty);
  CHECK(slurp(empty) == csv_header() + "\n");

  auto c = base_config();
  c.reps = 5;
  const auto r = monte_carlo(c);
  const auto p1 = temp_path("a.csv"), p2 = temp_path("b.csv");
  emit_csv(std::vector<RiskReport>{r}, p1);
  emit_csv(std::vector<RiskReport>{monte_carlo(c)}, p2);
  CHECK(slurp(p1) == slurp(p2));
  CHECK(csv_header() == "experiment_id,target,m,N,gamma,D,L,tau,mean_risk,stderr,theory_rate,seed");

  std::istringstream rows(slurp(p1));
  std::string header, line;
  std::getline(rows, header);
  std::getline(rows, line);
  std::vector<std::string> cells;
  std::stringstream ls(line);
  for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
  REQUIRE(cells.size() == 12);
  CHECK(cells[0] == "unit");
  CHECK(cells[1] == "global");
  CHECK(std::stod(cells[5]) == r.D);
  CHECK(std::stoi(cells[6]) == r.L);
  CHECK(std::stod(cells[7]) == r.tau);
  CHECK(std::stod(cells[8]) == r.mean_risk);
  CHECK(std::stod(cells[9]) == r.std_error);
  CHECK(std::stod(cells[10]) == r.theory_rate);
  CHECK(std::stoull(cells[11]) == r.seed);

  CHECK_THROWS(emit_csv({}, "/nonexistent-dir/x.csv"));
  std::filesystem::remove(empty);
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("sensitivity grid") {
  for (auto f : {FamilyName::haar, FamilyName::daubechies2}) {
    const auto rows = sensitivity_grid(f, 100, 7);
    CHECK(rows.size() == 18);
    for (const auto& r : rows) {
      CHECK(r.l2_empirical > 0.0);
      CHECK(r.ratio() <= 1.0 + kSensitivityRoundoff);
    }
  }
}
