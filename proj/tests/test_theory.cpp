#include <doctest.h>

#include <cmath>
#include <vector>

#include "dpfed/rng.hpp"
#include "dpfed/theory.hpp"

using namespace dpfed;

namespace {

double log_uniform(CounterRng& rng, double a, double b) {
  return std::exp(uniform(rng, std::log(a), std::log(b)));
}

}  // namespace

TEST_CASE("rate from D") {
  CHECK(rate_from_D(0.0, 0.75) == 1.0);
  CHECK(rate_from_D(1.0, 0.75) == 1.0);
  CHECK(rate_from_D(0.3, 0.75) == 1.0);
  CHECK(rate_from_D(39.81, 0.75) == doctest::Approx(3.98e-3).epsilon(1e-3));
  CHECK_THROWS_AS(rate_from_D(-1.0, 0.75), std::invalid_argument);
}

TEST_CASE("homogeneous rates") {
  CHECK(rate_global_hom(10, 100, 1, 1) == doctest::Approx(std::pow(1e5, -0.5) + 0.01).epsilon(1e-12));
  CHECK(rate_global_hom(10, 100, 1, 1) == doctest::Approx(0.01316).epsilon(1e-3));
  CHECK(rate_global_hom(10, 100, 1e8, 1) == doctest::Approx(std::pow(1e3, -2.0 / 3.0)).epsilon(1e-6));
  CHECK(rate_global_hom(10, 100, 1.0 / (std::sqrt(10.0) * 100.0) / 10.0, 1) == 1.0);
  CHECK(rate_point_hom(10, 100, 0.3, 0.9, kInf) == rate_global_hom(10, 100, 0.3, 0.9));
  CHECK(rate_point_hom(10, 100, 1, 1, 2) == doctest::Approx(std::pow(1e5, -1.0 / 3.0) + std::pow(1e3, -0.5)).epsilon(1e-12));
  CHECK(rate_point_hom(10, 100, 1, 1, 2) == doctest::Approx(0.05316).epsilon(1e-3));
  CHECK_THROWS_AS(rate_point_hom(10, 100, 1, 0.9, 2), std::invalid_argument);
  CHECK_THROWS_AS(rate_global_hom(10, 100, 0, 1), std::invalid_argument);
}

TEST_CASE("homogeneous rates are monotone") {
  CounterRng rng(3);
  for (int i = 0; i < 500; ++i) {
    const double m = std::floor(log_uniform(rng, 1, 1e3)), n = std::floor(log_uniform(rng, 1, 1e4));
    const double e = log_uniform(rng, 1e-3, 10), a = uniform(rng, 0.5, 3);
    const double r = rate_global_hom(m, n, e, a);
    CHECK(rate_global_hom(m + 1, n, e, a) <= r);
    CHECK(rate_global_hom(m, n + 1, e, a) <= r);
    CHECK(rate_global_hom(m, n, e * 1.5, a) <= r);
    const double p = uniform(rng, 2, 20);
    if (a - 1 / p < 0.5) continue;
    const double q = rate_point_hom(m, n, e, a, p);
    CHECK(rate_point_hom(m * 2, n, e, a, p) <= q);
    CHECK(rate_point_hom(m, n * 2, e, a, p) <= q);
    CHECK(rate_point_hom(m, n, e * 2, a, p) <= q);
  }
}

TEST_CASE("regime examples") {
  const std::vector<ServerSpec> hom(100, ServerSpec{10, {0.1, 1e-6}});
  CHECK(classify_regime(hom, 0.75).regime == Regime::no_dominant);

  std::vector<ServerSpec> one_big(10, ServerSpec{10, {0.01, 1e-6}});
  one_big.insert(one_big.begin() + 4, ServerSpec{1000000, {1.0, 1e-6}});
  const auto r = classify_regime(one_big, 0.75);
  CHECK(r.regime == Regime::dominant);
  CHECK(r.dominant_server == 4u);

  const std::vector<ServerSpec> single{{50, {0.5, 1e-6}}};
  CHECK(classify_regime(single, 0.75).regime == Regime::dominant);
  CHECK(to_string(Regime::no_dominant) == "no-dominant");
  CHECK_THROWS_AS(classify_regime({}, 0.75), std::invalid_argument);
}

TEST_CASE("delta side conditions") {
  const std::vector<ServerSpec> strict(4, ServerSpec{100, {0.1, 1e-9}});
  const auto ok = classify_regime(strict, 0.75);
  REQUIRE(ok.regime == Regime::no_dominant);
  CHECK(ok.delta_condition_ok);
  const std::vector<ServerSpec> loose(4, ServerSpec{100, {0.1, 0.1}});
  CHECK_FALSE(classify_regime(loose, 0.75).delta_condition_ok);
}

TEST_CASE("regimes agree with the resolution equation") {
  CounterRng rng(77);
  int no_dom = 0, dom = 0;
  for (int i = 0; i < 1500; ++i) {
    const double gamma = uniform(rng, 0.5, 2.5);
    const int m = 2 + static_cast<int>(rng() % 19);
    std::vector<ServerSpec> s;
    for (int j = 0; j < m; ++j) {
      std::size_t n;
      double e;
      if (i % 2 == 0) {
        n = static_cast<std::size_t>(log_uniform(rng, 50, 5000));
        e = log_uniform(rng, 1e-3, 0.05);
      } else {
        n = static_cast<std::size_t>(log_uniform(rng, 1, 1e5));
        e = log_uniform(rng, 1e-3, 10);
      }
      s.push_back({n, {e, 1e-6}});
    }
    const auto r = classify_regime(s, gamma);
    CHECK(r.rate == rate_from_D(r.D, gamma));
    if (r.regime == Regime::no_dominant) {
      ++no_dom;
      CHECK(r.rate == doctest::Approx(no_dominant_rate(s, gamma)).epsilon(1e-6));
    } else if (r.regime == Regime::dominant) {
      const auto& star = s[*r.dominant_server];
      const double n = static_cast<double>(star.n), e = star.budget.eps;
      if (e * n <= 1.0) continue;
      ++dom;
      // D* <= D <= 2^{1/(2 gamma + 1)} D*
      const double d_star = std::min(std::pow(n * n * e * e, 1 / (2 * gamma + 2)), std::pow(n, 1 / (2 * gamma + 1)));
      CHECK(r.D >= d_star * (1 - 1e-12));
      CHECK(r.D <= std::pow(2.0, 1 / (2 * gamma + 1)) * d_star * (1 + 1e-12));
    }
  }
  CHECK(no_dom > 50);
  CHECK(dom > 50);
}
