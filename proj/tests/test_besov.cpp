#include <doctest.h>

#include <cmath>

#include "dpfed/besov.hpp"
#include "dpfed/rng.hpp"

using namespace dpfed;

namespace {

void check_params(const WaveletFamily& fam, double alpha, double p, double q, double R) {
  BesovParams{alpha, p, q, R}.validate(fam);
}

}  // namespace

TEST_CASE("parameter validation") {
  const auto haar = WaveletFamily::build(FamilyName::haar);
  const auto db2 = WaveletFamily::build(FamilyName::daubechies2);
  CHECK_NOTHROW(check_params(haar, 0.75, kInf, kInf, 1.0));
  CHECK_NOTHROW(check_params(haar, 0.75, 4.0, kInf, 1.0));
  CHECK_THROWS_AS(check_params(haar, 0.7, 4.0, kInf, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(check_params(haar, 1.5, kInf, kInf, 1.0), std::invalid_argument);
  CHECK_NOTHROW(check_params(db2, 1.5, kInf, kInf, 1.0));
  CHECK_THROWS_AS(check_params(haar, 0.75, 1.5, kInf, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(check_params(haar, 0.75, kInf, 0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(check_params(haar, 0.75, kInf, kInf, 0.0), std::invalid_argument);
  CHECK(BesovParams{1.0, 4.0, 2.0, 1.0}.nu() == 0.75);
  CHECK(parse_truth_style("cosine-prior") == TruthStyle::cosine_prior);
  CHECK(to_string(parse_truth_style("uniform-decay")) == "uniform-decay");
  CHECK_THROWS_AS(parse_truth_style("bump"), std::invalid_argument);
}

TEST_CASE("besov norm by hand") {
  CoeffTree single(2, 4);
  single.father()[0] = -3.0;
  const BesovParams pq{1.0, 2.0, 2.0, 1.0};
  CHECK(besov_norm(single, pq) == doctest::Approx(std::ldexp(1.0, 2) * 3.0));

  CHECK(besov_norm(CoeffTree(0, 4), pq) == 0.0);

  CoeffTree ones(0, 2);
  ones.father()[0] = 1.0;
  for (int l = 0; l <= 2; ++l)
    for (auto& v : ones.level(l)) v = 1.0;
  CHECK(besov_norm(ones, {1.0, 2.0, kInf, 1.0}) == doctest::Approx(8.0));
  // q = 2: sqrt(1 + 1 + 2^3 + 2^6)
  CHECK(besov_norm(ones, {1.0, 2.0, 2.0, 1.0}) == doctest::Approx(std::sqrt(74.0)));
  // p = inf: weight 2^{1.5 l}, max |f| = 1
  CHECK(besov_norm(ones, {1.0, kInf, kInf, 1.0}) == doctest::Approx(8.0));
}

TEST_CASE("besov norm is absolutely homogeneous") {
  const auto fam = WaveletFamily::build(FamilyName::haar);
  const BesovParams b{0.75, 4.0, 3.0, 2.0};
  const auto t = sample_besov(b, fam, 8, TruthStyle::uniform_decay, 5);
  for (double s : {-3.0, -0.5, 0.0, 0.25, 7.0})
    CHECK(besov_norm(t.scaled(s), b) == doctest::Approx(std::abs(s) * besov_norm(t, b)).epsilon(1e-12));
}

TEST_CASE("sampled truths lie in the ball") {
  for (auto f : {FamilyName::haar, FamilyName::daubechies2}) {
    const auto fam = WaveletFamily::build(f);
    for (const BesovParams b : {BesovParams{0.75, kInf, kInf, 1.0}, BesovParams{0.9, 2.0, 1.0, 3.0},
                                BesovParams{0.75, 4.0, kInf, 0.5}}) {
      for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto u = sample_besov(b, fam, 10, TruthStyle::uniform_decay, seed);
        CHECK(besov_norm(u, b) == doctest::Approx(0.9 * b.R).epsilon(1e-12));
        CHECK(u.top_level() == 10);
        const auto c = sample_besov(b, fam, 6, TruthStyle::cosine_prior, seed);
        CHECK(besov_norm(c, b) <= b.R * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("sampling is deterministic") {
  const auto fam = WaveletFamily::build(FamilyName::daubechies2);
  const BesovParams b{0.75, kInf, kInf, 1.0};
  CHECK(sample_besov(b, fam, 9, TruthStyle::uniform_decay, 3) ==
        sample_besov(b, fam, 9, TruthStyle::uniform_decay, 3));
  CHECK_FALSE(sample_besov(b, fam, 9, TruthStyle::uniform_decay, 3) ==
              sample_besov(b, fam, 9, TruthStyle::uniform_decay, 4));
  CHECK_THROWS_AS(sample_besov(b, fam, 1, TruthStyle::uniform_decay, 3), std::invalid_argument);
}

TEST_CASE("cosine prior fills a single level") {
  const auto fam = WaveletFamily::build(FamilyName::haar);
  const BesovParams b{0.75, kInf, kInf, 1.0};
  const double half_width = std::ldexp(1.0, 0) * std::pow(2.0, -3 * (b.alpha + 0.5)) * b.R;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto t = sample_besov(b, fam, 3, TruthStyle::cosine_prior, seed);
    for (double v : t.father()) CHECK(v == 0.0);
    for (int l = 0; l < 3; ++l)
      for (double v : t.level(l)) CHECK(v == 0.0);
    for (double v : t.level(3)) CHECK(std::abs(v) <= half_width);
  }
}

TEST_CASE("tail sums obey the geometric bound") {
  for (auto f : {FamilyName::haar, FamilyName::daubechies2}) {
    const auto fam = WaveletFamily::build(f);
    for (const BesovParams b : {BesovParams{0.75, kInf, kInf, 1.0}, BesovParams{1.2, 3.0, 2.0, 2.0}}) {
      if (b.alpha >= fam.vanishing_moments()) continue;
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        for (auto style : {TruthStyle::uniform_decay, TruthStyle::cosine_prior}) {
          const int top = 11;
          const auto t = sample_besov(b, fam, top, style, seed);
          for (int L = fam.base_level(); L < top; ++L) {
            const double tail = t.detail_energy_from(L + 1);
            CHECK(tail <= tail_constant(b.alpha) * std::pow(2.0, -2.0 * L * b.alpha) * b.R * b.R);
          }
        }
      }
    }
  }
}

TEST_CASE("sup norm envelope") {
  const auto haar = WaveletFamily::build(FamilyName::haar);
  CoeffTree father(0, -1);
  father.father()[0] = -2.5;
  CHECK(sup_norm_bound(father, haar) == 2.5);
  CHECK(sup_norm_bound(CoeffTree(0, 6), haar) == 0.0);
  CoeffTree one(0, 4);
  one.level(4)[3] = 1.0;
  CHECK(sup_norm_bound(one, haar) == 4.0);

  for (auto f : {FamilyName::haar, FamilyName::daubechies2, FamilyName::daubechies3}) {
    const auto fam = WaveletFamily::build(f);
    const auto t = sample_besov({0.75, kInf, kInf, 1.0}, fam, 8, TruthStyle::uniform_decay, 2);
    const double bound = sup_norm_bound(t, fam);
    double worst = 0.0;
    for (int i = 0; i <= 4096; ++i) worst = std::max(worst, std::abs(fam.synthesize(t, i / 4096.0)));
    CHECK(worst <= bound);
  }
}

TEST_CASE("regression samples") {
  const auto haar = WaveletFamily::build(FamilyName::haar);
  const auto zero = CoeffTree(0, 3);
  const auto s0 = generate_sample(zero, haar, 50, 0.0, 1);
  for (double y : s0.y) CHECK(y == 0.0);

  CoeffTree three(0, -1);
  three.father()[0] = 3.0;
  for (double y : generate_sample(three, haar, 50, 0.0, 2).y) CHECK(y == 3.0);

  const auto db2 = WaveletFamily::build(FamilyName::daubechies2);
  const auto t = sample_besov({0.75, kInf, kInf, 1.0}, db2, 7, TruthStyle::uniform_decay, 4);
  const auto s = generate_sample(t, db2, 200, 0.0, 3);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s.x[i] >= 0.0);
    CHECK(s.x[i] <= 1.0);
    CHECK(s.y[i] == db2.synthesize(t, s.x[i]));
  }
  CHECK(generate_sample(t, db2, 20, 1.0, 9).y == generate_sample(t, db2, 20, 1.0, 9).y);
  CHECK(generate_sample(t, db2, 20, 0.0, 9).x == generate_sample(t, db2, 20, 1.0, 9).x);
  CHECK_THROWS_AS(generate_sample(t, db2, 0, 1.0, 9), std::invalid_argument);
}

TEST_CASE("noise is centred") {
  const auto haar = WaveletFamily::build(FamilyName::haar);
  const auto t = sample_besov({0.75, kInf, kInf, 1.0}, haar, 6, TruthStyle::uniform_decay, 4);
  const double sigma = 1.0;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::uint64_t rep = 0; rep < 100000; ++rep) {
    const auto s = generate_sample(t, haar, 10, sigma, derive_seed(17, rep));
    for (std::size_t i = 0; i < s.size(); ++i) sum += s.y[i] - haar.synthesize(t, s.x[i]);
    count += s.size();
  }
  CHECK(std::abs(sum / static_cast<double>(count)) <= 4.0 * sigma / 1000.0);
}
