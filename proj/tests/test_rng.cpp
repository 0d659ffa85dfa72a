#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dep/rng.hpp"
#include "support/stats.hpp"

using namespace dep;

TEST_CASE("same key replays the identical stream", "[rng]") {
  RngKey key{123, StreamPurpose::scratch, 5, 2};
  CounterRng a(key), b(key);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct key fields give distinct streams", "[rng]") {
  const RngKey base{9, StreamPurpose::scratch, 1, 1};
  RngKey other = base;
  other.site = 2;
  CounterRng a(base), b(other);
  int equal = 0;
  for (int i = 0; i < 64; ++i) equal += a.next_u64() == b.next_u64();
  REQUIRE(equal == 0);

  RngKey rep = base;
  rep.replica = 7;
  CounterRng c(base), d(rep);
  equal = 0;
  for (int i = 0; i < 64; ++i) equal += c.next_u64() == d.next_u64();
  REQUIRE(equal == 0);
}

TEST_CASE("uniforms cover [0,1) with the right mean", "[rng]") {
  CounterRng rng(RngKey{77, StreamPurpose::scratch});
  const int n = 200000;
  double sum = 0.0;
  std::vector<int> bins(16, 0);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    ++bins[static_cast<int>(u * 16)];
  }
  // mean: sd = 1/sqrt(12n), allow 5 sigma
  REQUIRE(std::fabs(sum / n - 0.5) < 5.0 / std::sqrt(12.0 * n));
  // bins: 5-sigma binomial band
  const double expect = n / 16.0;
  const double sd = std::sqrt(n * (1.0 / 16) * (15.0 / 16));
  for (int b : bins) REQUIRE(std::fabs(b - expect) < 5.0 * sd);
}

TEST_CASE("exponential draws are strictly positive and pass KS", "[rng]") {
  int pass = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    CounterRng rng(RngKey{static_cast<std::uint64_t>(1000 + s), StreamPurpose::scratch});
    std::vector<double> xs(100000);
    for (auto& x : xs) {
      x = rng.next_exp();
      REQUIRE(x > 0.0);
    }
    const double d = test_support::ks_statistic(
        xs, [](double x) { return 1.0 - std::exp(-x); });
    pass += d < test_support::ks_critical_01(xs.size());
  }
  REQUIRE(pass >= 19);
}

TEST_CASE("uniform_below stays in range and is roughly uniform", "[rng]") {
  CounterRng rng(RngKey{31, StreamPurpose::scratch});
  const std::uint64_t n = 13;
  std::vector<int> counts(n, 0);
  const int draws = 130000;
  for (int i = 0; i < draws; ++i) {
    const std::uint64_t v = rng.uniform_below(n);
    REQUIRE(v < n);
    ++counts[v];
  }
  const double expect = draws / static_cast<double>(n);
  const double sd = std::sqrt(expect * (1.0 - 1.0 / n));
  for (int c : counts) REQUIRE(std::fabs(c - expect) < 5.0 * sd);
}

TEST_CASE("poisson sampler matches mean and variance", "[rng]") {
  CounterRng rng(RngKey{55, StreamPurpose::scratch});
  for (const double mu : {0.5, 4.2, 12.0, 35.0, 1000.0}) {
    const int n = 200000;
    std::vector<double> xs(n);
    for (auto& x : xs) x = static_cast<double>(rng.poisson(mu));
    const double mean = test_support::mean_of(xs);
    const double var = test_support::variance_of(xs);
    // mean: sd = sqrt(mu/n); variance estimate: sd ~ sqrt(2/n + 1/(n*mu))*mu
    REQUIRE(std::fabs(mean - mu) < 5.0 * std::sqrt(mu / n));
    REQUIRE(std::fabs(var - mu) <
            5.0 * mu * std::sqrt(2.0 / n + 1.0 / (n * mu)));
  }
}

TEST_CASE("poisson at huge mean stays sane", "[rng]") {
  CounterRng rng(RngKey{56, StreamPurpose::scratch});
  const double mu = 3.0e8;
  for (int i = 0; i < 20; ++i) {
    const double k = static_cast<double>(rng.poisson(mu));
    REQUIRE(std::fabs(k - mu) < 8.0 * std::sqrt(mu));
  }
}
