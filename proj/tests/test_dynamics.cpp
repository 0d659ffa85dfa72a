#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dep/dynamics.hpp"
#include "dep/profile.hpp"
#include "dep/rate_matrix.hpp"
#include "support/stats.hpp"

using namespace dep;

namespace {

Configuration from_bits(const Topology& topo, std::initializer_list<int> bits) {
  Configuration c(topo);
  std::int64_t x = topo.first_site();
  for (int b : bits) c.set(x++, b);
  return c;
}

std::vector<int> to_bits(const Configuration& c) {
  std::vector<int> out;
  for (std::int64_t x = c.topology().first_site(); x <= c.topology().last_site(); ++x)
    out.push_back(c.get(x));
  return out;
}

}  // namespace

TEST_CASE("phi exchanges the neighbor when occupancies differ", "[dynamics]") {
  const auto topo = Topology::ring(5);
  auto cfg = from_bits(topo, {1, 0, 0, 0, 0});
  REQUIRE(to_bits(phi(cfg, 0)) == std::vector<int>{0, 1, 0, 0, 0});
}

TEST_CASE("phi performs the directed two-site exchanges", "[dynamics]") {
  const auto topo = Topology::ring(5);
  // 110 -> 011
  auto a = from_bits(topo, {1, 1, 0, 0, 0});
  REQUIRE(to_bits(phi(a, 0)) == std::vector<int>{0, 1, 1, 0, 0});
  // 001 -> 100
  auto b = from_bits(topo, {0, 0, 1, 0, 0});
  REQUIRE(to_bits(phi(b, 0)) == std::vector<int>{1, 0, 0, 0, 0});
}

TEST_CASE("phi respects blocked segment boundaries", "[dynamics]") {
  const auto topo = Topology::segment(5);
  auto cfg = from_bits(topo, {0, 0, 0, 1, 1});
  // site 5 has no right neighbor at all
  REQUIRE(to_bits(phi(cfg, 5)) == std::vector<int>{0, 0, 0, 1, 1});
  // site 4: equal pair (1,1) needs site 6, blocked
  REQUIRE(to_bits(phi(cfg, 4)) == std::vector<int>{0, 0, 0, 1, 1});
  REQUIRE_THROWS_AS(phi(cfg, 6), std::invalid_argument);
}

TEST_CASE("step_event gates on the occupancy value", "[dynamics]") {
  const auto topo = Topology::ring(5);
  auto cfg = from_bits(topo, {0, 1, 0, 0, 0});
  // gate mismatch: occupancy 0, alpha 1
  REQUIRE(to_bits(step_event(cfg, {0.1, 0, 1})) ==
          std::vector<int>{0, 1, 0, 0, 0});
  // matching gate applies phi: pattern (0,0,1) at site 2 with alpha 0
  auto shifted = from_bits(topo, {0, 0, 0, 0, 1});
  REQUIRE(to_bits(step_event(shifted, {0.1, 2, 0})) ==
          std::vector<int>{0, 0, 1, 0, 0});
}

TEST_CASE("update outcomes stay within two sites of the event", "[dynamics]") {
  const auto topo = Topology::ring(32);
  CounterRng rng(RngKey{5, StreamPurpose::scratch});
  for (int trial = 0; trial < 2000; ++trial) {
    Configuration cfg(topo);
    for (std::int64_t x = 0; x < 32; ++x)
      cfg.set(x, static_cast<int>(rng.next_u64() & 1));
    const auto x = static_cast<std::int64_t>(rng.uniform_below(32));
    Configuration next = cfg;
    const auto out = apply_phi(next, x);
    if (out.changed) {
      const std::int64_t d = (out.partner - out.site + 32) % 32;
      REQUIRE((d == 1 || d == 2));
      REQUIRE(next.get(out.site) != cfg.get(out.site));
      REQUIRE(next.get(out.partner) != cfg.get(out.partner));
      REQUIRE(next.hamming_distance(cfg) == 2);
    } else {
      REQUIRE(next == cfg);
    }
  }
}

TEST_CASE("complement conjugates the gate value", "[dynamics]") {
  // complementing the configuration and swapping alpha commutes with the
  // update, exactly, over all 2^5 local patterns and both gate values
  const auto topo = Topology::ring(5);
  for (std::uint32_t pat = 0; pat < 32; ++pat) {
    for (int alpha = 0; alpha < 2; ++alpha) {
      Configuration cfg(topo);
      for (int i = 0; i < 5; ++i) cfg.set(i, (pat >> i) & 1);
      Configuration a = cfg;
      apply_event(a, 0, alpha);
      Configuration b = cfg.complement();
      apply_event(b, 0, 1 - alpha);
      REQUIRE(a.complement() == b);
    }
  }
}

TEST_CASE("absorbing uniform states", "[dynamics]") {
  const auto topo = Topology::ring(64);
  Configuration zeros(topo);
  auto evolved = evolve(zeros, 5.0, RngKey{6, StreamPurpose::event_driver});
  REQUIRE(evolved.particle_count() == 0);
  Configuration ones(topo);
  ones.fill(1);
  EvolveOptions keyed;
  keyed.mode = EvolveMode::keyed_field;
  auto evolved1 = evolve(ones, 5.0, RngKey{6, StreamPurpose::clock_field}, keyed);
  REQUIRE(evolved1.particle_count() == 64);
}

TEST_CASE("evolution conserves the particle count exactly", "[dynamics]") {
  const auto topo = Topology::ring(256);
  for (int trial = 0; trial < 1000; ++trial) {
    auto cfg = sample_product(
        DensityProfile::constant(0.4), topo,
        RngKey{700, StreamPurpose::initial_state, kNoIndex, trial}, 1.0);
    const auto before = cfg.particle_count();
    EvolveOptions opt;
    opt.mode = trial % 2 ? EvolveMode::keyed_field : EvolveMode::gillespie;
    evolve_in_place(cfg, 2.0,
                    RngKey{701,
                           opt.mode == EvolveMode::keyed_field
                               ? StreamPurpose::clock_field
                               : StreamPurpose::event_driver,
                           kNoIndex, trial},
                    opt);
    REQUIRE(cfg.particle_count() == before);
  }
}

TEST_CASE("keyed evolution replays bit-identically", "[dynamics]") {
  const auto topo = Topology::ring(128);
  auto cfg = sample_product(DensityProfile::constant(0.5), topo,
                            RngKey{8, StreamPurpose::initial_state}, 1.0);
  EvolveOptions opt;
  opt.mode = EvolveMode::keyed_field;
  const RngKey key{9, StreamPurpose::clock_field};
  REQUIRE(evolve(cfg, 7.0, key, opt) == evolve(cfg, 7.0, key, opt));
}

TEST_CASE("rate matrix reproduces the hand-enumerated row", "[dynamics]") {
  // state 1100 on the 4-torus (bit x = occupancy of site x):
  //   x=0: equal pair, exchange (0,2) -> 0110
  //   x=1: unequal, exchange (1,2)    -> 1010
  //   x=2: equal holes, exchange (2,0)-> 0110
  //   x=3: unequal, exchange (3,0)    -> 0101
  const auto q = build_rate_matrix(4);
  const std::uint32_t s = 0b0011;
  REQUIRE(q.out_rate(s) == 4);
  int found = 0;
  for (const auto& e : q.row(s)) {
    if (e.target == 0b0110) {
      REQUIRE(e.rate == 2);
      ++found;
    }
    if (e.target == 0b0101) {
      REQUIRE(e.rate == 1);
      ++found;
    }
    if (e.target == 0b1010) {
      REQUIRE(e.rate == 1);
      ++found;
    }
  }
  REQUIRE(found == 3);
}

TEST_CASE("rate matrix rows are bounded and conserve particles", "[dynamics]") {
  for (int n = 3; n <= 10; ++n) {
    const auto q = build_rate_matrix(n);
    for (std::uint32_t s = 0; s < q.state_count(); ++s) {
      REQUIRE(q.out_rate(s) <= 2 * n);
      for (const auto& e : q.row(s))
        REQUIRE(std::popcount(e.target) == std::popcount(s));
    }
  }
}

TEST_CASE("generator identity holds exactly on small tori", "[dynamics]") {
  for (int n = 3; n <= 12; ++n) {
    const auto res = stationarity_identity_check(n);
    INFO("n = " << n << " counterexample " << res.counterexample);
    REQUIRE(res.ok);
  }
}

TEST_CASE("each jump channel balances separately", "[dynamics]") {
  // Dropping the 001 -> 100 channel leaves the identity intact: on a torus
  // the source and target pattern counts of each channel coincide (every
  // block of two or more equal symbols contributes one of each).
  for (int n = 4; n <= 10; ++n)
    REQUIRE(stationarity_identity_check(n, KernelVariant::drop_hole_jump).ok);
}

TEST_CASE("a misdirected jump breaks the identity", "[dynamics]") {
  const auto res =
      stationarity_identity_check(6, KernelVariant::misdirected_jump);
  REQUIRE_FALSE(res.ok);
  REQUIRE(res.out_rate != res.in_rate);
  // the returned counterexample is genuine
  const auto q = build_rate_matrix(6, KernelVariant::misdirected_jump);
  REQUIRE(q.out_rate(res.counterexample) != q.in_rate(res.counterexample));
}

TEST_CASE("current tally records the documented crossings", "[dynamics]") {
  const auto topo = Topology::ring(8);
  // adjacent move right: 10 -> 01 crosses bond 0 once
  {
    auto cfg = from_bits(topo, {1, 0, 0, 0, 0, 0, 0, 0});
    CurrentTally tally(topo);
    tally.add(topo, apply_phi(cfg, 0));
    REQUIRE(tally.at(0) == 1);
    REQUIRE(tally.total() == 1);
  }
  // long move right: 110 -> 011 crosses bonds 0 and 1
  {
    auto cfg = from_bits(topo, {1, 1, 0, 0, 0, 0, 0, 0});
    CurrentTally tally(topo);
    tally.add(topo, apply_phi(cfg, 0));
    REQUIRE(tally.at(0) == 1);
    REQUIRE(tally.at(1) == 1);
  }
  // long move left: 001 -> 100 crosses bonds 0 and 1 negatively
  {
    auto cfg = from_bits(topo, {0, 0, 1, 0, 0, 0, 0, 0});
    CurrentTally tally(topo);
    tally.add(topo, apply_phi(cfg, 0));
    REQUIRE(tally.at(0) == -1);
    REQUIRE(tally.at(1) == -1);
  }
}

TEST_CASE("both drivers realize the same law", "[dynamics]") {
  const auto topo = Topology::ring(128);
  const double t = 4.0;
  const int reps = 400;
  auto run_stats = [&](EvolveMode mode, std::uint64_t tag, double* pair_out,
                       double* current_out) {
    std::vector<double> pairs(reps), currents(reps);
    for (int r = 0; r < reps; ++r) {
      auto cfg = sample_product(
          DensityProfile::constant(0.5), topo,
          RngKey{tag, StreamPurpose::initial_state, kNoIndex, r}, 1.0);
      CurrentTally tally(topo);
      EvolveOptions opt;
      opt.mode = mode;
      opt.tally = &tally;
      evolve_in_place(cfg, t,
                      RngKey{tag + 1,
                             mode == EvolveMode::keyed_field
                                 ? StreamPurpose::clock_field
                                 : StreamPurpose::event_driver,
                             kNoIndex, r},
                      opt);
      std::int64_t pair_count = 0;
      for (std::int64_t x = 0; x < 128; ++x)
        pair_count += cfg.get(x) & cfg.get(topo.right(x, 1));
      pairs[r] = pair_count / 128.0;
      currents[r] = static_cast<double>(tally.total()) / 128.0;
    }
    *pair_out = test_support::mean_of(pairs);
    *current_out = test_support::mean_of(currents);
    return std::pair(test_support::variance_of(pairs),
                     test_support::variance_of(currents));
  };
  double pg, cg, pk, ck;
  const auto [vpg, vcg] = run_stats(EvolveMode::gillespie, 40, &pg, &cg);
  const auto [vpk, vck] = run_stats(EvolveMode::keyed_field, 60, &pk, &ck);
  const double se_pair = std::sqrt((vpg + vpk) / reps);
  const double se_cur = std::sqrt((vcg + vck) / reps);
  REQUIRE(std::fabs(pg - pk) < 4.5 * se_pair);
  REQUIRE(std::fabs(cg - ck) < 4.5 * se_cur);
}
