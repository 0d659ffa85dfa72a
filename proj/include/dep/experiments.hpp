#pragma once

// Declarative, reproducible experiments tying the particle system to the
// conservation law. Every run_* function is a pure function of its config
// (including the master seed): replica results are computed into indexed
// slots and reduced in index order, so job count cannot change a report.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dep/claw.hpp"
#include "dep/config_file.hpp"
#include "dep/coupling.hpp"
#include "dep/dynamics.hpp"
#include "dep/observables.hpp"
#include "dep/profile.hpp"
#include "dep/rate_matrix.hpp"
#include "dep/report.hpp"

namespace dep {

// Frozen acceptance thresholds.
constexpr double kFluxIdentityTol = 1e-12;
constexpr double kRiemannOracleTol = 1e-10;
constexpr double kDualityTol = 1e-12;
constexpr double kGodunovL1Max = 0.01;
constexpr double kGodunovShockSpeedRelTol = 0.02;
constexpr double kHydroRiemannL1Max = 0.05;
constexpr double kHydroCauchyL1Max = 0.07;
constexpr double kFinitePropMinFreq = 0.99;
constexpr double kFinitePropNegativeMaxFreq = 0.90;
constexpr double kAnnihilationMinRate = 2.0;
constexpr int kStrongHydroMinMonotone = 8;
constexpr double kScalingResidualMax = 1e-10;
constexpr double kStatSigmas = 3.0;
constexpr double kWindowAuditTol = 1e-3;
constexpr double kFluctT0RelTol = 0.03;

inline std::uint64_t sub_master(std::uint64_t master, std::uint64_t tag) {
  return absorb(master, tag);
}

inline int default_jobs() {
  const unsigned n = std::thread::hardware_concurrency();
  return n ? static_cast<int>(n) : 1;
}

template <class Fn>
void parallel_for(int jobs, std::int64_t count, Fn&& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || count <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  auto worker = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  const int w = static_cast<int>(std::min<std::int64_t>(jobs, count));
  threads.reserve(w);
  for (int i = 0; i < w; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (err) std::rethrow_exception(err);
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr m;
  const double n = static_cast<double>(xs.size());
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= n;
  if (xs.size() < 2) return m;
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return m;
}

// Lattice window of 2R+1 segment sites centered on macro coordinate 0.
// Site labels (site + label_offset) run from -R to R; macro(x) = eps*label.
struct Window {
  Topology topo;
  std::int64_t origin;  // site with label 0
  double eps;

  std::int64_t label_offset() const { return -origin; }
  double macro(std::int64_t site) const {
    return eps * static_cast<double>(site - origin);
  }
};

inline Window make_window(std::int64_t n, double half_width_macro) {
  const auto R = static_cast<std::int64_t>(
      std::ceil(half_width_macro * static_cast<double>(n)));
  return Window{Topology::segment(2 * R + 1), R + 1, 1.0 / static_cast<double>(n)};
}

namespace detail {

template <class F>
double adaptive_simpson_rec(const F& f, double a, double m, double b, double fa,
                            double fm, double fb, double whole, double tol,
                            int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, lm, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_simpson_rec(f, m, rm, b, fm, frm, fb, right, tol / 2, depth - 1);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  if (!(a < b)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, 28);
}

inline std::vector<double> smooth_spans(const TestFn& f,
                                        const std::vector<double>& extra) {
  std::vector<double> pts{f.lo, f.hi};
  for (double k : f.kinks)
    if (k > f.lo && k < f.hi) pts.push_back(k);
  for (double k : extra)
    if (k > f.lo && k < f.hi) pts.push_back(k);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace detail

// integral of f * u(., t) for the self-similar solution, t > 0.
inline double integrate_f_against_solution(const TestFn& f,
                                           const claw::RiemannSolution& sol,
                                           double t) {
  std::vector<double> extra;
  for (double v : sol.breakpoints()) extra.push_back(v * t);
  const auto pts = detail::smooth_spans(f, extra);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    total += detail::adaptive_simpson(
        [&](double x) { return f(x) * sol.at(x, t); }, pts[i], pts[i + 1], 1e-12);
  return total;
}

// integral of f * u0 for a piecewise-constant profile (the t = 0 reference).
inline double integrate_f_against_profile(const TestFn& f,
                                          const DensityProfile& u0) {
  const auto pts = detail::smooth_spans(f, u0.breaks());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double mid = 0.5 * (pts[i] + pts[i + 1]);
    const double c = u0(mid);
    if (c != 0.0)
      total += c * detail::adaptive_simpson([&](double x) { return f(x); },
                                            pts[i], pts[i + 1], 1e-12);
  }
  return total;
}

// integral of f against a cell-averaged grid function.
inline double integrate_f_against_cells(const TestFn& f,
                                        const std::vector<double>& edges,
                                        const std::vector<double>& vals) {
  double total = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double a = std::max(edges[i], f.lo), b = std::min(edges[i + 1], f.hi);
    if (!(a < b) || vals[i] == 0.0) continue;
    const double m = 0.5 * (a + b);
    total += vals[i] * (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
  }
  return total;
}

// Named test functions used by the hydro and fluctuation pipelines.
inline TestFn make_test_fn(const std::string& name) {
  if (name == "hat") return hat_fn(0.0, 1.0);
  if (name == "gauss") return gaussian_fn(0.25, 0.35, 1.05);
  if (name == "bump") return smooth_indicator_fn(-1.2, -0.2, 0.2);
  throw ConfigError("unknown test function: " + name);
}

namespace detail {

// Nested copies from one uniform per site: copy_j(x) = 1{u_x < densities[j]}.
inline std::vector<Configuration> nested_copies(
    const Topology& topo, const RngKey& key,
    const std::vector<double>& densities) {
  std::vector<Configuration> copies(densities.size(), Configuration(topo));
  const std::uint64_t base = stream_key(key);
  for (std::int64_t x = topo.first_site(); x <= topo.last_site(); ++x) {
    const auto blk = philox4x32_10(0, absorb(base, zigzag(x)));
    const std::uint64_t u = (static_cast<std::uint64_t>(blk.w[0]) << 32) | blk.w[1];
    const double unif = static_cast<double>(u >> 11) * 0x1.0p-53;
    for (std::size_t j = 0; j < densities.size(); ++j)
      if (unif < densities[j]) copies[j].set(x, 1);
  }
  return copies;
}

// zeta random at density rho; xi = zeta with `swaps` occupancy exchanges
// between random sites of [center-span, center+span]. Equal particle counts.
inline std::pair<Configuration, Configuration> perturbed_pair(
    const Topology& topo, const RngKey& key, double rho, int swaps,
    std::int64_t span) {
  Configuration zeta =
      sample_product(DensityProfile::constant(rho), topo, key, 1.0);
  Configuration xi = zeta;
  CounterRng rng(key.with_site(1));
  const std::int64_t center = topo.first_site() + topo.size() / 2;
  for (int k = 0; k < swaps; ++k) {
    const std::int64_t a =
        center - span + static_cast<std::int64_t>(rng.uniform_below(2 * span));
    const std::int64_t b =
        center - span + static_cast<std::int64_t>(rng.uniform_below(2 * span));
    xi.exchange(a, b);
  }
  return {std::move(zeta), std::move(xi)};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stationarity suite
// ---------------------------------------------------------------------------

struct StationarityConfig {
  int exact_n_lo = 3;
  int exact_n_hi = 12;
  std::int64_t ring_sites = 512;
  double ring_rho = 0.3;
  double ring_t = 100.0;
  std::int64_t ring_replicas = 100;
  std::int64_t current_sites = 1024;
  std::vector<double> current_rhos = {0.25, 0.5, 0.75};
  double current_t = 2000.0;
  std::int64_t current_replicas = 50;
  std::uint64_t master = 20250810;
  int jobs = default_jobs();
};

inline Report run_stationarity(const StationarityConfig& cfg) {
  Report rep;
  rep.experiment = "stationarity";
  rep.master_seed = cfg.master;

  // Exact generator identity on small tori.
  bool exact_ok = true;
  int bad_n = 0;
  for (int n = cfg.exact_n_lo; n <= cfg.exact_n_hi; ++n) {
    if (!stationarity_identity_check(n).ok) {
      exact_ok = false;
      bad_n = n;
      break;
    }
  }
  rep.add_check("exact-identity", "exact", exact_ok, exact_ok ? 0 : bad_n, 0,
                "out-rate == in-rate for every state, n = " +
                    std::to_string(cfg.exact_n_lo) + ".." +
                    std::to_string(cfg.exact_n_hi));

  // Negative control: a misdirected kernel must break the identity.
  const auto mutated =
      stationarity_identity_check(6, KernelVariant::misdirected_jump);
  rep.add_check("negative-control", "exact", !mutated.ok, mutated.ok ? 1 : 0, 0,
                "a broken jump kernel must yield a counterexample");

  // Statistical stationarity on a ring.
  {
    const Topology topo = Topology::ring(cfg.ring_sites);
    std::vector<double> density(cfg.ring_replicas), pairs(cfg.ring_replicas);
    parallel_for(cfg.jobs, cfg.ring_replicas, [&](std::int64_t r) {
      Configuration c = sample_product(
          DensityProfile::constant(cfg.ring_rho), topo,
          RngKey{sub_master(cfg.master, 1), StreamPurpose::initial_state,
                 kNoIndex, r},
          1.0);
      evolve_in_place(c, cfg.ring_t,
                      RngKey{sub_master(cfg.master, 2),
                             StreamPurpose::event_driver, kNoIndex, r});
      std::int64_t pair_count = 0;
      for (std::int64_t x = 0; x < cfg.ring_sites; ++x)
        pair_count += c.get(x) & c.get(topo.right(x, 1));
      density[r] = static_cast<double>(c.particle_count()) /
                   static_cast<double>(cfg.ring_sites);
      pairs[r] = static_cast<double>(pair_count) /
                 static_cast<double>(cfg.ring_sites);
    });
    const auto md = mean_stderr(density);
    const auto mp = mean_stderr(pairs);
    const double z_d = std::fabs(md.mean - cfg.ring_rho) / md.stderr_;
    const double z_p =
        std::fabs(mp.mean - cfg.ring_rho * cfg.ring_rho) / mp.stderr_;
    rep.add_check("ring-density", "statistical", z_d <= kStatSigmas, z_d,
                  kStatSigmas,
                  "|mean - rho| in stderr units, " +
                      std::to_string(cfg.ring_replicas) + " replicas");
    rep.add_check("ring-pair-frequency", "statistical", z_p <= kStatSigmas, z_p,
                  kStatSigmas, "|mean - rho^2| in stderr units");
    auto& t = rep.table("ring_stats");
    t.columns = {"rho", "density_mean", "density_stderr", "pair_mean",
                 "pair_stderr"};
    t.rows.push_back({cfg.ring_rho, md.mean, md.stderr_, mp.mean, mp.stderr_});
  }

  // Time-averaged bond current against the macroscopic flux.
  {
    const Topology topo = Topology::ring(cfg.current_sites);
    auto& t = rep.table("bond_current");
    t.columns = {"rho", "mean", "stderr", "reference", "z"};
    for (std::size_t k = 0; k < cfg.current_rhos.size(); ++k) {
      const double rho = cfg.current_rhos[k];
      std::vector<double> current(cfg.current_replicas);
      parallel_for(cfg.jobs, cfg.current_replicas, [&](std::int64_t r) {
        Configuration c = sample_product(
            DensityProfile::constant(rho), topo,
            RngKey{sub_master(cfg.master, 10 + k), StreamPurpose::initial_state,
                   kNoIndex, r},
            1.0);
        CurrentTally tally(topo);
        EvolveOptions opt;
        opt.tally = &tally;
        evolve_in_place(c, cfg.current_t,
                        RngKey{sub_master(cfg.master, 20 + k),
                               StreamPurpose::event_driver, kNoIndex, r},
                        opt);
        current[r] = static_cast<double>(tally.total()) /
                     (static_cast<double>(cfg.current_sites) * cfg.current_t);
      });
      const auto mc = mean_stderr(current);
      const double ref = claw::flux(rho);
      const double z = std::fabs(mc.mean - ref) / mc.stderr_;
      t.rows.push_back({rho, mc.mean, mc.stderr_, ref, z});
      char name[64];
      std::snprintf(name, sizeof name, "bond-current-rho-%g", rho);
      rep.add_check(name, "statistical", z <= kStatSigmas, z, kStatSigmas,
                    "time-averaged current vs G(rho), " +
                        std::to_string(cfg.current_replicas) + " replicas");
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Coupling suite
// ---------------------------------------------------------------------------

struct CouplingSuiteConfig {
  std::int64_t trials = 1000;
  double trial_t = 20.0;  // mean 2 * 256 * 20 ~ 1e4 events per trial
  std::int64_t ring_sites = 256;
  std::int64_t gs_pairs = 4200;
  std::int64_t gs_sites = 24;
  std::int64_t annihilation_trials = 100000;
  double annihilation_h = 0.02;
  std::int64_t ensemble_trials = 100;
  double ensemble_t = 5.0;
  std::int64_t ensemble_sites = 128;
  std::uint64_t master = 20250810;
  int jobs = default_jobs();
};

inline Report run_coupling_suite(const CouplingSuiteConfig& cfg) {
  Report rep;
  rep.experiment = "coupling";
  rep.master_seed = cfg.master;

  // Audited shared-clock trials in three families: ring perturbation pairs
  // (equal counts, Delta audited), ring ordered pairs (order audited), and
  // segment perturbation pairs (literal prefix-sup Delta audited).
  {
    std::vector<int> ok(cfg.trials, 0);
    std::vector<std::int64_t> events(cfg.trials, 0);
    std::vector<std::string> why(cfg.trials);
    std::atomic<std::int64_t> annihilations{0};
    parallel_for(cfg.jobs, cfg.trials, [&](std::int64_t trial) {
      const int family = static_cast<int>(trial % 3);
      const Topology topo = family == 2 ? Topology::segment(cfg.ring_sites)
                                        : Topology::ring(cfg.ring_sites);
      const RngKey init{sub_master(cfg.master, 100 + family),
                        StreamPurpose::initial_state, kNoIndex, trial};
      Configuration zeta(topo), xi(topo);
      if (family == 1) {
        auto copies = detail::nested_copies(topo, init, {0.25, 0.55});
        xi = std::move(copies[0]);
        zeta = std::move(copies[1]);
      } else {
        auto pair = detail::perturbed_pair(topo, init, 0.5, 6, 32);
        zeta = std::move(pair.first);
        xi = std::move(pair.second);
      }
      const RngKey clock{sub_master(cfg.master, 110), StreamPurpose::clock_field,
                         kNoIndex, trial};
      auto audit = coupled_evolve_audited(zeta, xi, cfg.trial_t, clock);
      ok[trial] = audit.ok;
      events[trial] = audit.events;
      annihilations += audit.annihilations;
      if (!audit.ok)
        why[trial] = audit.violation + " @t=" + std::to_string(audit.bad_event.time) +
                     " " + audit.local_patterns;
    });
    std::int64_t total_events = 0, failures = 0;
    std::string first_why;
    for (std::int64_t i = 0; i < cfg.trials; ++i) {
      total_events += events[i];
      if (!ok[i] && !failures) first_why = why[i];
      failures += !ok[i];
    }
    rep.add_check("audited-pairs", "exact", failures == 0,
                  static_cast<double>(failures), 0,
                  failures ? first_why
                           : std::to_string(cfg.trials) + " trials, " +
                                 std::to_string(total_events) + " events");
    auto& t = rep.table("audit_summary");
    t.columns = {"trials", "events", "annihilations", "failures"};
    t.rows.push_back({static_cast<double>(cfg.trials),
                      static_cast<double>(total_events),
                      static_cast<double>(annihilations.load()),
                      static_cast<double>(failures)});
  }

  // Attractiveness inequalities on random ordered pairs, integer-exact.
  {
    const Topology topo = Topology::ring(cfg.gs_sites);
    std::atomic<std::int64_t> checked{0}, equalities{0};
    std::vector<int> ok(cfg.gs_pairs, 1);
    parallel_for(cfg.jobs, cfg.gs_pairs, [&](std::int64_t i) {
      CounterRng rng(RngKey{sub_master(cfg.master, 120),
                            StreamPurpose::scratch, kNoIndex, i});
      const double hi = rng.uniform();
      const double lo = hi * rng.uniform();
      auto copies = detail::nested_copies(
          topo,
          RngKey{sub_master(cfg.master, 121), StreamPurpose::initial_state,
                 kNoIndex, i},
          {lo, hi});
      const auto res = check_gs_inequalities(copies[0], copies[1]);
      ok[i] = res.ok;
      checked += res.sites_checked;
      equalities += res.nontrivial_equalities;
    });
    std::int64_t failures = 0;
    for (int v : ok) failures += !v;
    rep.add_check("attractiveness-inequalities", "exact", failures == 0,
                  static_cast<double>(failures), 0,
                  std::to_string(checked.load()) + " site conditions checked, " +
                      std::to_string(equalities.load()) + " nontrivial equalities");

    // The documented equality pattern must hold with equality, exactly.
    Configuration zeta(topo), xi(topo);
    const std::int64_t y = 10;
    zeta.set(y + 1, 1);
    zeta.set(y + 2, 1);
    xi.set(y + 2, 1);
    const auto sides = gs_condition1_sides(xi, zeta, y);
    rep.add_check("attractiveness-equality-pattern", "exact",
                  sides.first == sides.second && sides.first == 1,
                  static_cast<double>(sides.first - sides.second), 0,
                  "boundary pattern attains equality in the first condition");
  }

  // Annihilation hazard of an adjacent opposite-sign pair.
  {
    const Topology topo = Topology::ring(cfg.ring_sites);
    const std::int64_t c = cfg.ring_sites / 2;
    std::vector<int> equal(cfg.annihilation_trials, 0);
    parallel_for(cfg.jobs, cfg.annihilation_trials, [&](std::int64_t i) {
      Configuration zeta = sample_product(
          DensityProfile::constant(0.5), topo,
          RngKey{sub_master(cfg.master, 130), StreamPurpose::initial_state,
                 kNoIndex, i},
          1.0);
      Configuration xi = zeta;
      zeta.set(c, 1);
      xi.set(c, 0);
      zeta.set(c + 1, 0);
      xi.set(c + 1, 1);
      CoupledEnsemble pair({std::move(zeta), std::move(xi)},
                           RngKey{sub_master(cfg.master, 131),
                                  StreamPurpose::clock_field, kNoIndex, i});
      pair.advance(cfg.annihilation_h);
      equal[i] = pair.copies()[0].hamming_distance(pair.copies()[1]) == 0;
    });
    double p = 0;
    for (int v : equal) p += v;
    p /= static_cast<double>(cfg.annihilation_trials);
    const double se =
        std::sqrt(p * (1 - p) / static_cast<double>(cfg.annihilation_trials));
    const double rate_lo = (p - 2.576 * se) / cfg.annihilation_h;
    rep.add_check("annihilation-rate", "statistical",
                  rate_lo >= kAnnihilationMinRate, rate_lo, kAnnihilationMinRate,
                  "99% lower confidence bound on the annihilation hazard, " +
                      std::to_string(cfg.annihilation_trials) + " trials");
    auto& t = rep.table("annihilation");
    t.columns = {"trials", "probe_h", "p_hat", "rate_lower"};
    t.rows.push_back({static_cast<double>(cfg.annihilation_trials),
                      cfg.annihilation_h, p, rate_lo});
  }

  // Four nested copies under one clock realization: pairwise discrepancy
  // properties and full order preservation, simultaneously.
  {
    const Topology topo = Topology::ring(cfg.ensemble_sites);
    std::vector<int> ok(cfg.ensemble_trials, 1);
    parallel_for(cfg.jobs, cfg.ensemble_trials, [&](std::int64_t trial) {
      CoupledEnsemble ensemble(
          detail::nested_copies(
              topo,
              RngKey{sub_master(cfg.master, 140), StreamPurpose::initial_state,
                     kNoIndex, trial},
              {0.2, 0.4, 0.6, 0.8}),
          RngKey{sub_master(cfg.master, 141), StreamPurpose::clock_field,
                 kNoIndex, trial});
      auto& copies = ensemble.copies();
      std::array<std::int8_t, 5> before{}, after{};
      int nb = 0, na = 0;
      bool good = true;
      while (good) {
        auto mark = ensemble.next_mark(cfg.ensemble_t);
        if (!mark) break;
        for (std::size_t a = 0; a + 1 < copies.size() && good; ++a) {
          for (std::size_t b = a + 1; b < copies.size() && good; ++b) {
            detail::window_signs(copies[b], copies[a], mark->site, before, nb);
            Configuration za = copies[b], xa = copies[a];
            apply_event(za, mark->site, mark->alpha);
            apply_event(xa, mark->site, mark->alpha);
            detail::window_signs(za, xa, mark->site, after, na);
            int pb = 0, pa = 0;
            for (int i = 0; i < nb; ++i) pb += before[i] > 0;
            for (int i = 0; i < na; ++i) pa += after[i] > 0;
            if (!detail::is_subsequence(after, na, before, nb) ||
                (pb - pa) != (nb - pb) - (na - pa))
              good = false;
            if (!xa.dominated_by(za)) good = false;
          }
        }
        for (auto& c : copies) apply_event(c, mark->site, mark->alpha);
      }
      ok[trial] = good;
    });
    std::int64_t failures = 0;
    for (int v : ok) failures += !v;
    rep.add_check("pairwise-ensemble", "exact", failures == 0,
                  static_cast<double>(failures), 0,
                  "J=4 nested copies, all pairs audited per event");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Finite propagation
// ---------------------------------------------------------------------------

struct FinitePropConfig {
  std::int64_t sites = 641;
  std::int64_t agree_lo = 201;
  std::int64_t agree_hi = 441;
  double t = 20.0;
  double v = 5.0;
  std::int64_t trials = 1000;
  double v_negative = 0.1;
  std::int64_t negative_trials = 200;
  double rho = 0.5;
  std::uint64_t master = 20250810;
  int jobs = default_jobs();
};

inline Report run_finite_prop(const FinitePropConfig& cfg) {
  Report rep;
  rep.experiment = "finite-prop";
  rep.master_seed = cfg.master;
  const Topology topo = Topology::segment(cfg.sites);
  Configuration zeta0 = sample_product(
      DensityProfile::constant(cfg.rho), topo,
      RngKey{sub_master(cfg.master, 1), StreamPurpose::initial_state}, 1.0);
  Configuration xi0 = sample_product(
      DensityProfile::constant(cfg.rho), topo,
      RngKey{sub_master(cfg.master, 2), StreamPurpose::initial_state}, 1.0);
  for (std::int64_t s = cfg.agree_lo; s <= cfg.agree_hi; ++s)
    xi0.set(s, zeta0.get(s));

  const RngKey clock{sub_master(cfg.master, 3), StreamPurpose::clock_field};
  const auto pos = finite_propagation_test(zeta0, xi0, cfg.agree_lo,
                                           cfg.agree_hi, cfg.t, cfg.v,
                                           cfg.trials, clock);
  rep.add_check("agreement-frequency", "statistical",
                pos.frequency >= kFinitePropMinFreq, pos.frequency,
                kFinitePropMinFreq,
                "inner interval [" + std::to_string(pos.inner_lo) + "," +
                    std::to_string(pos.inner_hi) + "], " +
                    std::to_string(cfg.trials) + " trials");

  const RngKey clock_neg{sub_master(cfg.master, 4), StreamPurpose::clock_field};
  const auto neg = finite_propagation_test(zeta0, xi0, cfg.agree_lo,
                                           cfg.agree_hi, cfg.t, cfg.v_negative,
                                           cfg.negative_trials, clock_neg);
  rep.add_check("negative-control", "statistical",
                neg.frequency < kFinitePropNegativeMaxFreq, neg.frequency,
                kFinitePropNegativeMaxFreq,
                "speed margin too slow must visibly fail");

  auto& t = rep.table("finite_prop");
  t.columns = {"v", "t", "trials", "frequency"};
  t.rows.push_back({cfg.v, cfg.t, static_cast<double>(cfg.trials), pos.frequency});
  t.rows.push_back({cfg.v_negative, cfg.t, static_cast<double>(cfg.negative_trials),
                    neg.frequency});
  return rep;
}

// ---------------------------------------------------------------------------
// Hydrodynamics, Riemann data
// ---------------------------------------------------------------------------

struct HydroRiemannConfig {
  double lambda = 0.5;
  double rho = 0.0;
  std::vector<std::int64_t> n_list = {200, 800, 3200};
  double t_end = 1.0;
  std::int64_t seeds = 20;
  double eval_halfwidth = 3.0;  // L1 is measured on [-A, A]
  double margin = 1.0;          // window half-width = A + 2T + margin
  double block_width = 0.05;    // macro width of density blocks
  EvolveMode mode = EvolveMode::gillespie;
  std::vector<std::string> fns = {"hat", "gauss", "bump"};
  bool acceptance_checks = true;
  bool window_audit = true;
  std::int64_t audit_n = 800;
  std::uint64_t master = 20250810;
  int jobs = default_jobs();
};

namespace detail {

struct HydroSeedResult {
  std::vector<double> blocks;
  double l1 = 0.0;
  std::vector<double> pairing_err;
};

// One particle run at scale n: sample, evolve to T*n, block profile.
inline HydroSeedResult hydro_seed_run(const HydroRiemannConfig& cfg,
                                      const Window& win,
                                      const DensityProfile& u0,
                                      const claw::RiemannSolution& sol,
                                      const std::vector<TestFn>& fns,
                                      std::size_t ni, std::int64_t seed) {
  const std::int64_t n = cfg.n_list[ni];
  const RngKey init{sub_master(cfg.master, 500 + ni),
                    StreamPurpose::initial_state, kNoIndex, seed};
  Configuration c = sample_product(u0, win.topo, init, win.eps, win.label_offset());
  EvolveOptions opt;
  opt.mode = cfg.mode;
  opt.clock_label_offset = win.label_offset();
  const StreamPurpose purpose = cfg.mode == EvolveMode::keyed_field
                                    ? StreamPurpose::clock_field
                                    : StreamPurpose::event_driver;
  evolve_in_place(c, cfg.t_end * static_cast<double>(n),
                  RngKey{sub_master(cfg.master, 510 + ni), purpose, kNoIndex, seed},
                  opt);
  const std::int64_t block_sites =
      std::max<std::int64_t>(8, std::llround(cfg.block_width * static_cast<double>(n)));
  const auto prof = block_density_profile(c, block_sites, win.eps, win.origin);
  HydroSeedResult res;
  res.blocks = prof.values;
  std::vector<double> edges(prof.values.size() + 1);
  for (std::size_t i = 0; i < edges.size(); ++i)
    edges[i] = prof.edge(i);
  res.l1 = claw::l1_cells_vs_solution(edges, prof.values, sol, cfg.t_end,
                                      -cfg.eval_halfwidth, cfg.eval_halfwidth);
  for (const auto& f : fns) {
    const double p = empirical_pairing(c, f, win.eps, 0.0, win.origin);
    const double ref = integrate_f_against_solution(f, sol, cfg.t_end);
    res.pairing_err.push_back(std::fabs(p - ref));
  }
  return res;
}

}  // namespace detail

inline Report run_hydro_riemann(const HydroRiemannConfig& cfg) {
  Report rep;
  rep.experiment = "hydro-riemann";
  rep.master_seed = cfg.master;
  const auto sol = claw::riemann_solve(cfg.lambda, cfg.rho);
  const auto u0 = DensityProfile::step(cfg.lambda, cfg.rho);
  std::vector<TestFn> fns;
  for (const auto& name : cfg.fns) fns.push_back(make_test_fn(name));
  const double half_width = cfg.eval_halfwidth + 2.0 * cfg.t_end + cfg.margin;

  {
    auto& summary = rep.table("summary");
    summary.columns = {"n", "l1_mean_profile", "l1_seed_mean", "l1_seed_stderr"};
    for (const auto& f : fns) {
      summary.columns.push_back(f.name + "_err_mean");
      summary.columns.push_back(f.name + "_err_stderr");
    }
  }

  std::vector<double> l1_mean_profile(cfg.n_list.size());
  for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
    const std::int64_t n = cfg.n_list[ni];
    const Window win = make_window(n, half_width);
    std::vector<detail::HydroSeedResult> results(cfg.seeds);
    parallel_for(cfg.jobs, cfg.seeds, [&](std::int64_t seed) {
      results[seed] = detail::hydro_seed_run(cfg, win, u0, sol, fns, ni, seed);
    });

    // seed-averaged block profile and its L1 distance to the solution
    const std::size_t nblocks = results[0].blocks.size();
    std::vector<double> mean_blocks(nblocks, 0.0);
    for (const auto& r : results)
      for (std::size_t b = 0; b < nblocks; ++b) mean_blocks[b] += r.blocks[b];
    for (auto& v : mean_blocks) v /= static_cast<double>(cfg.seeds);

    const std::int64_t block_sites =
        std::max<std::int64_t>(8, std::llround(cfg.block_width * static_cast<double>(n)));
    const auto geom = block_density_profile(Configuration(win.topo), block_sites,
                                            win.eps, win.origin);
    std::vector<double> edges(nblocks + 1);
    for (std::size_t i = 0; i < edges.size(); ++i) edges[i] = geom.edge(i);
    l1_mean_profile[ni] =
        claw::l1_cells_vs_solution(edges, mean_blocks, sol, cfg.t_end,
                                   -cfg.eval_halfwidth, cfg.eval_halfwidth);

    std::vector<double> l1s;
    for (const auto& r : results) l1s.push_back(r.l1);
    const auto ml1 = mean_stderr(l1s);

    std::vector<double> row{static_cast<double>(n), l1_mean_profile[ni],
                            ml1.mean, ml1.stderr_};
    for (std::size_t fi = 0; fi < fns.size(); ++fi) {
      std::vector<double> errs;
      for (const auto& r : results) errs.push_back(r.pairing_err[fi]);
      const auto me = mean_stderr(errs);
      row.push_back(me.mean);
      row.push_back(me.stderr_);
    }
    rep.table("summary").rows.push_back(row);

    // profile table: seed-averaged blocks against exact block averages
    char tname[32];
    std::snprintf(tname, sizeof tname, "profile_n%lld", static_cast<long long>(n));
    auto& pt = rep.table(tname);
    pt.columns = {"x_macro", "empirical", "reference", "abs_err"};
    for (std::size_t b = 0; b < nblocks; ++b) {
      const double xlo = edges[b], xhi = edges[b + 1];
      if (xhi < -cfg.eval_halfwidth || xlo > cfg.eval_halfwidth) continue;
      const double ref = sol.integrate(xlo / cfg.t_end, xhi / cfg.t_end) *
                         cfg.t_end / (xhi - xlo);
      pt.rows.push_back({0.5 * (xlo + xhi), mean_blocks[b], ref,
                         std::fabs(mean_blocks[b] - ref)});
    }
  }

  if (cfg.acceptance_checks) {
    bool decreasing = true;
    for (std::size_t i = 0; i + 1 < l1_mean_profile.size(); ++i)
      decreasing = decreasing && l1_mean_profile[i + 1] < l1_mean_profile[i];
    rep.add_check("l1-decreasing-in-n", "statistical", decreasing,
                  l1_mean_profile.back(), l1_mean_profile.front(),
                  "L1 of the seed-averaged profile decreases along the scale list");
    rep.add_check("l1-final-threshold", "statistical",
                  l1_mean_profile.back() < kHydroRiemannL1Max,
                  l1_mean_profile.back(), kHydroRiemannL1Max,
                  std::to_string(cfg.seeds) + " seeds, largest scale");
  }

  if (cfg.window_audit) {
    // One replica rerun with a 1.5x wider window under the same clock
    // labels; the L1 metric must be pathwise insensitive to the widening.
    HydroRiemannConfig acfg = cfg;
    acfg.mode = EvolveMode::keyed_field;
    acfg.n_list = {cfg.audit_n};
    const Window w1 = make_window(cfg.audit_n, half_width);
    const Window w2 = make_window(cfg.audit_n, 1.5 * half_width);
    const auto r1 = detail::hydro_seed_run(acfg, w1, u0, sol, fns, 0, 0);
    const auto r2 = detail::hydro_seed_run(acfg, w2, u0, sol, fns, 0, 0);
    const double diff = std::fabs(r1.l1 - r2.l1);
    rep.add_check("window-sufficiency", "exact", diff < kWindowAuditTol, diff,
                  kWindowAuditTol,
                  "n=" + std::to_string(cfg.audit_n) +
                      ", widening the window by 1.5x leaves L1 unchanged");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Hydrodynamics, Cauchy data (numerical reference)
// ---------------------------------------------------------------------------

struct HydroCauchyConfig {
  std::vector<double> u0_breaks = {-1.0, 0.0};
  std::vector<double> u0_values = {0.2, 0.8, 0.2};
  std::vector<std::int64_t> n_list = {200, 800, 3200};
  double t_end = 1.0;
  std::int64_t seeds = 20;
  double eval_halfwidth = 3.0;
  double margin = 1.0;
  double block_width = 0.05;
  double l1_max = kHydroCauchyL1Max;  // applies at the largest scale
  double paired_improvement_min = 0.8;
  std::uint64_t master = 20250810;
  int jobs = default_jobs();
};

inline Report run_hydro_cauchy(const HydroCauchyConfig& cfg) {
  Report rep;
  rep.experiment = "hydro-cauchy";
  rep.master_seed = cfg.master;
  const auto u0 = DensityProfile::table(cfg.u0_breaks, cfg.u0_values);
  const double half_width = cfg.eval_halfwidth + 2.0 * cfg.t_end + cfg.margin;

  auto& summary = rep.table("summary");
  summary.columns = {"n", "l1_mean_profile", "l1_seed_mean", "l1_seed_stderr"};
  std::vector<std::vector<double>> l1_by_scale;
  std::vector<double> l1_mean_profile;

  for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
    const std::int64_t n = cfg.n_list[ni];
    const Window win = make_window(n, half_width);

    // Godunov reference at dx <= 1/(4n), computed once per scale.
    const double dx = 1.0 / (4.0 * static_cast<double>(n));
    claw::GodunovRun ref(claw::make_grid(cfg.eval_halfwidth + 2.0 * cfg.t_end + 0.5,
                                         dx, u0));
    ref.advance(cfg.t_end);
    const auto& grid = ref.grid();
    std::vector<double> ref_edges(grid.u.size() + 1);
    for (std::size_t i = 0; i < ref_edges.size(); ++i) ref_edges[i] = grid.edge(i);

    const std::int64_t block_sites =
        std::max<std::int64_t>(8, std::llround(cfg.block_width * static_cast<double>(n)));
    std::vector<std::vector<double>> blocks(cfg.seeds);
    parallel_for(cfg.jobs, cfg.seeds, [&](std::int64_t seed) {
      Configuration c = sample_product(
          u0, win.topo,
          RngKey{sub_master(cfg.master, 600 + ni), StreamPurpose::initial_state,
                 kNoIndex, seed},
          win.eps, win.label_offset());
      evolve_in_place(c, cfg.t_end * static_cast<double>(n),
                      RngKey{sub_master(cfg.master, 610 + ni),
                             StreamPurpose::event_driver, kNoIndex, seed});
      blocks[seed] =
          block_density_profile(c, block_sites, win.eps, win.origin).values;
    });

    const auto geom = block_density_profile(Configuration(win.topo), block_sites,
                                            win.eps, win.origin);
    std::vector<double> edges(geom.values.size() + 1);
    for (std::size_t i = 0; i < edges.size(); ++i) edges[i] = geom.edge(i);

    std::vector<double> l1s(cfg.seeds);
    std::vector<double> mean_blocks(geom.values.size(), 0.0);
    for (std::int64_t s = 0; s < cfg.seeds; ++s) {
      l1s[s] = claw::l1_cells_vs_cells(edges, blocks[s], ref_edges, grid.u,
                                       -cfg.eval_halfwidth, cfg.eval_halfwidth);
      for (std::size_t b = 0; b < mean_blocks.size(); ++b)
        mean_blocks[b] += blocks[s][b];
    }
    for (auto& v : mean_blocks) v /= static_cast<double>(cfg.seeds);
    l1_mean_profile.push_back(
        claw::l1_cells_vs_cells(edges, mean_blocks, ref_edges, grid.u,
                                -cfg.eval_halfwidth, cfg.eval_halfwidth));
    const auto m = mean_stderr(l1s);
    summary.rows.push_back(
        {static_cast<double>(n), l1_mean_profile.back(), m.mean, m.stderr_});
    l1_by_scale.push_back(std::move(l1s));
  }

  rep.add_check("l1-final-threshold", "statistical",
                l1_mean_profile.back() < cfg.l1_max, l1_mean_profile.back(),
                cfg.l1_max, "seed-averaged profile vs numerical reference");
  for (std::size_t i = 0; i + 1 < l1_by_scale.size(); ++i) {
    std::int64_t improved = 0;
    for (std::int64_t s = 0; s < cfg.seeds; ++s)
      improved += l1_by_scale[i + 1][s] < l1_by_scale[i][s];
    const double frac =
        static_cast<double>(improved) / static_cast<double>(cfg.seeds);
    rep.add_check("paired-improvement-" + std::to_string(cfg.n_list[i]) + "-" +
                      std::to_string(cfg.n_list[i + 1]),
                  "statistical", frac >= cfg.paired_improvement_min, frac,
                  cfg.paired_improvement_min,
                  "fraction of seeds whose error shrinks with the scale");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Strong hydrodynamics: one clock realization drives every scale
// ---------------------------------------------------------------------------

struct StrongHydroConfig {
  double lambda = 0.5;
  double rho = 0.0;
  std::vector<std::int64_t> n_list = {200, 800, 3200};
  double t_end = 1.0;
  std::int64_t masters = 10;
  int snapshots = 25;
  double eval_halfwidth = 1.5;
  double margin = 1.0;
  std::vector<std::string> fns = {"hat", "gauss", "bump"};
  bool acceptance_checks = true;
  bool reproducibility_check = true;
  std::uint64_t master = 20250810;
  int jobs = default_jobs();
};

namespace detail {

// Pairing-error envelope over snapshots and test functions for one scale
// under one clock realization.
inline double strong_hydro_error(const StrongHydroConfig& cfg,
                                 const claw::RiemannSolution& sol,
                                 const DensityProfile& u0,
                                 const std::vector<TestFn>& fns,
                                 std::int64_t m, std::size_t ni,
                                 std::vector<double>* pairings_out = nullptr) {
  const std::int64_t n = cfg.n_list[ni];
  const Window win =
      make_window(n, cfg.eval_halfwidth + 2.0 * cfg.t_end + cfg.margin);
  Configuration c = sample_product(
      u0, win.topo,
      RngKey{sub_master(cfg.master, 700 + m), StreamPurpose::initial_state,
             kNoIndex, static_cast<std::int64_t>(ni)},
      win.eps, win.label_offset());
  KeyedFieldDriver driver(
      win.topo, RngKey{cfg.master, StreamPurpose::clock_field, kNoIndex, m},
      win.label_offset());
  double sup = 0.0;
  for (int k = 0; k < cfg.snapshots; ++k) {
    const double t =
        cfg.t_end * static_cast<double>(k) / static_cast<double>(cfg.snapshots - 1);
    driver.advance(c, t * static_cast<double>(n));
    for (const auto& f : fns) {
      const double p = empirical_pairing(c, f, win.eps, 0.0, win.origin);
      const double ref = t == 0.0 ? integrate_f_against_profile(f, u0)
                                  : integrate_f_against_solution(f, sol, t);
      sup = std::max(sup, std::fabs(p - ref));
      if (pairings_out) pairings_out->push_back(p);
    }
  }
  return sup;
}

}  // namespace detail

inline Report run_strong_hydro(const StrongHydroConfig& cfg) {
  Report rep;
  rep.experiment = "strong-hydro";
  rep.master_seed = cfg.master;
  const auto sol = claw::riemann_solve(cfg.lambda, cfg.rho);
  const auto u0 = DensityProfile::step(cfg.lambda, cfg.rho);
  std::vector<TestFn> fns;
  for (const auto& name : cfg.fns) fns.push_back(make_test_fn(name));

  std::vector<std::vector<double>> errs(cfg.masters,
                                        std::vector<double>(cfg.n_list.size()));
  parallel_for(cfg.jobs, cfg.masters, [&](std::int64_t m) {
    for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni)
      errs[m][ni] = detail::strong_hydro_error(cfg, sol, u0, fns, m, ni);
  });

  auto& t = rep.table("strong_errors");
  t.columns = {"master", "n", "sup_error"};
  int decreasing = 0;  // coarsest-to-finest decrease
  int monotone = 0;    // strictly decreasing at every consecutive pair
  for (std::int64_t m = 0; m < cfg.masters; ++m) {
    bool mono = true;
    for (std::size_t ni = 0; ni < cfg.n_list.size(); ++ni) {
      t.rows.push_back({static_cast<double>(m),
                        static_cast<double>(cfg.n_list[ni]), errs[m][ni]});
      if (ni > 0) mono = mono && errs[m][ni] < errs[m][ni - 1];
    }
    monotone += mono;
    decreasing += errs[m].back() < errs[m].front();
  }
  if (cfg.acceptance_checks) {
    // The sup error per scale is a maximum of a handful of correlated
    // fluctuations of size ~ n^{-1/2}; between consecutive scales (factor
    // two in sigma) it inverts with appreciable probability, so only the
    // coarsest-to-finest comparison admits a frozen threshold. The
    // consecutive-pair count is reported alongside.
    rep.add_check("pathwise-error-decreasing", "statistical",
                  decreasing >= kStrongHydroMinMonotone,
                  static_cast<double>(decreasing),
                  static_cast<double>(kStrongHydroMinMonotone),
                  "masters with sup error lower at the finest scale than the "
                  "coarsest, of " +
                      std::to_string(cfg.masters) + "; strictly monotone: " +
                      std::to_string(monotone));
  }
  if (cfg.reproducibility_check) {
    std::vector<double> p1, p2;
    detail::strong_hydro_error(cfg, sol, u0, fns, 0, 0, &p1);
    detail::strong_hydro_error(cfg, sol, u0, fns, 0, 0, &p2);
    rep.add_check("bit-reproducible", "exact", p1 == p2, p1 == p2 ? 0 : 1, 0,
                  "replaying a master reproduces every pairing bit-exactly");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Half-line relaxation (exploratory)
// ---------------------------------------------------------------------------

struct HalflineConfig {
  std::int64_t sites = 20480;
  std::vector<std::int64_t> ells = {64, 256, 1024};
  double rho0 = 0.5;
  double t_burn = 500.0;
  double sample_dt = 2.0;
  std::int64_t samples = 256;
  std::int64_t replicas = 4;
  int batches = 8;
  std::int64_t wall_window = 64;
  std::uint64_t master = 20250810;
  int jobs = default_jobs();
};

inline Report run_halfline(const HalflineConfig& cfg) {
  for (std::int64_t ell : cfg.ells)
    if (ell >= cfg.sites / 10)
      throw ConfigError("halfline: every ell must stay below sites/10");
  Report rep;
  rep.experiment = "halfline";
  rep.master_seed = cfg.master;
  const Topology topo = Topology::segment(cfg.sites);

  const std::size_t ne = cfg.ells.size();
  // fluct[r][e][s], wall[r][s]
  std::vector<std::vector<std::vector<double>>> fluct(
      cfg.replicas, std::vector<std::vector<double>>(ne));
  std::vector<std::vector<double>> wall(cfg.replicas);
  parallel_for(cfg.jobs, cfg.replicas, [&](std::int64_t r) {
    Configuration c = sample_product(
        DensityProfile::constant(cfg.rho0), topo,
        RngKey{sub_master(cfg.master, 800), StreamPurpose::initial_state,
               kNoIndex, r},
        1.0);
    GillespieDriver driver(topo, RngKey{sub_master(cfg.master, 801),
                                        StreamPurpose::event_driver, kNoIndex, r});
    driver.advance(c, cfg.t_burn);
    for (std::int64_t s = 0; s < cfg.samples; ++s) {
      driver.advance(c, cfg.t_burn + cfg.sample_dt * static_cast<double>(s + 1));
      for (std::size_t e = 0; e < ne; ++e)
        fluct[r][e].push_back(interval_fluctuation(c, cfg.ells[e]));
      wall[r].push_back(static_cast<double>(c.count_in(1, cfg.wall_window)) /
                        static_cast<double>(cfg.wall_window));
    }
  });

  auto& vt = rep.table("variance");
  vt.columns = {"ell", "variance", "ci_half", "variance_over_ell"};
  for (std::size_t e = 0; e < ne; ++e) {
    // batch-means variance estimates pooled over replicas
    std::vector<double> est;
    for (std::int64_t r = 0; r < cfg.replicas; ++r) {
      const auto& xs = fluct[r][e];
      const std::int64_t bsz = cfg.samples / cfg.batches;
      for (int b = 0; b < cfg.batches; ++b) {
        double mean = 0.0;
        for (std::int64_t i = 0; i < bsz; ++i) mean += xs[b * bsz + i];
        mean /= static_cast<double>(bsz);
        double ss = 0.0;
        for (std::int64_t i = 0; i < bsz; ++i) {
          const double d = xs[b * bsz + i] - mean;
          ss += d * d;
        }
        est.push_back(ss / static_cast<double>(bsz - 1));
      }
    }
    const auto m = mean_stderr(est);
    const double ell = static_cast<double>(cfg.ells[e]);
    vt.rows.push_back({ell, m.mean, 1.96 * m.stderr_, m.mean / ell});
    rep.add_check("variance-ell-" + std::to_string(cfg.ells[e]), "exploratory",
                  true, m.mean, 0.0, "interval fluctuation variance estimate");
  }

  auto& wt = rep.table("wall_density");
  wt.columns = {"t", "value", "stderr"};
  for (std::int64_t s = 0; s < cfg.samples; s += 8) {
    std::vector<double> vals;
    for (std::int64_t r = 0; r < cfg.replicas; ++r) vals.push_back(wall[r][s]);
    const auto m = mean_stderr(vals);
    wt.rows.push_back(
        {cfg.t_burn + cfg.sample_dt * static_cast<double>(s + 1), m.mean, m.stderr_});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Critical fluctuation scan (exploratory)
// ---------------------------------------------------------------------------

struct FluctuationConfig {
  std::vector<double> eps_list = {0.01, 0.005};
  std::vector<double> t_list = {0.0, 0.05};
  std::vector<std::string> fns = {"hat"};
  std::int64_t replicas = 64;
  std::int64_t replicas_t0 = 10000;
  double speed_margin = 3.0;
  std::uint64_t master = 20250810;
  int jobs = default_jobs();
};

inline Report run_fluctuations(const FluctuationConfig& cfg) {
  Report rep;
  rep.experiment = "fluctuations";
  rep.master_seed = cfg.master;
  std::vector<TestFn> fns;
  for (const auto& name : cfg.fns) fns.push_back(make_test_fn(name));

  auto& vt = rep.table("fluct_variance");
  vt.columns = {"eps",      "t",   "s_micro",  "fn",       "variance",
                "ci_half",  "var_diff", "reference"};

  std::uint64_t stage = 0;
  for (double eps : cfg.eps_list) {
    for (double t : cfg.t_list) {
      ++stage;
      double s = 0.0;
      if (t > 0) {
        const auto st = scaling_time(t, eps);
        s = st.s;
        if (!st.clamped) {
          const double residual =
              std::fabs(eps * eps * s * std::sqrt(std::log(s)) - t) / t;
          rep.add_check(
              "scaling-time-residual-" + std::to_string(stage), "exact",
              residual < kScalingResidualMax, residual, kScalingResidualMax,
              "defining equation solved to relative residual");
        }
      }
      // window in micro coordinates, covering both the t=0 and shifted frames
      double flo = fns[0].lo, fhi = fns[0].hi;
      for (const auto& f : fns) {
        flo = std::min(flo, f.lo);
        fhi = std::max(fhi, f.hi);
      }
      const double pad = cfg.speed_margin * s + 8.0;
      const std::int64_t micro_lo =
          static_cast<std::int64_t>(std::floor(flo / eps - pad));
      const std::int64_t micro_hi =
          static_cast<std::int64_t>(std::ceil(s + fhi / eps + pad));
      const Topology topo = Topology::segment(micro_hi - micro_lo + 1);
      const std::int64_t origin = 1 - micro_lo;  // site of micro x = 0
      const std::int64_t reps = t == 0.0 ? cfg.replicas_t0 : cfg.replicas;

      std::vector<std::vector<double>> y_t(fns.size(),
                                           std::vector<double>(reps));
      std::vector<std::vector<double>> y_0(fns.size(),
                                           std::vector<double>(reps));
      parallel_for(cfg.jobs, reps, [&](std::int64_t r) {
        Configuration c = sample_product(
            DensityProfile::constant(0.5), topo,
            RngKey{sub_master(cfg.master, 900 + stage),
                   StreamPurpose::initial_state, kNoIndex, r},
            1.0);
        for (std::size_t fi = 0; fi < fns.size(); ++fi)
          y_0[fi][r] = fluctuation_pairing(c, fns[fi], eps, 0.0, origin);
        if (t > 0) {
          evolve_in_place(c, s,
                          RngKey{sub_master(cfg.master, 910 + stage),
                                 StreamPurpose::event_driver, kNoIndex, r});
          for (std::size_t fi = 0; fi < fns.size(); ++fi)
            y_t[fi][r] = fluctuation_pairing(c, fns[fi], eps, s, origin);
        } else {
          for (std::size_t fi = 0; fi < fns.size(); ++fi) y_t[fi][r] = y_0[fi][r];
        }
      });

      for (std::size_t fi = 0; fi < fns.size(); ++fi) {
        double mean = 0.0;
        for (double v : y_t[fi]) mean += v;
        mean /= static_cast<double>(reps);
        double var = 0.0;
        for (double v : y_t[fi]) var += (v - mean) * (v - mean);
        var /= static_cast<double>(reps - 1);
        const double ci = 1.96 * var * std::sqrt(2.0 / static_cast<double>(reps - 1));
        double vdiff = 0.0;
        if (t > 0) {
          double dm = 0.0;
          for (std::int64_t r = 0; r < reps; ++r) dm += y_t[fi][r] - y_0[fi][r];
          dm /= static_cast<double>(reps);
          for (std::int64_t r = 0; r < reps; ++r) {
            const double d = y_t[fi][r] - y_0[fi][r] - dm;
            vdiff += d * d;
          }
          vdiff /= static_cast<double>(reps - 1);
        }
        // exact stationary-marginal variance on the shifted lattice
        double ref = 0.0;
        {
          const std::int64_t xlo = static_cast<std::int64_t>(
              std::ceil((fns[fi].lo + eps * s) / eps));
          const std::int64_t xhi = static_cast<std::int64_t>(
              std::floor((fns[fi].hi + eps * s) / eps));
          for (std::int64_t x = xlo; x <= xhi; ++x) {
            const double fv = fns[fi](eps * static_cast<double>(x) - eps * s);
            ref += fv * fv;
          }
          ref *= 0.25 * eps;
        }
        vt.rows.push_back({eps, t, s, static_cast<double>(fi), var, ci, vdiff, ref});
        if (t == 0.0 && fi == 0) {
          const double rel = std::fabs(var - ref) / ref;
          rep.add_check("t0-variance-eps-" + std::to_string(stage), "statistical",
                        rel <= kFluctT0RelTol, rel, kFluctT0RelTol,
                        "product-measure variance formula, " +
                            std::to_string(reps) + " replicas");
        } else {
          rep.add_check("variance-curve-" + std::to_string(stage) + "-" +
                            fns[fi].name,
                        "exploratory", true, var, 0.0, "estimate with CI");
        }
      }
    }
  }
  return rep;
}

}  // namespace dep
