#pragma once

// Shared-clock coupling of several copies, discrepancy bookkeeping, the
// stability functional Delta, the lattice-level attractiveness inequalities,
// and an empirical finite-propagation probe.

#include <array>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dep/configuration.hpp"
#include "dep/dynamics.hpp"
#include "dep/rng.hpp"
#include "dep/topology.hpp"

namespace dep {

struct SignedDiscrepancy {
  std::int64_t site;
  int sign;  // +1 iff zeta(site) > xi(site)
};

// Sites where the ordered pair (zeta, xi) disagrees, with signs, ascending.
inline std::vector<SignedDiscrepancy> discrepancies(const Configuration& zeta,
                                                    const Configuration& xi) {
  if (!(zeta.topology() == xi.topology()))
    throw std::invalid_argument("discrepancies: topology mismatch");
  std::vector<SignedDiscrepancy> out;
  const auto& zw = zeta.words();
  const auto& xw = xi.words();
  const std::int64_t first = zeta.topology().first_site();
  for (std::size_t w = 0; w < zw.size(); ++w) {
    std::uint64_t diff = zw[w] ^ xw[w];
    while (diff) {
      const int bit = std::countr_zero(diff);
      diff &= diff - 1;
      const std::int64_t slot = static_cast<std::int64_t>(w) * 64 + bit;
      const int sign = (zw[w] >> bit) & 1u ? +1 : -1;
      out.push_back({first + slot, sign});
    }
  }
  return out;
}

// sup over x of |sum_{y <= x} (zeta(y) - xi(y))|, scanning the window left
// to right. On a ring the prefix order starts at the fixed reference cut
// (the bond entering site 0), which requires equal particle numbers.
inline std::int64_t delta(const Configuration& zeta, const Configuration& xi) {
  if (!(zeta.topology() == xi.topology()))
    throw std::invalid_argument("delta: topology mismatch");
  if (zeta.topology().is_ring() &&
      zeta.particle_count() != xi.particle_count())
    throw std::invalid_argument("delta: ring cut needs equal particle counts");
  std::int64_t prefix = 0;
  std::int64_t best = 0;
  const std::int64_t lo = zeta.topology().first_site();
  const std::int64_t hi = zeta.topology().last_site();
  for (std::int64_t s = lo; s <= hi; ++s) {
    prefix += zeta.get(s) - xi.get(s);
    const std::int64_t a = prefix < 0 ? -prefix : prefix;
    if (a > best) best = a;
  }
  return best;
}

// Range (max - min) of the discrepancy height walk. Invariant under the
// choice of cut on a ring with equal particle counts, which makes it the
// per-event auditable form of Delta there; on a segment it brackets
// delta() within a factor of two.
inline std::int64_t cyclic_height_range(const Configuration& zeta,
                                        const Configuration& xi) {
  std::int64_t prefix = 0, lo = 0, hi = 0;
  const std::int64_t a = zeta.topology().first_site();
  const std::int64_t b = zeta.topology().last_site();
  for (std::int64_t s = a; s <= b; ++s) {
    prefix += zeta.get(s) - xi.get(s);
    if (prefix < lo) lo = prefix;
    if (prefix > hi) hi = prefix;
  }
  return hi - lo;
}

// One shared mark applied to every copy through its own gate.
inline void step_coupled(std::vector<Configuration>& copies, std::int64_t site,
                         int alpha) {
  for (auto& c : copies) apply_event(c, site, alpha);
}

// J copies on one topology driven by a single clock realization. Marks can
// be pulled raw (for auditing) or applied to every copy at once.
class CoupledEnsemble {
 public:
  CoupledEnsemble(std::vector<Configuration> copies, const RngKey& clock_key,
                  std::int64_t label_offset = 0)
      : copies_(std::move(copies)),
        driver_(copies_.front().topology(), clock_key, label_offset) {
    for (const auto& c : copies_)
      if (!(c.topology() == copies_.front().topology()))
        throw std::invalid_argument("CoupledEnsemble: topology mismatch");
  }

  std::vector<Configuration>& copies() { return copies_; }
  const std::vector<Configuration>& copies() const { return copies_; }
  double now() const { return driver_.now(); }

  std::optional<ClockEvent> next_mark(double t_max) {
    return driver_.next_mark(t_max);
  }

  // Pulls the next shared mark and applies it to every copy.
  std::optional<ClockEvent> step(double t_max) {
    auto mark = driver_.next_mark(t_max);
    if (mark) step_coupled(copies_, mark->site, mark->alpha);
    return mark;
  }

  void advance(double t_max) {
    while (step(t_max)) {
    }
  }

 private:
  std::vector<Configuration> copies_;
  KeyedFieldDriver driver_;
};

struct AuditOptions {
  int series_samples = 33;
  bool stop_when_equal = false;  // stop early once the copies coincide
};

struct AuditReport {
  bool ok = true;
  std::string violation;
  ClockEvent bad_event{0.0, 0, 0};
  std::string local_patterns;
  std::int64_t events = 0;
  std::int64_t annihilations = 0;
  std::int64_t initial_count = 0;
  std::int64_t final_count = 0;
  bool order_audited = false;
  bool delta_audited = false;
  std::int64_t delta_initial = 0;
  std::int64_t delta_final = 0;
  std::int64_t wrap_rebaselines = 0;
  std::vector<std::array<double, 3>> series;  // (t, count, delta or -1)
};

namespace detail {

// Signs of discrepancies at the 5-site neighborhood of x, in local order.
inline void window_signs(const Configuration& zeta, const Configuration& xi,
                         std::int64_t x, std::array<std::int8_t, 5>& signs,
                         int& n) {
  const Topology& topo = zeta.topology();
  n = 0;
  for (int d = -2; d <= 2; ++d) {
    const std::int64_t s =
        d < 0 ? topo.left(x, -d) : topo.right(x, d);
    if (s < 0) continue;
    const int diff = zeta.get(s) - xi.get(s);
    if (diff != 0) signs[n++] = static_cast<std::int8_t>(diff);
  }
}

inline bool is_subsequence(const std::array<std::int8_t, 5>& sub, int ns,
                           const std::array<std::int8_t, 5>& seq, int n) {
  int i = 0;
  for (int j = 0; j < n && i < ns; ++j)
    if (seq[j] == sub[i]) ++i;
  return i == ns;
}

inline std::string window_patterns(const Configuration& zeta,
                                   const Configuration& xi, std::int64_t x) {
  const Topology& topo = zeta.topology();
  std::string zs = "zeta[x-2..x+2]=", xs = " xi[x-2..x+2]=";
  for (int d = -2; d <= 2; ++d) {
    const std::int64_t s = d < 0 ? topo.left(x, -d) : topo.right(x, d);
    zs += s < 0 ? '_' : static_cast<char>('0' + zeta.get(s));
    xs += s < 0 ? '_' : static_cast<char>('0' + xi.get(s));
  }
  return zs + xs;
}

}  // namespace detail

// Evolves the pair under shared clocks, asserting at every mark:
//   - discrepancy signs in the event window stay an order-preserving
//     subsequence of what they were (no sign flips, no position swaps),
//   - removals come in balanced (+,-) pairs (annihilation only),
//   - pointwise order is preserved when the initial pair is ordered,
//   - Delta cannot increase. On a segment this is the literal prefix-sup;
//     on a ring the cut-free height range is asserted per event, and the
//     fixed-cut Delta is additionally asserted between cut-crossing events
//     (a crossing re-baselines it, counted in wrap_rebaselines).
inline AuditReport coupled_evolve_audited(Configuration& zeta, Configuration& xi,
                                          double t_end, const RngKey& clock_key,
                                          const AuditOptions& opt = {}) {
  const Topology& topo = zeta.topology();
  if (!(topo == xi.topology()))
    throw std::invalid_argument("coupled_evolve_audited: topology mismatch");

  AuditReport rep;
  rep.order_audited = xi.dominated_by(zeta);
  const bool equal_counts = zeta.particle_count() == xi.particle_count();
  rep.delta_audited = !topo.is_ring() || equal_counts;

  std::int64_t count = zeta.hamming_distance(xi);
  rep.initial_count = count;

  const bool ring = topo.is_ring();
  std::int64_t range_baseline =
      rep.delta_audited ? cyclic_height_range(zeta, xi) : 0;
  std::int64_t cut_baseline = rep.delta_audited && (!ring || equal_counts)
                                  ? delta(zeta, xi)
                                  : 0;
  rep.delta_initial = cut_baseline;

  const double sample_dt =
      opt.series_samples > 1 ? t_end / (opt.series_samples - 1) : t_end + 1;
  double next_sample = 0.0;
  auto sample = [&](double t) {
    rep.series.push_back(
        {t, static_cast<double>(count),
         rep.delta_audited ? static_cast<double>(cut_baseline) : -1.0});
  };

  KeyedFieldDriver driver(topo, clock_key);
  std::array<std::int8_t, 5> before{}, after{};
  int nb = 0, na = 0;

  while (auto mark = driver.next_mark(t_end)) {
    while (next_sample <= mark->time && next_sample <= t_end) {
      sample(next_sample);
      next_sample += sample_dt;
    }
    ++rep.events;
    const std::int64_t x = mark->site;
    detail::window_signs(zeta, xi, x, before, nb);
    const UpdateOutcome oz = apply_event(zeta, x, mark->alpha);
    const UpdateOutcome ox = apply_event(xi, x, mark->alpha);
    if (!oz.changed && !ox.changed) continue;
    detail::window_signs(zeta, xi, x, after, na);

    auto fail = [&](const char* what) {
      rep.ok = false;
      rep.violation = what;
      rep.bad_event = *mark;
      rep.local_patterns = detail::window_patterns(zeta, xi, x);
    };

    int plus_b = 0, plus_a = 0;
    for (int i = 0; i < nb; ++i) plus_b += before[i] > 0;
    for (int i = 0; i < na; ++i) plus_a += after[i] > 0;
    const int minus_b = nb - plus_b, minus_a = na - plus_a;

    if (!detail::is_subsequence(after, na, before, nb)) {
      fail("discrepancy signs not an order-preserving subsequence");
      return rep;
    }
    if (plus_b - plus_a != minus_b - minus_a) {
      fail("unbalanced discrepancy removal");
      return rep;
    }
    rep.annihilations += plus_b - plus_a;
    count -= (nb - na);

    if (rep.order_audited && !xi.dominated_by(zeta)) {
      fail("pointwise order violated");
      return rep;
    }

    if (rep.delta_audited) {
      const std::int64_t range = cyclic_height_range(zeta, xi);
      if (range > range_baseline) {
        fail("height range (Delta) increased");
        return rep;
      }
      range_baseline = range;
      if (ring) {
        const bool wraps = x > topo.size() - 3;  // window {x, x+1, x+2} crosses cut
        const std::int64_t d = delta(zeta, xi);
        if (wraps) {
          cut_baseline = d;
          ++rep.wrap_rebaselines;
        } else if (d > cut_baseline) {
          fail("fixed-cut Delta increased without cut crossing");
          return rep;
        } else {
          cut_baseline = d;
        }
      } else {
        const std::int64_t d = delta(zeta, xi);
        if (d > cut_baseline) {
          fail("Delta increased");
          return rep;
        }
        cut_baseline = d;
      }
    }

    if (opt.stop_when_equal && count == 0) break;
  }
  while (next_sample <= t_end) {
    sample(next_sample);
    next_sample += sample_dt;
  }
  rep.final_count = count;
  rep.delta_final = cut_baseline;
  return rep;
}

// Lattice-level attractiveness inequalities for an ordered pair, evaluated
// in exact integer arithmetic at every site of [lo, hi].
struct GsCheckResult {
  bool ok = true;
  std::int64_t sites_checked = 0;
  std::int64_t violation_site = -1;
  int violated_condition = 0;
  std::int64_t nontrivial_equalities = 0;  // condition-1 sites with lhs == rhs > 0
};

namespace detail {

inline int occ(const Configuration& c, std::int64_t s) {
  return s < 0 ? 0 : c.get(s);
}

// Gamma_eta(x, x+rel): 1 for nearest neighbors, eta(x+1) for rel = 2,
// 1 - eta(x-1) for rel = -2, else 0. Absent sites contribute 0.
inline int gamma_rate(const Configuration& eta, std::int64_t x, int rel) {
  switch (rel) {
    case -1:
    case 1:
      return 1;
    case 2: {
      const std::int64_t mid = eta.topology().right(x, 1);
      return occ(eta, mid);
    }
    case -2: {
      const std::int64_t mid = eta.topology().left(x, 1);
      return mid < 0 ? 0 : 1 - eta.get(mid);
    }
    default:
      return 0;
  }
}

}  // namespace detail

// Both sides of the first condition at a target hole y of zeta.
inline std::pair<int, int> gs_condition1_sides(const Configuration& xi,
                                               const Configuration& zeta,
                                               std::int64_t y) {
  const Topology& topo = zeta.topology();
  int lhs = 0, rhs = 0;
  for (int rel : {-2, -1, 1, 2}) {
    const std::int64_t x = rel < 0 ? topo.left(y, -rel) : topo.right(y, rel);
    if (x < 0) continue;
    const int gxi = detail::gamma_rate(xi, x, -rel);
    const int gze = detail::gamma_rate(zeta, x, -rel);
    const int pos = gxi - gze > 0 ? gxi - gze : 0;
    lhs += xi.get(x) * pos;
    rhs += zeta.get(x) * (1 - xi.get(x)) * gze;
  }
  return {lhs, rhs};
}

// Both sides of the second condition at a particle x of xi.
inline std::pair<int, int> gs_condition2_sides(const Configuration& xi,
                                               const Configuration& zeta,
                                               std::int64_t x) {
  const Topology& topo = zeta.topology();
  int lhs = 0, rhs = 0;
  for (int rel : {-2, -1, 1, 2}) {
    const std::int64_t y = rel < 0 ? topo.left(x, -rel) : topo.right(x, rel);
    if (y < 0) continue;
    const int gxi = detail::gamma_rate(xi, x, rel);
    const int gze = detail::gamma_rate(zeta, x, rel);
    const int pos = gze - gxi > 0 ? gze - gxi : 0;
    lhs += (1 - zeta.get(y)) * pos;
    rhs += zeta.get(y) * (1 - xi.get(y)) * gxi;
  }
  return {lhs, rhs};
}

inline GsCheckResult check_gs_inequalities(const Configuration& xi,
                                           const Configuration& zeta,
                                           std::int64_t lo, std::int64_t hi) {
  if (!(zeta.topology() == xi.topology()))
    throw std::invalid_argument("check_gs_inequalities: topology mismatch");
  if (!xi.dominated_by(zeta))
    throw std::invalid_argument("check_gs_inequalities: pair not ordered");
  GsCheckResult res;
  for (std::int64_t s = lo; s <= hi; ++s) {
    if (zeta.get(s) == 0) {
      const auto [lhs, rhs] = gs_condition1_sides(xi, zeta, s);
      if (lhs > rhs) {
        res.ok = false;
        res.violation_site = s;
        res.violated_condition = 1;
        return res;
      }
      if (lhs == rhs && lhs > 0) ++res.nontrivial_equalities;
    }
    if (xi.get(s) == 1) {
      const auto [lhs, rhs] = gs_condition2_sides(xi, zeta, s);
      if (lhs > rhs) {
        res.ok = false;
        res.violation_site = s;
        res.violated_condition = 2;
        return res;
      }
    }
    ++res.sites_checked;
  }
  return res;
}

inline GsCheckResult check_gs_inequalities(const Configuration& xi,
                                           const Configuration& zeta) {
  return check_gs_inequalities(xi, zeta, zeta.topology().first_site(),
                               zeta.topology().last_site());
}

struct FinitePropagationResult {
  double frequency = 0.0;
  std::int64_t trials = 0;
  std::int64_t agreeing = 0;
  std::int64_t inner_lo = 0;
  std::int64_t inner_hi = 0;
};

// Couples the two initial states with shared clocks and reports the fraction
// of trials whose copies agree on [lo + vt, hi - vt] at every event time.
inline FinitePropagationResult finite_propagation_test(
    const Configuration& zeta0, const Configuration& xi0, std::int64_t lo,
    std::int64_t hi, double t, double v, std::int64_t trials,
    const RngKey& clock_key) {
  const Topology& topo = zeta0.topology();
  if (!(topo == xi0.topology()))
    throw std::invalid_argument("finite_propagation_test: topology mismatch");
  if (!(t > 0) || !(t < static_cast<double>(hi - lo) / (2.0 * v)))
    throw std::invalid_argument(
        "finite_propagation_test: need 0 < t < (hi-lo)/(2v)");
  for (std::int64_t s = lo; s <= hi; ++s)
    if (zeta0.get(s) != xi0.get(s))
      throw std::invalid_argument(
          "finite_propagation_test: states differ on the agreement interval");

  FinitePropagationResult res;
  res.inner_lo = static_cast<std::int64_t>(std::ceil(lo + v * t));
  res.inner_hi = static_cast<std::int64_t>(std::floor(hi - v * t));
  res.trials = trials;
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    Configuration zeta = zeta0, xi = xi0;
    KeyedFieldDriver driver(topo, clock_key.with_replica(trial));
    bool agree = true;
    while (auto mark = driver.next_mark(t)) {
      apply_event(zeta, mark->site, mark->alpha);
      apply_event(xi, mark->site, mark->alpha);
      const std::int64_t x = mark->site;
      if (x + 2 < res.inner_lo || x > res.inner_hi) continue;
      for (std::int64_t s = std::max(x, res.inner_lo);
           s <= std::min(x + 2, res.inner_hi); ++s) {
        // on a ring x+2 may wrap; compare canonical sites
        const std::int64_t cs = topo.is_ring() && s >= topo.size() ? s - topo.size() : s;
        if (zeta.get(cs) != xi.get(cs)) {
          agree = false;
          break;
        }
      }
      if (!agree) break;
    }
    res.agreeing += agree;
  }
  res.frequency =
      trials > 0 ? static_cast<double>(res.agreeing) / static_cast<double>(trials) : 0.0;
  return res;
}

}  // namespace dep
