#pragma once

// Single-copy dynamics: the update map Phi_x, gated event application, and
// two evolution drivers that realize the same law.
//
//   keyed_field  - per-site keyed Poisson streams merged through a heap.
//                  Mandatory wherever one noise realization must be shared
//                  (coupled copies, common-noise scaling runs).
//   gillespie    - aggregate event stream: per-interval Poisson counts with
//                  iid uniform (site, alpha) marks. Same law, different
//                  paths, roughly 2x faster for single-copy statistics.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dep/clocks.hpp"
#include "dep/configuration.hpp"
#include "dep/rng.hpp"
#include "dep/topology.hpp"

namespace dep {

enum class MoveKind { noop, swap_adjacent, swap_long };

struct UpdateOutcome {
  MoveKind kind = MoveKind::noop;
  std::int64_t site = 0;     // x of Phi_x
  std::int64_t partner = 0;  // exchange partner (x+1 or x+2, canonical)
  bool changed = false;      // occupancies actually differed
  bool moved_right = false;  // a particle crossed rightward

  int changed_site_count() const { return changed ? 2 : 0; }
};

// Phi_x in place: exchange (x, x+1) if they differ, else (x, x+2).
// On a segment, a missing partner blocks the whole move.
inline UpdateOutcome apply_phi(Configuration& cfg, std::int64_t x) {
  const Topology& topo = cfg.topology();
  UpdateOutcome out;
  out.site = x;
  const std::int64_t y1 = topo.right(x, 1);
  if (y1 < 0) return out;
  const int a = cfg.get(x);
  const int b = cfg.get(y1);
  if (a != b) {
    cfg.flip(x);
    cfg.flip(y1);
    out.kind = MoveKind::swap_adjacent;
    out.partner = y1;
    out.changed = true;
    out.moved_right = (a == 1);
    return out;
  }
  const std::int64_t y2 = topo.right(x, 2);
  if (y2 < 0) return out;
  out.kind = MoveKind::swap_long;
  out.partner = y2;
  const int c = cfg.get(y2);
  if (a != c) {
    cfg.flip(x);
    cfg.flip(y2);
    out.changed = true;
    out.moved_right = (a == 1);  // 110 -> 011; else 001 -> 100
  }
  return out;
}

inline Configuration phi(const Configuration& cfg, std::int64_t x) {
  if (!cfg.topology().contains(x))
    throw std::invalid_argument("phi: site outside domain");
  Configuration next = cfg;
  apply_phi(next, x);
  return next;
}

// Gate rule: the mark (site, alpha) fires iff the occupancy matches alpha.
inline UpdateOutcome apply_event(Configuration& cfg, std::int64_t site, int alpha) {
  if (cfg.get(site) == alpha) return apply_phi(cfg, site);
  UpdateOutcome out;
  out.site = site;
  return out;
}

inline Configuration step_event(const Configuration& cfg, const ClockEvent& ev) {
  if (!cfg.topology().contains(ev.site))
    throw std::invalid_argument("step_event: site outside domain");
  Configuration next = cfg;
  apply_event(next, ev.site, ev.alpha);
  return next;
}

// Signed crossing counts per bond. Bond k sits between site k and its right
// neighbor (slot-indexed); rings have L bonds, segments L-1.
class CurrentTally {
 public:
  explicit CurrentTally(const Topology& topo)
      : bonds_(topo.is_ring() ? topo.size() : topo.size() - 1, 0),
        ring_(topo.is_ring()) {}

  void add(const Topology& topo, const UpdateOutcome& out) {
    if (!out.changed) return;
    const int d = out.moved_right ? 1 : -1;
    const std::int64_t b0 = topo.slot(out.site);
    bonds_[b0] += d;
    if (out.kind == MoveKind::swap_long) {
      std::int64_t b1 = b0 + 1;
      if (ring_ && b1 == static_cast<std::int64_t>(bonds_.size())) b1 = 0;
      bonds_[b1] += d;
    }
  }

  std::int64_t at(std::int64_t bond_slot) const { return bonds_[bond_slot]; }
  std::int64_t total() const {
    std::int64_t s = 0;
    for (auto v : bonds_) s += v;
    return s;
  }
  std::size_t bond_count() const { return bonds_.size(); }

 private:
  std::vector<std::int64_t> bonds_;
  bool ring_;
};

struct NullSink {
  void operator()(const ClockEvent&, const UpdateOutcome&) const {}
};

// Resumable keyed-field driver over one window. Clock marks are keyed by
// site label (slot + label_offset), so overlapping windows and all copies
// driven by the same key consume identical marks.
class KeyedFieldDriver {
 public:
  KeyedFieldDriver(const Topology& topo, const RngKey& clock_key,
                   std::int64_t label_offset = 0)
      : topo_(topo), field_(clock_key, topo.size(), label_offset) {}

  double now() const { return field_.now(); }

  template <class Sink = NullSink>
  void advance(Configuration& cfg, double t_end, Sink&& sink = Sink{}) {
    const std::int64_t first = topo_.first_site();
    field_.drain(t_end, [&](double time, std::int64_t site, int alpha) {
      const std::int64_t s = first + site;
      const UpdateOutcome out = apply_event(cfg, s, alpha);
      sink(ClockEvent{time, s, alpha}, out);
    });
  }

  // For coupled evolution: raw marks, caller applies them per copy.
  std::optional<ClockEvent> next_mark(double t_max) {
    auto ev = field_.next(t_max);
    if (!ev) return std::nullopt;
    return ClockEvent{ev->time, topo_.first_site() + ev->site, ev->alpha};
  }

 private:
  Topology topo_;
  ClockField field_;
};

// Aggregate driver: rate 2L total, uniform (site, alpha) marks. Event times
// within an interval are exchangeable, so only their count is realized per
// interval; one u64 carries the site (high bits) and the gate value (low
// bit) of each mark.
class GillespieDriver {
 public:
  GillespieDriver(const Topology& topo, const RngKey& key)
      : topo_(topo), rng_(key) {}

  double now() const { return now_; }

  template <class Sink = NullSink>
  void advance(Configuration& cfg, double t_end, Sink&& sink = Sink{}) {
    const std::int64_t L = topo_.size();
    const std::int64_t first = topo_.first_site();
    const double dt = t_end - now_;
    if (dt < 0) throw std::invalid_argument("GillespieDriver: time moves forward");
    const std::int64_t n_events = rng_.poisson(2.0 * static_cast<double>(L) * dt);
    for (std::int64_t k = 0; k < n_events; ++k) {
      const std::uint64_t word = rng_.next_u64();
      const std::int64_t site =
          first + static_cast<std::int64_t>(
                      static_cast<std::uint64_t>(
                          (static_cast<unsigned __int128>(word >> 1) * L) >> 63));
      const int alpha = static_cast<int>(word & 1u);
      const UpdateOutcome out = apply_event(cfg, site, alpha);
      sink(ClockEvent{t_end, site, alpha}, out);
    }
    now_ = t_end;
  }

 private:
  Topology topo_;
  SequentialRng rng_;
  double now_ = 0.0;
};

enum class EvolveMode { keyed_field, gillespie };

struct EvolveOptions {
  EvolveMode mode = EvolveMode::gillespie;
  std::int64_t clock_label_offset = 0;  // keyed mode only
  CurrentTally* tally = nullptr;
  std::vector<std::pair<ClockEvent, UpdateOutcome>>* event_log = nullptr;
};

inline void evolve_in_place(Configuration& cfg, double t_end, const RngKey& key,
                            const EvolveOptions& opt = {}) {
  if (t_end < 0) throw std::invalid_argument("evolve: t_end must be >= 0");
  const Topology& topo = cfg.topology();
  auto sink = [&](const ClockEvent& ev, const UpdateOutcome& out) {
    if (opt.tally) opt.tally->add(topo, out);
    if (opt.event_log) opt.event_log->emplace_back(ev, out);
  };
  if (opt.mode == EvolveMode::keyed_field) {
    KeyedFieldDriver driver(topo, key, opt.clock_label_offset);
    driver.advance(cfg, t_end, sink);
  } else {
    GillespieDriver driver(topo, key);
    driver.advance(cfg, t_end, sink);
  }
}

inline Configuration evolve(const Configuration& cfg, double t_end,
                            const RngKey& key, const EvolveOptions& opt = {}) {
  Configuration next = cfg;
  evolve_in_place(next, t_end, key, opt);
  return next;
}

}  // namespace dep
