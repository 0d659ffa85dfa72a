#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dep/rng.hpp"

namespace dep {

// A realized Poisson mark: clock omega_alpha(site) rings at `time`.
struct ClockEvent {
  double time;
  std::int64_t site;
  int alpha;
};

namespace detail {

// Substream key of the rate-1 process omega_alpha at a given (labeled) site.
inline std::uint64_t alpha_stream_key(std::uint64_t site_key, int alpha) {
  return absorb(site_key, 0x40u + static_cast<std::uint64_t>(alpha));
}

inline bool event_before(const ClockEvent& a, const ClockEvent& b) {
  if (a.time != b.time) return a.time < b.time;
  if (a.site != b.site) return a.site < b.site;
  return a.alpha < b.alpha;
}

}  // namespace detail

// Marks of the two independent rate-1 Poisson processes at one site, merged
// in time order over (0, horizon]. Pure function of (key, site, horizon).
inline std::vector<ClockEvent> clock_stream(const RngKey& key,
                                            std::int64_t site,
                                            double horizon) {
  if (!(horizon > 0)) throw std::invalid_argument("clock_stream: horizon must be > 0");
  const std::uint64_t site_key = absorb(stream_key(key), zigzag(site));
  std::vector<ClockEvent> events;
  for (int alpha = 0; alpha < 2; ++alpha) {
    CounterRng rng(detail::alpha_stream_key(site_key, alpha));
    double t = rng.next_exp();
    while (t <= horizon) {
      events.push_back({t, site, alpha});
      t += rng.next_exp();
    }
  }
  std::sort(events.begin(), events.end(), detail::event_before);
  return events;
}

// Time-sorted union of the clock streams of every site in [lo, hi].
inline std::vector<ClockEvent> merge_window_events(const RngKey& key,
                                                   std::int64_t lo,
                                                   std::int64_t hi,
                                                   double horizon) {
  std::vector<ClockEvent> events;
  for (std::int64_t s = lo; s <= hi; ++s) {
    auto one = clock_stream(key, s, horizon);
    events.insert(events.end(), one.begin(), one.end());
  }
  std::sort(events.begin(), events.end(), detail::event_before);
  return events;
}

// Lazy merged realization of the clock field on a window of `n_sites` sites.
// Site i (0-based) carries the external label `label_offset + i`; keying by
// label makes overlapping windows of different sizes see the same marks.
//
// Marks are produced bucket by bucket: one sequential scan of the per-site
// next-ring times per time slice, then a counting sort of the slice by
// time. This keeps the memory traffic streaming instead of pointer-chasing
// a priority queue, and yields the same marks in the same order.
class ClockField {
 public:
  ClockField(const RngKey& key, std::int64_t n_sites, std::int64_t label_offset)
      : n_sites_(n_sites), label_offset_(label_offset) {
    const std::uint64_t base = stream_key(key);
    next_.resize(2 * n_sites);
    rng_.reserve(2 * n_sites);
    for (std::int64_t i = 0; i < n_sites; ++i) {
      const std::uint64_t site_key = absorb(base, zigzag(label_offset + i));
      for (int alpha = 0; alpha < 2; ++alpha) {
        rng_.emplace_back(detail::alpha_stream_key(site_key, alpha));
        next_[2 * i + alpha] = rng_.back().next_exp();
      }
    }
    // aim for ~8k marks per slice; slice width is a pure function of n_sites
    slice_ = 4096.0 / static_cast<double>(n_sites);
  }

  double now() const { return now_; }

  // Next mark with time <= t_max, or nullopt (now() advances to t_max and
  // pending marks stay buffered). Sites are reported as 0-based window
  // indices; add `label_offset` for the external label.
  std::optional<ClockEvent> next(double t_max) {
    for (;;) {
      if (cursor_ < buffer_.size()) {
        const Mark& m = buffer_[cursor_];
        if (m.time > t_max) {
          now_ = t_max;
          return std::nullopt;
        }
        ++cursor_;
        now_ = m.time;
        return ClockEvent{m.time, m.site, m.alpha};
      }
      if (filled_to_ > t_max) {
        now_ = t_max;
        return std::nullopt;
      }
      fill_slice();
    }
  }

  // Bulk form of next(): hands every mark with time <= t_max to the sink.
  template <class Sink>
  void drain(double t_max, Sink&& sink) {
    for (;;) {
      while (cursor_ < buffer_.size()) {
        const Mark& m = buffer_[cursor_];
        if (m.time > t_max) {
          now_ = t_max;
          return;
        }
        ++cursor_;
        sink(m.time, static_cast<std::int64_t>(m.site), static_cast<int>(m.alpha));
      }
      if (filled_to_ > t_max) {
        now_ = t_max;
        return;
      }
      fill_slice();
    }
  }

  std::int64_t label_offset() const { return label_offset_; }

 private:
  struct Mark {
    double time;
    std::int32_t site;
    std::int32_t alpha;
  };

  static bool mark_before(const Mark& a, const Mark& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.site != b.site) return a.site < b.site;
    return a.alpha < b.alpha;
  }

  void fill_slice() {
    const double lo = filled_to_;
    const double hi = lo + slice_;
    buffer_.clear();
    cursor_ = 0;
    for (std::int64_t i = 0; i < n_sites_; ++i) {
      for (int alpha = 0; alpha < 2; ++alpha) {
        double t = next_[2 * i + alpha];
        if (t > hi) continue;
        CounterRng& rng = rng_[2 * i + alpha];
        do {
          buffer_.push_back({t, static_cast<std::int32_t>(i), alpha});
          t += rng.next_exp();
        } while (t <= hi);
        next_[2 * i + alpha] = t;
      }
    }
    filled_to_ = hi;
    if (buffer_.size() > 1) sort_slice(lo, hi);
  }

  // Counting sort by time into ~2-mark cells; exact ordering inside a cell.
  void sort_slice(double lo, double hi) {
    const std::size_t n = buffer_.size();
    const std::size_t cells = std::max<std::size_t>(1, n / 2);
    const double scale = static_cast<double>(cells) / (hi - lo);
    counts_.assign(cells + 1, 0);
    auto cell_of = [&](double t) {
      auto c = static_cast<std::size_t>((t - lo) * scale);
      return c >= cells ? cells - 1 : c;
    };
    for (const auto& m : buffer_) ++counts_[cell_of(m.time) + 1];
    for (std::size_t c = 1; c <= cells; ++c) counts_[c] += counts_[c - 1];
    scratch_.resize(n);
    for (const auto& m : buffer_) scratch_[counts_[cell_of(m.time)]++] = m;
    buffer_.swap(scratch_);
    std::size_t begin = 0;
    for (std::size_t c = 0; c < cells; ++c) {
      const std::size_t end = counts_[c];
      if (end - begin == 2) {
        if (mark_before(buffer_[begin + 1], buffer_[begin]))
          std::swap(buffer_[begin], buffer_[begin + 1]);
      } else if (end - begin > 2) {
        std::sort(buffer_.begin() + begin, buffer_.begin() + end, mark_before);
      }
      begin = end;
    }
  }

  std::int64_t n_sites_;
  std::int64_t label_offset_;
  std::vector<double> next_;
  std::vector<CounterRng> rng_;
  std::vector<Mark> buffer_;
  std::vector<Mark> scratch_;
  std::vector<std::size_t> counts_;
  std::size_t cursor_ = 0;
  double filled_to_ = 0.0;
  double slice_ = 1.0;
  double now_ = 0.0;
};

}  // namespace dep
