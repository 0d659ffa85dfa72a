#pragma once

// Exact torus generator for small n: enumerate all 2^n states and the
// unit-rate exchanges allowed at each site. States are raw bitmasks (bit x
// = occupancy of site x, arithmetic mod n), so sizes down to n = 3 work
// even though simulated lattices require 5 sites.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace dep {

// Kernel variants beyond the real dynamics:
//   drop_hole_jump    removes the 001 -> 100 channel. The balance identity
//                     survives this (each channel's source and target
//                     pattern counts coincide via block edges), which the
//                     tests assert as a documented property.
//   misdirected_jump  sends the hole channel to distance three instead of
//                     two, a genuine breaker used as the negative control.
enum class KernelVariant {
  full,
  drop_hole_jump,
  misdirected_jump,
};

namespace detail {

inline std::uint32_t torus_phi(std::uint32_t state, int x, int n,
                               KernelVariant variant) {
  const int x1 = (x + 1) % n;
  const int a = (state >> x) & 1u;
  const int b = (state >> x1) & 1u;
  if (a != b) return state ^ ((1u << x) | (1u << x1));
  if (a == 0) {
    if (variant == KernelVariant::drop_hole_jump) return state;
    if (variant == KernelVariant::misdirected_jump) {
      const int x3 = (x + 3) % n;
      const int d = (state >> x3) & 1u;
      if (a != d) return state ^ ((1u << x) | (1u << x3));
      return state;
    }
  }
  const int x2 = (x + 2) % n;
  const int c = (state >> x2) & 1u;
  if (a != c) return state ^ ((1u << x) | (1u << x2));
  return state;
}

}  // namespace detail

// q(eta, eta') = number of sites whose allowed exchange maps eta to eta'.
class RateMatrix {
 public:
  struct Entry {
    std::uint32_t target;
    int rate;
  };

  RateMatrix(int n, KernelVariant variant) : n_(n) {
    if (n < 3 || n > 14)
      throw std::invalid_argument("RateMatrix: need 3 <= n <= 14");
    const std::uint32_t states = 1u << n;
    out_.resize(states);
    in_rate_.assign(states, 0);
    std::vector<std::uint32_t> targets;
    for (std::uint32_t s = 0; s < states; ++s) {
      targets.clear();
      for (int x = 0; x < n; ++x) {
        const std::uint32_t t = detail::torus_phi(s, x, n, variant);
        if (t != s) targets.push_back(t);
      }
      auto& row = out_[s];
      for (std::uint32_t t : targets) {
        bool found = false;
        for (auto& e : row) {
          if (e.target == t) {
            ++e.rate;
            found = true;
            break;
          }
        }
        if (!found) row.push_back({t, 1});
      }
      for (const auto& e : row) in_rate_[e.target] += e.rate;
    }
  }

  int n() const { return n_; }
  std::uint32_t state_count() const { return 1u << n_; }
  const std::vector<Entry>& row(std::uint32_t state) const { return out_[state]; }

  int out_rate(std::uint32_t state) const {
    int r = 0;
    for (const auto& e : out_[state]) r += e.rate;
    return r;
  }
  int in_rate(std::uint32_t state) const { return in_rate_[state]; }

 private:
  int n_;
  std::vector<std::vector<Entry>> out_;
  std::vector<int> in_rate_;
};

inline RateMatrix build_rate_matrix(int n,
                                    KernelVariant variant = KernelVariant::full) {
  return RateMatrix(n, variant);
}

struct StationarityCheck {
  bool ok = true;
  std::uint32_t counterexample = 0;  // first state with out-rate != in-rate
  int out_rate = 0;
  int in_rate = 0;
};

// Verifies, integer-exactly, that total out-rate equals total in-rate for
// every state; with particle conservation this gives invariance of every
// Bernoulli product measure on the torus.
inline StationarityCheck stationarity_identity_check(
    int n, KernelVariant variant = KernelVariant::full) {
  const RateMatrix q = build_rate_matrix(n, variant);
  StationarityCheck res;
  for (std::uint32_t s = 0; s < q.state_count(); ++s) {
    const int out = q.out_rate(s);
    const int in = q.in_rate(s);
    if (out != in) {
      res.ok = false;
      res.counterexample = s;
      res.out_rate = out;
      res.in_rate = in;
      return res;
    }
  }
  return res;
}

}  // namespace dep
