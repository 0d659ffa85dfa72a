#pragma once

// Microscopic flux, exact small-pattern expectations under product measures,
// empirical density pairings, block profiles, interval fluctuations, and the
// log-corrected fluctuation time scale.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dep/configuration.hpp"
#include "dep/topology.hpp"

namespace dep {

// Instantaneous net particle current across the bond right of `origin`:
//   j = [eta(0)-eta(1)] + [eta(-1)eta(0)(1-eta(1)) - (1-eta(-1))(1-eta(0))eta(1)]
//     + [eta(0)eta(1)(1-eta(2)) - (1-eta(0))(1-eta(1))eta(2)]
// with indices relative to origin. Always in [-2, 2].
inline int micro_flux(const Configuration& cfg, std::int64_t origin) {
  const Topology& topo = cfg.topology();
  const std::int64_t m1 = topo.left(origin, 1);
  const std::int64_t p1 = topo.right(origin, 1);
  const std::int64_t p2 = topo.right(origin, 2);
  if (m1 < 0 || p1 < 0 || p2 < 0)
    throw std::invalid_argument("micro_flux: needs sites origin-1..origin+2");
  const int em1 = cfg.get(m1), e0 = cfg.get(origin), e1 = cfg.get(p1), e2 = cfg.get(p2);
  return (e0 - e1) + (em1 * e0 * (1 - e1) - (1 - em1) * (1 - e0) * e1) +
         (e0 * e1 * (1 - e2) - (1 - e0) * (1 - e1) * e2);
}

// Exact expectation of a local observable of `width` consecutive sites under
// the Bernoulli(rho) product measure: sum over all 2^width patterns.
template <class F>
double exact_product_expectation(int width, F&& local, double rho) {
  if (width < 1 || width > 20)
    throw std::invalid_argument("exact_product_expectation: width out of range");
  double total = 0.0;
  const std::uint32_t patterns = 1u << width;
  for (std::uint32_t p = 0; p < patterns; ++p) {
    double w = 1.0;
    for (int i = 0; i < width; ++i) w *= ((p >> i) & 1u) ? rho : (1.0 - rho);
    total += w * local(p);
  }
  return total;
}

// nu_rho expectation of the microscopic flux (pattern bits 0..3 are sites
// -1..2 around the bond).
inline double expected_micro_flux(double rho) {
  return exact_product_expectation(
      4,
      [](std::uint32_t p) {
        const int em1 = p & 1, e0 = (p >> 1) & 1, e1 = (p >> 2) & 1, e2 = (p >> 3) & 1;
        return static_cast<double>(
            (e0 - e1) + (em1 * e0 * (1 - e1) - (1 - em1) * (1 - e0) * e1) +
            (e0 * e1 * (1 - e2) - (1 - e0) * (1 - e1) * e2));
      },
      rho);
}

// Compactly supported test function with closed-form evaluation. `kinks`
// lists points where smoothness degrades (for exact piecewise quadrature).
struct TestFn {
  std::string name;
  double lo = 0.0, hi = 0.0;
  std::vector<double> kinks;
  std::function<double(double)> f;

  double operator()(double x) const {
    return (x <= lo || x >= hi) ? 0.0 : f(x);
  }
};

inline TestFn hat_fn(double center, double halfwidth) {
  TestFn t;
  t.name = "hat";
  t.lo = center - halfwidth;
  t.hi = center + halfwidth;
  t.kinks = {center - halfwidth, center, center + halfwidth};
  t.f = [center, halfwidth](double x) {
    const double v = 1.0 - std::fabs(x - center) / halfwidth;
    return v > 0 ? v : 0.0;
  };
  return t;
}

inline TestFn gaussian_fn(double center, double sigma, double radius) {
  TestFn t;
  t.name = "gauss";
  t.lo = center - radius;
  t.hi = center + radius;
  t.kinks = {t.lo, t.hi};
  const double tail = std::exp(-radius * radius / (2 * sigma * sigma));
  t.f = [center, sigma, tail](double x) {
    const double z = (x - center) / sigma;
    const double v = std::exp(-0.5 * z * z) - tail;
    return v > 0 ? v : 0.0;
  };
  return t;
}

// Smoothed indicator of [a, b] with C^1 ramps of half-width r.
inline TestFn smooth_indicator_fn(double a, double b, double r) {
  TestFn t;
  t.name = "bump";
  t.lo = a - r;
  t.hi = b + r;
  t.kinks = {a - r, a + r, b - r, b + r};
  t.f = [a, b, r](double x) {
    auto smoothstep = [](double u) {
      if (u <= 0) return 0.0;
      if (u >= 1) return 1.0;
      return u * u * (3 - 2 * u);
    };
    return smoothstep((x - (a - r)) / (2 * r)) -
           smoothstep((x - (b - r)) / (2 * r));
  };
  return t;
}

// eps * sum_x f(eps * (x - origin) - shift) * eta(x).
inline double empirical_pairing(const Configuration& cfg, const TestFn& f,
                                double eps, double shift,
                                std::int64_t origin = 0) {
  const Topology& topo = cfg.topology();
  const std::int64_t xlo =
      static_cast<std::int64_t>(std::ceil((f.lo + shift) / eps)) + origin;
  const std::int64_t xhi =
      static_cast<std::int64_t>(std::floor((f.hi + shift) / eps)) + origin;
  if (xlo < topo.first_site() || xhi > topo.last_site())
    throw std::invalid_argument("empirical_pairing: support exceeds window");
  double sum = 0.0;
  for (std::int64_t x = xlo; x <= xhi; ++x)
    if (cfg.get(x)) sum += f(eps * static_cast<double>(x - origin) - shift);
  return eps * sum;
}

// eps^{1/2} * sum_x f(eps*(x - origin) - eps*s) * (eta(x) - 1/2), the
// centered field in the frame moving at unit advection speed.
inline double fluctuation_pairing(const Configuration& cfg, const TestFn& f,
                                  double eps, double s_micro,
                                  std::int64_t origin = 0) {
  const Topology& topo = cfg.topology();
  const double shift = eps * s_micro;
  const std::int64_t xlo =
      static_cast<std::int64_t>(std::ceil((f.lo + shift) / eps)) + origin;
  const std::int64_t xhi =
      static_cast<std::int64_t>(std::floor((f.hi + shift) / eps)) + origin;
  if (xlo < topo.first_site() || xhi > topo.last_site())
    throw std::invalid_argument("fluctuation_pairing: support exceeds window");
  double sum = 0.0;
  for (std::int64_t x = xlo; x <= xhi; ++x)
    sum += f(eps * static_cast<double>(x - origin) - shift) *
           (cfg.get(x) - 0.5);
  return std::sqrt(eps) * sum;
}

// Exact half-centered particle count of [1, L] (segment coordinates).
inline double interval_fluctuation(const Configuration& cfg, std::int64_t L) {
  if (L == 0) return 0.0;
  if (L < 0 || L > cfg.topology().last_site() ||
      cfg.topology().first_site() != 1)
    throw std::invalid_argument("interval_fluctuation: needs sites 1..L");
  return static_cast<double>(cfg.count_in(1, L)) -
         static_cast<double>(L) / 2.0;
}

// Per-block particle averages on macroscopic coordinates. Blocks are aligned
// so that a block edge sits at `origin`; partial edge blocks are dropped.
struct BlockProfile {
  double x0 = 0.0;     // macro coordinate of the left edge of values[0]
  double width = 0.0;  // macro block width
  std::vector<double> values;

  double edge(std::size_t i) const { return x0 + width * static_cast<double>(i); }
};

inline BlockProfile block_density_profile(const Configuration& cfg,
                                          std::int64_t block_sites, double eps,
                                          std::int64_t origin) {
  if (block_sites < 1)
    throw std::invalid_argument("block_density_profile: block size must be >= 1");
  const Topology& topo = cfg.topology();
  const std::int64_t lo = topo.first_site(), hi = topo.last_site();
  // first full block at or after lo, aligned to origin
  std::int64_t k_min = (lo - origin) / block_sites;
  while (origin + k_min * block_sites < lo) ++k_min;
  BlockProfile prof;
  prof.width = eps * static_cast<double>(block_sites);
  prof.x0 = eps * static_cast<double>(k_min * block_sites);
  for (std::int64_t k = k_min;; ++k) {
    const std::int64_t a = origin + k * block_sites;
    const std::int64_t b = a + block_sites - 1;
    if (b > hi) break;
    prof.values.push_back(static_cast<double>(cfg.count_in(a, b)) /
                          static_cast<double>(block_sites));
  }
  return prof;
}

constexpr std::int64_t default_block_sites(std::int64_t n) {
  const std::int64_t b = n / 100;
  return b > 8 ? b : 8;
}

struct ScalingTime {
  double s = 0.0;
  bool clamped = false;  // input below the asymptotic regime (s < e)
};

// The unique s >= e with eps^2 * s * sqrt(log s) = t, by bisection to
// relative width 1e-13; inputs that would force s < e clamp to s = t/eps^2.
inline ScalingTime scaling_time(double t, double eps) {
  if (!(t > 0)) throw std::invalid_argument("scaling_time: t must be > 0");
  if (!(eps > 0 && eps < 1))
    throw std::invalid_argument("scaling_time: eps must lie in (0,1)");
  const double target = t / (eps * eps);
  auto g = [](double s) { return s * std::sqrt(std::log(s)); };
  const double e = std::exp(1.0);
  if (target <= g(e)) return {target, true};
  double lo = e, hi = std::max(e * 2, target);
  while (g(hi) < target) hi *= 2;
  for (int i = 0; i < 200 && (hi - lo) > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < target ? lo : hi) = mid;
  }
  return {0.5 * (lo + hi), false};
}

}  // namespace dep
