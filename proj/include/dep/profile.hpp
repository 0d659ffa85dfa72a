#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dep/configuration.hpp"
#include "dep/rng.hpp"
#include "dep/topology.hpp"

namespace dep {

// Macroscopic density profile: constant, one-step, or a piecewise-constant
// table. Outside the table the value equals the nearest edge value.
class DensityProfile {
 public:
  static DensityProfile constant(double rho) {
    return DensityProfile({}, {rho});
  }
  // Step at 0: lambda on (-inf, 0), rho on [0, inf).
  static DensityProfile step(double lambda, double rho) {
    return DensityProfile({0.0}, {lambda, rho});
  }
  // values[i] on [breaks[i-1], breaks[i]); edge values extend to infinity.
  static DensityProfile table(std::vector<double> breaks,
                              std::vector<double> values) {
    return DensityProfile(std::move(breaks), std::move(values));
  }

  double operator()(double x) const {
    std::size_t i = 0;
    while (i < breaks_.size() && x >= breaks_[i]) ++i;
    return values_[i];
  }

  // Profile translated by dx: shifted(dx)(x) == (*this)(x - dx).
  DensityProfile shifted(double dx) const {
    std::vector<double> b = breaks_;
    for (double& v : b) v += dx;
    return DensityProfile(std::move(b), values_);
  }

  bool is_constant() const { return breaks_.empty(); }
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }

 private:
  DensityProfile(std::vector<double> breaks, std::vector<double> values)
      : breaks_(std::move(breaks)), values_(std::move(values)) {
    if (values_.size() != breaks_.size() + 1)
      throw std::invalid_argument("DensityProfile: need one value per interval");
    for (std::size_t i = 1; i < breaks_.size(); ++i)
      if (!(breaks_[i - 1] < breaks_[i]))
        throw std::invalid_argument("DensityProfile: breaks must increase");
    for (double v : values_)
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("DensityProfile: values must lie in [0,1]");
  }

  std::vector<double> breaks_;
  std::vector<double> values_;
};

// Independent Bernoulli occupancies: site x draws Bernoulli(u0(eps * x)).
// Deterministic in (key, topology, profile, eps); each site has its own
// substream, so the result is independent of evaluation order.
//
// `site_label_offset` relabels site x as x + offset for both the profile
// argument and the per-site key, so windows of different extent draw
// identical occupancies wherever their labels overlap.
inline Configuration sample_product(const DensityProfile& profile,
                                    const Topology& topo, const RngKey& key,
                                    double scale_eps,
                                    std::int64_t site_label_offset = 0) {
  if (!(scale_eps > 0)) throw std::invalid_argument("sample_product: eps must be > 0");
  Configuration cfg(topo);
  const std::uint64_t base = stream_key(key);
  for (std::int64_t x = topo.first_site(); x <= topo.last_site(); ++x) {
    const std::int64_t label = x + site_label_offset;
    const double p = profile(scale_eps * static_cast<double>(label));
    const auto block = detail::philox4x32_10(0, absorb(base, zigzag(label)));
    const std::uint64_t u =
        (static_cast<std::uint64_t>(block.w[0]) << 32) | block.w[1];
    const double unif = static_cast<double>(u >> 11) * 0x1.0p-53;
    if (unif < p) cfg.set(x, 1);
  }
  return cfg;
}

}  // namespace dep
