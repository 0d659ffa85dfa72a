#pragma once

// Counter-based keyed random streams (Philox4x32-10 core).
//
// Every stream is a pure function of its RngKey: replaying a key yields the
// identical sequence, and structurally distinct keys give independent
// streams. This is what lets one Poisson clock realization drive all copies
// of a coupled ensemble and all lattice scales of a common-noise experiment.

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace dep {

// SplitMix64 finalizer, used for key derivation only.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Absorb one 64-bit word into a running key.
constexpr std::uint64_t absorb(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v * 0xFF51AFD7ED558CCDULL + 0x2545F4914F6CDD1DULL));
}

constexpr std::uint64_t zigzag(std::int64_t v) {
  return (static_cast<std::uint64_t>(v) << 1) ^
         static_cast<std::uint64_t>(v >> 63);
}

enum class StreamPurpose : std::uint64_t {
  initial_state = 1,  // product-measure sampling
  clock_field = 2,    // per-site Poisson clock marks
  event_driver = 3,   // aggregate (Gillespie) event stream
  event_times = 4,    // optional event timestamps, kept off the main stream
  scratch = 5,        // tests and ad-hoc draws
};

constexpr std::int64_t kNoIndex = INT64_MIN;

// Identifies one random stream. All fields participate in key derivation.
struct RngKey {
  std::uint64_t master = 0;
  StreamPurpose purpose = StreamPurpose::scratch;
  std::int64_t site = kNoIndex;
  std::int64_t replica = kNoIndex;

  RngKey with_site(std::int64_t s) const {
    RngKey k = *this;
    k.site = s;
    return k;
  }
  RngKey with_replica(std::int64_t r) const {
    RngKey k = *this;
    k.replica = r;
    return k;
  }
};

inline std::uint64_t stream_key(const RngKey& key) {
  std::uint64_t h = 0x6A09E667F3BCC908ULL;  // sqrt(2) bits
  h = absorb(h, key.master);
  h = absorb(h, static_cast<std::uint64_t>(key.purpose));
  if (key.site != kNoIndex) h = absorb(h, 0x10 + zigzag(key.site));
  if (key.replica != kNoIndex) h = absorb(h, 0x20 + zigzag(key.replica));
  return h;
}

namespace detail {

struct PhiloxBlock {
  std::uint32_t w[4];
};

inline PhiloxBlock philox4x32_10(std::uint64_t counter, std::uint64_t key) {
  constexpr std::uint32_t kWeylA = 0x9E3779B9u;
  constexpr std::uint32_t kWeylB = 0xBB67AE85u;
  constexpr std::uint64_t kMulA = 0xD2511F53ull;
  constexpr std::uint64_t kMulB = 0xCD9E8D57ull;

  std::uint32_t c0 = static_cast<std::uint32_t>(counter);
  std::uint32_t c1 = static_cast<std::uint32_t>(counter >> 32);
  std::uint32_t c2 = 0x85A308D3u;
  std::uint32_t c3 = 0x243F6A88u;
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);

  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = kMulA * c0;
    const std::uint64_t p1 = kMulB * c2;
    const std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
    const std::uint32_t n1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
    const std::uint32_t n3 = static_cast<std::uint32_t>(p0);
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += kWeylA;
    k1 += kWeylB;
  }
  return PhiloxBlock{{c0, c1, c2, c3}};
}

}  // namespace detail

// Stateless-by-key generator: (key, block counter) -> 128 random bits.
class CounterRng {
 public:
  CounterRng() : CounterRng(0) {}
  explicit CounterRng(std::uint64_t raw_key) : key_(raw_key) {}
  explicit CounterRng(const RngKey& key) : key_(stream_key(key)) {}

  std::uint64_t raw_key() const { return key_; }

  std::uint64_t next_u64() {
    if (have_hi_) {
      have_hi_ = false;
      return hi_;
    }
    const auto b = detail::philox4x32_10(block_++, key_);
    hi_ = (static_cast<std::uint64_t>(b.w[2]) << 32) | b.w[3];
    have_hi_ = true;
    return (static_cast<std::uint64_t>(b.w[0]) << 32) | b.w[1];
  }

  // Uniform on [0, 1), 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Exp(1), strictly positive.
  double next_exp() {
    const std::uint64_t b = (next_u64() >> 11) | 1u;  // odd, in (0, 2^53)
    return -std::log(static_cast<double>(b) * 0x1.0p-53);
  }

  // Uniform integer in [0, n). Multiply-shift map; bias is O(n / 2^64).
  std::uint64_t uniform_below(std::uint64_t n) {
    const unsigned __int128 m =
        static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<std::uint64_t>(m >> 64);
  }

  std::int64_t poisson(double mean);

 private:
  std::uint64_t key_;
  std::uint64_t block_ = 0;
  std::uint64_t hi_ = 0;
  bool have_hi_ = false;
};

// Sequential generator (xoshiro256++) for throughput-critical aggregate
// streams; still a pure function of its key. The keyed per-site clock
// streams stay counter-based so they can be shared across copies and
// scales.
class SequentialRng {
 public:
  explicit SequentialRng(std::uint64_t raw_key) {
    std::uint64_t x = raw_key;
    for (auto& word : s_) word = (x = mix64(x));
  }
  explicit SequentialRng(const RngKey& key) : SequentialRng(stream_key(key)) {}

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_exp() {
    const std::uint64_t b = (next_u64() >> 11) | 1u;
    return -std::log(static_cast<double>(b) * 0x1.0p-53);
  }

  std::uint64_t uniform_below(std::uint64_t n) {
    const unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<std::uint64_t>(m >> 64);
  }

  std::int64_t poisson(double mean);

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

// Poisson sampler: Knuth inversion for small means, PTRD (Hormann's
// transformed rejection with decomposition) otherwise.
template <class Rng>
std::int64_t poisson_draw(Rng& rng, double mean) {
  if (!(mean >= 0)) throw std::invalid_argument("poisson: mean must be >= 0");
  if (mean == 0) return 0;
  if (mean < 10.0) {
    const double limit = std::exp(-mean);
    std::int64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= rng.uniform();
    } while (p > limit);
    return k - 1;
  }

  const double smu = std::sqrt(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  constexpr double kLogSqrt2Pi = 0.91893853320467274178;

  for (;;) {
    double u;
    double v = rng.uniform();
    if (v <= 0.86 * vr) {
      u = v / vr - 0.43;
      return static_cast<std::int64_t>(
          std::floor((2.0 * a / (0.5 - std::fabs(u)) + b) * u + mean + 0.445));
    }
    if (v >= vr) {
      u = rng.uniform() - 0.5;
    } else {
      u = v / vr - 0.93;
      u = ((u < 0) ? -0.5 : 0.5) - u;
      v = rng.uniform() * vr;
    }
    const double us = 0.5 - std::fabs(u);
    if (us < 0.013 && v > us) continue;
    const double k =
        std::floor((2.0 * a / us + b) * u + mean + 0.445);
    v = v * inv_alpha / (a / (us * us) + b);
    if (k >= 10.0) {
      if (std::log(v * smu) <=
          (k + 0.5) * std::log(mean / k) - mean - kLogSqrt2Pi + k -
              (1.0 / 12.0 - 1.0 / (360.0 * k * k)) / k) {
        return static_cast<std::int64_t>(k);
      }
    } else if (k >= 0.0) {
      if (std::log(v) <= k * std::log(mean) - mean - std::lgamma(k + 1.0)) {
        return static_cast<std::int64_t>(k);
      }
    }
  }
}

inline std::int64_t CounterRng::poisson(double mean) {
  return poisson_draw(*this, mean);
}

inline std::int64_t SequentialRng::poisson(double mean) {
  return poisson_draw(*this, mean);
}

}  // namespace dep
