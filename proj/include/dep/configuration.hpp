#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dep/topology.hpp"

namespace dep {

// Occupancy word, 64 sites per machine word.
class Configuration {
 public:
  explicit Configuration(const Topology& topo)
      : topo_(topo), words_((topo.size() + 63) / 64, 0) {}

  const Topology& topology() const { return topo_; }
  std::int64_t size() const { return topo_.size(); }

  int get(std::int64_t site) const {
    const std::int64_t i = topo_.slot(site);
    return static_cast<int>((words_[i >> 6] >> (i & 63)) & 1u);
  }

  void set(std::int64_t site, int value) {
    const std::int64_t i = topo_.slot(site);
    const std::uint64_t mask = 1ull << (i & 63);
    if (value)
      words_[i >> 6] |= mask;
    else
      words_[i >> 6] &= ~mask;
  }

  void flip(std::int64_t site) {
    const std::int64_t i = topo_.slot(site);
    words_[i >> 6] ^= 1ull << (i & 63);
  }

  // Exchange occupancies of two sites.
  void exchange(std::int64_t a, std::int64_t b) {
    if (get(a) != get(b)) {
      flip(a);
      flip(b);
    }
  }

  std::int64_t particle_count() const {
    std::int64_t n = 0;
    for (std::uint64_t w : words_) n += std::popcount(w);
    return n;
  }

  std::int64_t count_in(std::int64_t lo, std::int64_t hi) const {
    std::int64_t n = 0;
    for (std::int64_t s = lo; s <= hi; ++s) n += get(s);
    return n;
  }

  void fill(int value) {
    const std::uint64_t w = value ? ~0ull : 0ull;
    for (auto& word : words_) word = w;
    trim();
  }

  Configuration complement() const {
    Configuration c(topo_);
    for (std::size_t i = 0; i < words_.size(); ++i) c.words_[i] = ~words_[i];
    c.trim();
    return c;
  }

  const std::vector<std::uint64_t>& words() const { return words_; }

  bool operator==(const Configuration& o) const {
    return topo_ == o.topo_ && words_ == o.words_;
  }

  // True iff this <= other pointwise.
  bool dominated_by(const Configuration& o) const {
    if (!(topo_ == o.topo_)) throw std::invalid_argument("topology mismatch");
    for (std::size_t i = 0; i < words_.size(); ++i)
      if (words_[i] & ~o.words_[i]) return false;
    return true;
  }

  std::int64_t hamming_distance(const Configuration& o) const {
    if (!(topo_ == o.topo_)) throw std::invalid_argument("topology mismatch");
    std::int64_t n = 0;
    for (std::size_t i = 0; i < words_.size(); ++i)
      n += std::popcount(words_[i] ^ o.words_[i]);
    return n;
  }

 private:
  void trim() {
    const int used = static_cast<int>(topo_.size() & 63);
    if (used) words_.back() &= (1ull << used) - 1;
  }

  Topology topo_;
  std::vector<std::uint64_t> words_;
};

}  // namespace dep
