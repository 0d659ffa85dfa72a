#pragma once

#include <cstdint>
#include <stdexcept>

namespace dep {

// Finite lattice window. Rings use sites 0..L-1 with arithmetic mod L;
// segments use sites 1..L with blocked ends (an exchange whose partner
// falls outside the domain is disabled).
class Topology {
 public:
  enum class Kind { ring, segment };

  static Topology ring(std::int64_t sites) { return Topology(Kind::ring, sites, true, true); }
  static Topology segment(std::int64_t sites, bool left_blocked = true,
                          bool right_blocked = true) {
    return Topology(Kind::segment, sites, left_blocked, right_blocked);
  }

  Kind kind() const { return kind_; }
  std::int64_t size() const { return size_; }
  bool is_ring() const { return kind_ == Kind::ring; }
  bool left_blocked() const { return left_blocked_; }
  bool right_blocked() const { return right_blocked_; }

  std::int64_t first_site() const { return is_ring() ? 0 : 1; }
  std::int64_t last_site() const { return is_ring() ? size_ - 1 : size_; }

  bool contains(std::int64_t site) const {
    return site >= first_site() && site <= last_site();
  }

  // Site at offset d >= 0 to the right of x; -1 if it leaves a segment.
  std::int64_t right(std::int64_t x, std::int64_t d) const {
    std::int64_t y = x + d;
    if (is_ring()) {
      if (y >= size_) y -= size_;
      return y;
    }
    return y <= size_ ? y : -1;
  }

  // Site at offset d >= 0 to the left of x; -1 if it leaves a segment.
  std::int64_t left(std::int64_t x, std::int64_t d) const {
    std::int64_t y = x - d;
    if (is_ring()) {
      if (y < 0) y += size_;
      return y;
    }
    return y >= 1 ? y : -1;
  }

  // Storage slot of a site.
  std::int64_t slot(std::int64_t site) const {
    return is_ring() ? site : site - 1;
  }

  bool operator==(const Topology& o) const {
    return kind_ == o.kind_ && size_ == o.size_ &&
           left_blocked_ == o.left_blocked_ && right_blocked_ == o.right_blocked_;
  }

 private:
  Topology(Kind kind, std::int64_t sites, bool lb, bool rb)
      : kind_(kind), size_(sites), left_blocked_(lb), right_blocked_(rb) {
    // Interaction range is 2 per side; smaller rings alias exchange partners.
    if (sites < 5) throw std::invalid_argument("Topology: need at least 5 sites");
  }

  Kind kind_;
  std::int64_t size_;
  bool left_blocked_;
  bool right_blocked_;
};

}  // namespace dep
