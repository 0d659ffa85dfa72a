#pragma once

// The macroscopic conservation law u_t + G(u)_x = 0 with the cubic flux
// G(u) = 2u(1-u)(2u-1): characteristic speed and its inverse branches,
// tangency construction, Rankine-Hugoniot speeds, the chord admissibility
// test, exact self-similar solutions of the two-state problem, a variational
// oracle, and a first-order monotone finite-volume scheme for general data.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "dep/profile.hpp"

namespace dep::claw {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr double flux(double u) { return 2.0 * u * (1.0 - u) * (2.0 * u - 1.0); }
constexpr double speed(double u) {
  return 1.0 - 12.0 * (u - 0.5) * (u - 0.5);
}
constexpr double flux_dd(double u) { return 24.0 * (0.5 - u); }

// Interior critical points of G (where the characteristic speed vanishes).
inline const double kArgMin = 0.5 - 0.5 / std::sqrt(3.0);  // local minimum of G
inline const double kArgMax = 0.5 + 0.5 / std::sqrt(3.0);  // local maximum of G

// Inverse branches of the characteristic speed, defined for v <= 1.
inline double speed_inv_lower(double v) { return 0.5 - std::sqrt((1.0 - v) / 12.0); }
inline double speed_inv_upper(double v) { return 0.5 + std::sqrt((1.0 - v) / 12.0); }

// The nontrivial root a with G'(a) = (G(a) - G(u)) / (a - u): where the
// convex envelope from u touches the graph. Degenerates at the inflection.
inline double tangency(double u) {
  if (u == 0.5) throw std::invalid_argument("tangency: undefined at u = 1/2");
  return 0.75 - 0.5 * u;
}

inline double rh_speed(double u_minus, double u_plus) {
  if (u_minus == u_plus)
    throw std::invalid_argument("rh_speed: arguments must differ");
  return (flux(u_minus) - flux(u_plus)) / (u_minus - u_plus);
}

// Chord condition: chord(u-, u+) lies above the graph when u- > u+, below
// when u- < u+. The difference G - chord is a cubic vanishing at both data
// values; its sign on the open interval is tested at its interior critical
// points (the endpoints contribute zero).
inline bool oleinik_admissible(double u_minus, double u_plus) {
  if (u_minus == u_plus)
    throw std::invalid_argument("oleinik: arguments must differ");
  constexpr double kTol = 1e-12;
  const double m = rh_speed(u_minus, u_plus);
  const double lo = std::min(u_minus, u_plus);
  const double hi = std::max(u_minus, u_plus);
  const double want = u_minus > u_plus ? -1.0 : 1.0;  // required sign of G - chord
  auto chord_gap = [&](double s) {
    return flux(s) - (flux(u_plus) + m * (s - u_plus));
  };
  if (m <= 1.0) {
    const double root = std::sqrt((1.0 - m) / 12.0);
    for (const double s : {0.5 - root, 0.5 + root}) {
      if (s <= lo || s >= hi) continue;
      if (want * chord_gap(s) < -kTol) return false;
    }
  }
  return true;
}

// Third root of G - chord (the other two are the data); admissibility is
// equivalent to root >= u_minus (u- > u+) resp. root <= u_minus (u- < u+).
inline double oleinik_third_root(double u_minus, double u_plus) {
  return 1.5 - u_minus - u_plus;
}

// Piecewise self-similar entropy solution of two-state initial data in the
// fan variable v = x/t. Pieces cover (-inf, inf) as half-open cells (lo, hi].
class RiemannSolution {
 public:
  enum class Kind { constant, fan_lower, fan_upper };
  struct Piece {
    double v_lo, v_hi;
    Kind kind;
    double value;  // constant pieces only
  };

  double lambda() const { return lambda_; }
  double rho() const { return rho_; }
  const std::vector<Piece>& pieces() const { return pieces_; }

  double eval(double v) const {
    for (const auto& p : pieces_)
      if (v <= p.v_hi) return piece_value(p, v);
    return pieces_.back().value;
  }
  double operator()(double v) const { return eval(v); }

  // Solution at (x, t), t > 0.
  double at(double x, double t) const { return eval(x / t); }

  // Finite interior piece boundaries.
  std::vector<double> breakpoints() const {
    std::vector<double> b;
    for (std::size_t i = 0; i + 1 < pieces_.size(); ++i)
      b.push_back(pieces_[i].v_hi);
    return b;
  }

  // Integral of u over [v0, v1] in closed form.
  double integrate(double v0, double v1) const {
    double total = 0.0;
    for (const auto& p : pieces_) {
      const double a = std::max(v0, p.v_lo);
      const double b = std::min(v1, p.v_hi);
      if (a < b) total += piece_integral(p, a, b);
    }
    return total;
  }

  // Integral of |u - c| over [v0, v1], splitting fans at their level
  // crossing so each term has constant sign.
  double l1_against_const(double c, double v0, double v1) const {
    double total = 0.0;
    for (const auto& p : pieces_) {
      const double a = std::max(v0, p.v_lo);
      const double b = std::min(v1, p.v_hi);
      if (!(a < b)) continue;
      if (p.kind == Kind::constant) {
        total += std::fabs(p.value - c) * (b - a);
        continue;
      }
      double cross = b;  // fan crosses level c at v = speed(c), if inside
      if (c > 0.0 && c < 1.0) {
        const bool on_branch = (p.kind == Kind::fan_lower) == (c < 0.5);
        if (on_branch || c == 0.5) {
          const double vc = speed(c);
          if (vc > a && vc < b) cross = vc;
        }
      }
      total += std::fabs(piece_integral(p, a, cross) - c * (cross - a));
      if (cross < b)
        total += std::fabs(piece_integral(p, cross, b) - c * (b - cross));
    }
    return total;
  }

  static RiemannSolution solve(double lambda, double rho);

 private:
  static double piece_value(const Piece& p, double v) {
    switch (p.kind) {
      case Kind::constant:
        return p.value;
      case Kind::fan_lower:
        return speed_inv_lower(v);
      case Kind::fan_upper:
        return speed_inv_upper(v);
    }
    return p.value;
  }

  static double piece_integral(const Piece& p, double a, double b) {
    switch (p.kind) {
      case Kind::constant:
        return p.value * (b - a);
      case Kind::fan_lower:
        return fan_antideriv(b, +1.0) - fan_antideriv(a, +1.0);
      case Kind::fan_upper:
        return fan_antideriv(b, -1.0) - fan_antideriv(a, -1.0);
    }
    return 0.0;
  }

  // Antiderivative of 1/2 -+ sqrt((1-v)/12): v/2 +- (1-v)^{3/2} / (3 sqrt 3).
  static double fan_antideriv(double v, double sign) {
    const double w = std::max(0.0, 1.0 - v);
    return 0.5 * v + sign * std::pow(w, 1.5) / (3.0 * std::sqrt(3.0));
  }

  void push_constant(double lo, double hi, double value) {
    pieces_.push_back({lo, hi, Kind::constant, value});
  }
  void validate() const;

  double lambda_ = 0, rho_ = 0;
  std::vector<Piece> pieces_;
};

inline void RiemannSolution::validate() const {
  constexpr double kTol = 1e-9;
  for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
    const double b = pieces_[i].v_hi;
    const double ul = piece_value(pieces_[i], b);
    const double ur = piece_value(pieces_[i + 1], b);
    if (std::fabs(ul - ur) <= kTol) continue;  // continuous junction
    if (!oleinik_admissible(ul, ur))
      throw std::logic_error("RiemannSolution: inadmissible jump produced");
    if (std::fabs(rh_speed(ul, ur) - b) > kTol)
      throw std::logic_error("RiemannSolution: jump speed violates RH");
  }
}

inline RiemannSolution RiemannSolution::solve(double lambda, double rho) {
  if (!(lambda >= 0 && lambda <= 1 && rho >= 0 && rho <= 1))
    throw std::invalid_argument("riemann_solve: data must lie in [0,1]");

  // The hole problem solves the mirrored data: G(1-u) = -G(u), so
  // 1 - u(1-lambda, 1-rho) solves (lambda, rho). Reduce to rho <= 1/2.
  if (rho > 0.5) {
    RiemannSolution base = solve(1.0 - lambda, 1.0 - rho);
    RiemannSolution out;
    out.lambda_ = lambda;
    out.rho_ = rho;
    for (const auto& p : base.pieces_) {
      Piece q = p;
      if (p.kind == Kind::constant)
        q.value = 1.0 - p.value;
      else
        q.kind = p.kind == Kind::fan_lower ? Kind::fan_upper : Kind::fan_lower;
      out.pieces_.push_back(q);
    }
    out.validate();
    return out;
  }

  RiemannSolution out;
  out.lambda_ = lambda;
  out.rho_ = rho;
  if (lambda == rho) {
    out.push_constant(-kInf, kInf, rho);
    return out;
  }
  if (lambda < rho) {
    // Convex stretch of the flux: continuous fan on the lower branch.
    out.push_constant(-kInf, speed(lambda), lambda);
    out.pieces_.push_back({speed(lambda), speed(rho), Kind::fan_lower, 0.0});
    out.push_constant(speed(rho), kInf, rho);
    out.validate();
    return out;
  }
  const double rho_star = 0.75 - 0.5 * rho;
  if (lambda <= rho_star) {
    // Single admissible shock.
    const double s = rh_speed(lambda, rho);
    out.push_constant(-kInf, s, lambda);
    out.push_constant(s, kInf, rho);
    out.validate();
    return out;
  }
  // Upper-branch fan from lambda down to the tangency value, then a jump
  // to rho travelling at the tangential speed.
  out.push_constant(-kInf, speed(lambda), lambda);
  out.pieces_.push_back({speed(lambda), speed(rho_star), Kind::fan_upper, 0.0});
  out.push_constant(speed(rho_star), kInf, rho);
  out.validate();
  return out;
}

inline RiemannSolution riemann_solve(double lambda, double rho) {
  return RiemannSolution::solve(lambda, rho);
}

// Independent oracle: the self-similar entropy solution at fan coordinate v
// is the minimizer of G(s) - v s over [lambda, rho] (data increasing), the
// maximizer over [rho, lambda] otherwise. Exact via endpoint and interior
// critical-point comparison; meaningful at continuity points of v.
inline double riemann_variational(double lambda, double rho, double v) {
  if (!(lambda >= 0 && lambda <= 1 && rho >= 0 && rho <= 1))
    throw std::invalid_argument("riemann_variational: data must lie in [0,1]");
  const bool minimize = lambda <= rho;
  const double lo = std::min(lambda, rho);
  const double hi = std::max(lambda, rho);
  double cands[4];
  int n = 0;
  cands[n++] = lo;
  cands[n++] = hi;
  if (v <= 1.0) {
    const double root = std::sqrt((1.0 - v) / 12.0);
    for (const double s : {0.5 - root, 0.5 + root})
      if (s > lo && s < hi) cands[n++] = s;
  }
  double best = cands[0];
  double best_val = flux(best) - v * best;
  for (int i = 1; i < n; ++i) {
    const double val = flux(cands[i]) - v * cands[i];
    if (minimize ? val < best_val : val > best_val) {
      best = cands[i];
      best_val = val;
    }
  }
  return best;
}

// Exact-solver numerical flux: min of G over [a,b] when a <= b, max over
// [b,a] otherwise; extrema occur at endpoints or interior critical points.
inline double godunov_flux(double a, double b) {
  if (a <= b) {
    double m = std::min(flux(a), flux(b));
    if (a < kArgMin && kArgMin < b) m = std::min(m, flux(kArgMin));
    return m;
  }
  double m = std::max(flux(a), flux(b));
  if (b < kArgMax && kArgMax < a) m = std::max(m, flux(kArgMax));
  return m;
}

// Uniform finite-volume grid on [-half_width, half_width] with far-field
// ghost values. Time step is cfl * dx / 2 (the speed range is [-2, 1]).
struct Grid1D {
  double x0 = 0.0;
  double dx = 0.0;
  std::vector<double> u;
  double ghost_left = 0.0, ghost_right = 0.0;
  double cfl = 0.4;

  double edge(std::size_t i) const { return x0 + dx * static_cast<double>(i); }
  double center(std::size_t i) const { return edge(i) + 0.5 * dx; }
  double mass() const {
    double s = 0.0;
    for (double v : u) s += v;
    return s * dx;
  }
};

inline Grid1D make_grid(double half_width, double dx, const DensityProfile& u0,
                        double cfl = 0.4) {
  if (!(dx > 0) || !(half_width > dx))
    throw std::invalid_argument("make_grid: bad geometry");
  Grid1D g;
  g.dx = dx;
  g.cfl = cfl;
  const auto n = static_cast<std::size_t>(std::llround(2.0 * half_width / dx));
  g.x0 = -half_width;
  g.u.resize(n);
  // exact cell averages of the piecewise-constant initial profile
  const auto& breaks = u0.breaks();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = g.edge(i), b = g.edge(i + 1);
    double acc = 0.0, prev = a;
    for (double brk : breaks) {
      if (brk <= a || brk >= b) continue;
      acc += u0(0.5 * (prev + brk)) * (brk - prev);
      prev = brk;
    }
    acc += u0(0.5 * (prev + b)) * (b - prev);
    g.u[i] = acc / (b - a);
  }
  g.ghost_left = u0(-kInf);
  g.ghost_right = u0(kInf);
  return g;
}

// Advances the grid to t_end with the first-order monotone update. Returns
// the accumulated boundary flux integral (net inflow), which must equal the
// mass change exactly up to roundoff.
class GodunovRun {
 public:
  explicit GodunovRun(Grid1D grid) : grid_(std::move(grid)) {
    if (!(grid_.cfl > 0.0 && grid_.cfl <= 0.5))
      throw std::invalid_argument("GodunovRun: cfl must lie in (0, 1/2]");
    flux_.resize(grid_.u.size() + 1);
  }

  const Grid1D& grid() const { return grid_; }
  double time() const { return t_; }
  double boundary_inflow() const { return inflow_; }

  void advance(double t_end) {
    const double dt_full = grid_.cfl * grid_.dx / 2.0;
    while (t_ < t_end) {
      const double dt = std::min(dt_full, t_end - t_);
      step(dt);
      t_ += dt;
    }
  }

 private:
  void step(double dt) {
    auto& u = grid_.u;
    const std::size_t n = u.size();
    flux_[0] = godunov_flux(grid_.ghost_left, u[0]);
    for (std::size_t i = 1; i < n; ++i) flux_[i] = godunov_flux(u[i - 1], u[i]);
    flux_[n] = godunov_flux(u[n - 1], grid_.ghost_right);
    const double r = dt / grid_.dx;
    for (std::size_t i = 0; i < n; ++i) u[i] -= r * (flux_[i + 1] - flux_[i]);
    inflow_ += dt * (flux_[0] - flux_[n]);
  }

  Grid1D grid_;
  std::vector<double> flux_;
  double t_ = 0.0;
  double inflow_ = 0.0;
};

// L1 distance over [a, b] between a piecewise-constant function (cell edges
// and values, far sides extended) and the self-similar solution at time t.
inline double l1_cells_vs_solution(const std::vector<double>& edges,
                                   const std::vector<double>& vals,
                                   const RiemannSolution& sol, double t,
                                   double a, double b) {
  if (edges.size() != vals.size() + 1)
    throw std::invalid_argument("l1_cells_vs_solution: edges/vals mismatch");
  if (!(t > 0)) throw std::invalid_argument("l1_cells_vs_solution: t must be > 0");
  double total = 0.0;
  auto add = [&](double xlo, double xhi, double c) {
    if (xlo < xhi) total += t * sol.l1_against_const(c, xlo / t, xhi / t);
  };
  add(a, std::min(b, edges.front()), vals.front());
  for (std::size_t i = 0; i < vals.size(); ++i)
    add(std::max(a, edges[i]), std::min(b, edges[i + 1]), vals[i]);
  add(std::max(a, edges.back()), b, vals.back());
  return total;
}

// L1 distance over [a, b] between two piecewise-constant functions.
inline double l1_cells_vs_cells(const std::vector<double>& ea,
                                const std::vector<double>& va,
                                const std::vector<double>& eb,
                                const std::vector<double>& vb, double a,
                                double b) {
  auto value_at = [](const std::vector<double>& e, const std::vector<double>& v,
                     double x) {
    if (x < e.front()) return v.front();
    for (std::size_t i = 0; i + 1 < e.size(); ++i)
      if (x < e[i + 1]) return v[i];
    return v.back();
  };
  std::vector<double> cuts{a, b};
  for (double x : ea)
    if (x > a && x < b) cuts.push_back(x);
  for (double x : eb)
    if (x > a && x < b) cuts.push_back(x);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    total += std::fabs(value_at(ea, va, mid) - value_at(eb, vb, mid)) *
             (cuts[i + 1] - cuts[i]);
  }
  return total;
}

// Rightmost level crossing of a decreasing numeric profile (shock locator).
inline double level_crossing_from_right(const Grid1D& g, double level) {
  const auto& u = g.u;
  for (std::size_t i = u.size(); i-- > 1;) {
    if (u[i - 1] >= level && u[i] < level) {
      const double x0 = g.center(i - 1), x1 = g.center(i);
      return x0 + (x1 - x0) * (u[i - 1] - level) / (u[i - 1] - u[i]);
    }
  }
  throw std::runtime_error("level_crossing_from_right: no crossing found");
}

}  // namespace dep::claw
