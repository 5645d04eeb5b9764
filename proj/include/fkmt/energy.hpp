#pragma once

// Renormalized energy J1 of tail-constant configurations, the ground level c0,
// and the Euler-Lagrange residual (which is also the gradient of J1).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "fkmt/errors.hpp"
#include "fkmt/lattice_config.hpp"
#include "fkmt/stencil_potential.hpp"

namespace fkmt {

/// s evaluated on a constant stencil assignment.
inline double constant_energy(const StencilPotential& p, double x) {
  std::vector<double> a(p.stencil.size(), x);
  return p.eval(a);
}

/// d/dx of constant_energy, i.e. the Euler-Lagrange residual of the constant configuration x.
inline double constant_slope(const StencilPotential& p, double x) {
  std::vector<double> a(p.stencil.size(), x), g(p.stencil.size());
  p.grad(a, g);
  return std::accumulate(g.begin(), g.end(), 0.0);
}

/// c0 = min over one period of the constant-configuration energy, with its argmin set in [0, 1).
struct GroundLevel {
  double c0 = 0.0;
  std::vector<double> argmin;
  bool continuum = false;  // flat valley wider than the scan resolution
  std::vector<std::string> warnings;

  /// True when t is an argmin constant modulo 1, within `tol`.
  [[nodiscard]] bool is_minimizing(double t, double tol = 1e-9) const {
    for (double a : argmin) {
      double d = t - a;
      d -= std::round(d);
      if (std::abs(d) <= tol) return true;
    }
    return false;
  }
};

struct GroundLevelOptions {
  int grid = 1024;
  double flat_tol = 1e-13;     // grid values this close to the minimum count as flat
  double level_tol = 1e-12;    // refined minima this close to c0 count as minimizing
  double merge_dist = 1e-3;    // minima closer than this are merged
};

namespace detail {

// Root of the slope in [a, b] by bisection; slope(a) <= 0 <= slope(b) is assumed.
inline double bisect_slope(const StencilPotential& p, double a, double b) {
  double fa = constant_slope(p, a);
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = constant_slope(p, m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// Ground level by grid scan plus refinement of each discrete local minimum.
///
/// Refinement locates the zero of the slope inside the bracketing grid cells,
/// so minimizing constants are exact Euler-Lagrange solutions up to roundoff.
inline GroundLevel ground_level(const StencilPotential& p, const GroundLevelOptions& opt = {}) {
  const int N = opt.grid;
  std::vector<double> f(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) f[static_cast<std::size_t>(i)] = constant_energy(p, static_cast<double>(i) / N);
  const double fmin = *std::min_element(f.begin(), f.end());
  auto F = [&](int i) { return f[static_cast<std::size_t>(((i % N) + N) % N)]; };

  GroundLevel g;
  // a run of three consecutive near-minimal grid points is a flat valley
  for (int i = 0; i < N; ++i) {
    if (F(i - 1) - fmin <= opt.flat_tol && F(i) - fmin <= opt.flat_tol && F(i + 1) - fmin <= opt.flat_tol) {
      g.continuum = true;
      break;
    }
  }

  std::vector<std::pair<double, double>> cands;  // (x, energy)
  for (int i = 0; i < N; ++i) {
    if (!(F(i) <= F(i - 1) && F(i) <= F(i + 1))) continue;
    const double x = static_cast<double>(i) / N;
    const double a = static_cast<double>(i - 1) / N;
    const double b = static_cast<double>(i + 1) / N;
    double xs = x;
    const double sx = constant_slope(p, x);
    if (sx != 0.0) {
      if (sx > 0.0 && constant_slope(p, a) <= 0.0)
        xs = detail::bisect_slope(p, a, x);
      else if (sx < 0.0 && constant_slope(p, b) >= 0.0)
        xs = detail::bisect_slope(p, x, b);
    }
    const double ex = constant_energy(p, xs);
    if (ex > F(i)) xs = x;  // refinement must not lose the grid value
    cands.emplace_back(xs - std::floor(xs), constant_energy(p, xs));
  }

  g.c0 = fmin;
  for (const auto& c : cands) g.c0 = std::min(g.c0, c.second);
  std::vector<double> xs;
  for (const auto& c : cands)
    if (c.second - g.c0 <= opt.level_tol) xs.push_back(c.first);
  std::sort(xs.begin(), xs.end());
  for (double x : xs) {
    bool merged = false;
    for (double y : g.argmin) {
      double d = x - y;
      d -= std::round(d);
      if (std::abs(d) < opt.merge_dist) {
        merged = true;
        break;
      }
    }
    if (merged) {
      if (!g.continuum)
        g.warnings.push_back("minimizing constants closer than " + std::to_string(opt.merge_dist) + " merged");
      continue;
    }
    g.argmin.push_back(x);
  }
  return g;
}

/// Per-site J1 terms J_{1,p} over a window and their sum.
struct EnergyReport {
  double c0 = 0.0;
  Window eval_window;
  std::vector<double> per_site;
  double total = 0.0;
  double tail_bound = 0.0;
};

/// Stencil evaluations of a potential on transversally periodic chains.
///
/// Keeps scratch buffers, so one instance must not be shared across threads.
class ChainEnergy {
public:
  explicit ChainEnergy(const StencilPotential& p)
      : pot_(&p), lon_(p.stencil.longitudinal()), a_(p.stencil.size()), g_(p.stencil.size()) {}

  [[nodiscard]] const StencilPotential& potential() const { return *pot_; }
  [[nodiscard]] int r() const { return pot_->r(); }

  /// S_{T_j}(u): stencil centered at site j, transverse neighbors equal to the center row.
  double site_energy(const ChainConfig& u, int j) {
    load(u, j);
    return pot_->eval(a_);
  }

  /// Same with u(i) replaced by x.
  double site_energy_with(const ChainConfig& u, int j, int i, double x) {
    load(u, j, i, x);
    return pot_->eval(a_);
  }

  /// sum_{j=p}^{q} (S_{T_j}(u) - c0)
  double window_sum(const ChainConfig& u, int p, int q, double c0) {
    double s = 0.0;
    for (int j = p; j <= q; ++j) s += site_energy(u, j) - c0;
    return s;
  }

  /// d/du(i) of sum_j S_{T_j}(u), with u(i) replaced by x.
  double site_residual_with(const ChainConfig& u, int i, double x) {
    const int r = this->r();
    double s = 0.0;
    for (int j = i - r; j <= i + r; ++j) {
      load(u, j, i, x);
      pot_->grad(a_, g_);
      for (std::size_t k = 0; k < lon_.size(); ++k)
        if (j + lon_[k] == i) s += g_[k];
    }
    return s;
  }

  /// Residual at every site of [lo - r, hi + r] (index 0 is site lo - r).
  std::vector<double> residual(const ChainConfig& u) {
    const int r = this->r();
    const int lo = u.lo() - r, hi = u.hi() + r;
    std::vector<double> res(static_cast<std::size_t>(hi - lo + 1), 0.0);
    for (int j = lo - r; j <= hi + r; ++j) {
      load(u, j);
      pot_->grad(a_, g_);
      for (std::size_t k = 0; k < lon_.size(); ++k) {
        const int i = j + lon_[k];
        if (i >= lo && i <= hi) res[static_cast<std::size_t>(i - lo)] += g_[k];
      }
    }
    return res;
  }

private:
  void load(const ChainConfig& u, int j) {
    for (std::size_t k = 0; k < lon_.size(); ++k) a_[k] = u(j + lon_[k]);
  }
  void load(const ChainConfig& u, int j, int i, double x) {
    for (std::size_t k = 0; k < lon_.size(); ++k) {
      const int site = j + lon_[k];
      a_[k] = site == i ? x : u(site);
    }
  }

  const StencilPotential* pot_;
  std::vector<int> lon_;
  std::vector<double> a_, g_;
};

/// J_{1;p,q}(u) = sum_{j=p}^{q} J_{1,j}(u).
inline double J1_window(const ChainConfig& u, int p, int q, const StencilPotential& pot, double c0) {
  if (p > q) throw InvalidArgument("J1_window: need p <= q");
  ChainEnergy e(pot);
  return e.window_sum(u, p, q, c0);
}

/// Window on which J1 of a tail-constant configuration is an exact finite sum.
inline Window energy_window(const ChainConfig& u, int r) { return {u.lo() - 2 * r, u.hi() + 2 * r}; }

/// J1(u) for a configuration whose tails are minimizing constants.
inline EnergyReport J1_total(const ChainConfig& u, const StencilPotential& pot, const GroundLevel& ground) {
  if (!ground.is_minimizing(u.left_tail()) || !ground.is_minimizing(u.right_tail()))
    throw TailNotMinimal("J1_total: tail value is not a minimizing constant, J1 = +infinity");
  ChainEnergy e(pot);
  EnergyReport rep;
  rep.c0 = ground.c0;
  rep.eval_window = energy_window(u, pot.r());
  rep.per_site.reserve(static_cast<std::size_t>(rep.eval_window.size()));
  for (int j = rep.eval_window.lo; j <= rep.eval_window.hi; ++j) {
    const double t = e.site_energy(u, j) - ground.c0;
    rep.per_site.push_back(t);
    rep.total += t;
  }
  rep.tail_bound = 0.0;
  return rep;
}

/// Euler-Lagrange residual on [lo - r, hi + r].
inline std::vector<double> el_residual(const ChainConfig& u, const StencilPotential& pot) {
  ChainEnergy e(pot);
  return e.residual(u);
}

/// dJ1/du(i) for i in `active`, which must lie inside the window of u.
inline std::vector<double> gradient(const ChainConfig& u, const StencilPotential& pot, Window active) {
  if (!u.window().contains(active)) throw InvalidArgument("gradient: active set outside window");
  const auto res = el_residual(u, pot);
  const int base = u.lo() - pot.r();
  return {res.begin() + (active.lo - base), res.begin() + (active.hi - base + 1)};
}

}  // namespace fkmt
