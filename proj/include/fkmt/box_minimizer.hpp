#pragma once

// Minimization of the window energy J_{1;p,q} under per-site interval
// constraints: projected gradient with Armijo backtracking, Gauss-Seidel
// coordinate sweeps, or a hybrid of both.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fkmt/energy.hpp"
#include "fkmt/errors.hpp"
#include "fkmt/lattice_config.hpp"
#include "fkmt/stencil_potential.hpp"

namespace fkmt {

/// Which observable a constraint region bounds.
///  Minus: rho_-(tau_{-i} u) = |u(i) - v0| <= rho, i.e. u(i) in [v0, v0 + rho]
///  Plus:  rho_+(tau_{-i} u) = |u(i) - w0| <= rho, i.e. u(i) in [w0 - rho, w0]
enum class ConstraintSide { Minus, Plus };

struct ConstraintRegion {
  int first = 0;
  int last = 0;
  ConstraintSide side = ConstraintSide::Minus;
  int rho_index = 1;  // which of rho_1..rho_4
  double rho = 0.0;
  friend bool operator==(const ConstraintRegion&, const ConstraintRegion&) = default;
};

/// Per-site bounds over a window, optional equality pins, and the constraint
/// regions the bounds were tightened from (informational).
struct ConstraintBox {
  Window window;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<std::pair<int, double>> pins;
  std::vector<ConstraintRegion> regions;

  static ConstraintBox uniform(Window w, double lo, double hi) {
    ConstraintBox b;
    b.window = w;
    b.lower.assign(static_cast<std::size_t>(w.size()), lo);
    b.upper.assign(static_cast<std::size_t>(w.size()), hi);
    b.validate();
    return b;
  }

  [[nodiscard]] double lo(int i) const { return lower[static_cast<std::size_t>(i - window.lo)]; }
  [[nodiscard]] double hi(int i) const { return upper[static_cast<std::size_t>(i - window.lo)]; }

  [[nodiscard]] std::optional<double> pin(int i) const {
    for (const auto& [site, value] : pins)
      if (site == i) return value;
    return std::nullopt;
  }

  void validate() const {
    const auto n = static_cast<std::size_t>(window.size());
    if (lower.size() != n || upper.size() != n) throw InvalidArgument("ConstraintBox: bound arrays do not match window");
    for (std::size_t k = 0; k < n; ++k)
      if (!(lower[k] <= upper[k])) throw InvalidArgument("ConstraintBox: lower > upper");
    for (const auto& [site, value] : pins) {
      if (!window.contains(site)) throw InvalidArgument("ConstraintBox: pin outside window");
      if (value < lo(site) || value > hi(site)) throw InvalidArgument("ConstraintBox: pin outside bounds");
    }
  }
};

enum class Algorithm { ProjectedGradient, GaussSeidel, Hybrid };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::ProjectedGradient: return "projected_gradient";
    case Algorithm::GaussSeidel: return "gauss_seidel";
    case Algorithm::Hybrid: return "hybrid";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "projected_gradient") return Algorithm::ProjectedGradient;
  if (s == "gauss_seidel") return Algorithm::GaussSeidel;
  if (s == "hybrid") return Algorithm::Hybrid;
  throw InvalidArgument("unknown algorithm '" + s + "'");
}

struct SolveOptions {
  double tol = 1e-10;
  long max_iter = 200000;
  Algorithm algorithm = Algorithm::Hybrid;
  int gs_every = 10;
  double armijo_shrink = 0.5;
  double armijo_slope = 1e-4;
  double initial_step = 1.0;
  double active_tol = 1e-9;
  // Called once per iteration with (iteration, energy) before the step.
  std::function<void(long, double)> observer;
};

struct SolveReport {
  ChainConfig profile;
  double energy = 0.0;
  double residual_sup = 0.0;
  long iterations = 0;
  std::vector<int> active_sites;
  bool converged = false;
  double wall_time = 0.0;
  friend bool operator==(const SolveReport&, const SolveReport&) = default;
};

namespace detail {

/// Free-site bookkeeping shared by the sweep and the descent loop.
///
/// Sites within r of either window edge are frozen to the tail values, pins
/// are fixed, and sites with lower == upper are fixed at that value.
struct FreeSites {
  std::vector<int> sites;

  static FreeSites build(ChainConfig& u, const ConstraintBox& box, int r) {
    FreeSites f;
    const Window w = box.window;
    for (int i = w.lo; i <= w.hi; ++i) {
      if (auto p = box.pin(i)) {
        u.at(i) = *p;
        continue;
      }
      if (i < w.lo + r) {
        u.at(i) = u.left_tail();
        continue;
      }
      if (i > w.hi - r) {
        u.at(i) = u.right_tail();
        continue;
      }
      u.at(i) = std::clamp(u(i), box.lo(i), box.hi(i));
      if (box.lo(i) < box.hi(i)) f.sites.push_back(i);
    }
    return f;
  }
};

// First local minimizer of phi(x) = sum_j S_j(u with u(i) = x) in the descent
// direction from u(i), restricted to [lo, hi]. phi never increases along the path.
inline double coordinate_minimize(ChainEnergy& e, const ChainConfig& u, int i, double lo, double hi) {
  const double x0 = u(i);
  auto dphi = [&](double x) { return e.site_residual_with(u, i, x); };
  const double g0 = dphi(x0);
  if (g0 == 0.0) return x0;
  const double dir = g0 > 0.0 ? -1.0 : 1.0;
  const double bound = dir < 0.0 ? lo : hi;
  if (x0 == bound) return x0;
  const bool sgn = g0 > 0.0;
  const double max_step = std::isfinite(hi - lo) ? 0.25 * (hi - lo) : 0.25;
  constexpr double h = 1e-6;

  double a = x0, ga = g0;
  double b = bound;
  bool bracketed = false;
  for (int it = 0; it < 200; ++it) {
    const double curv = (dphi(a + h) - dphi(a - h)) / (2.0 * h);
    double step = curv > 0.0 ? -ga / curv : dir * max_step;
    if (std::abs(step) > max_step) step = dir * max_step;
    double c = a + step;
    if (dir < 0.0) c = std::max(c, bound);
    else c = std::min(c, bound);
    if (c == a) return a;
    const double gc = dphi(c);
    if (gc == 0.0) return c;
    if ((gc > 0.0) != sgn) {
      b = c;
      bracketed = true;
      break;
    }
    a = c;
    ga = gc;
    if (c == bound) return c;
  }
  if (!bracketed) return a;

  // The slope changes sign between a and b: safeguarded Newton/bisection.
  double fa = ga;
  for (int it = 0; it < 200; ++it) {
    if (std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(a))) break;
    const double curv = (dphi(a + h) - dphi(a - h)) / (2.0 * h);
    double c = curv > 0.0 ? a - fa / curv : 0.5 * (a + b);
    const double mn = std::min(a, b), mx = std::max(a, b);
    if (!(c > mn && c < mx)) c = 0.5 * (a + b);
    const double gc = dphi(c);
    if (gc == 0.0) return c;
    if ((gc > 0.0) == sgn) {
      a = c;
      fa = gc;
    } else {
      b = c;
    }
  }
  return std::abs(fa) <= std::abs(dphi(b)) ? a : b;
}

inline double local_energy(ChainEnergy& e, const ChainConfig& u, int i, double x) {
  double s = 0.0;
  for (int j = i - e.r(); j <= i + e.r(); ++j) s += e.site_energy_with(u, j, i, x);
  return s;
}

inline void sweep(ChainEnergy& e, ChainConfig& u, const ConstraintBox& box, const FreeSites& free) {
  for (int i : free.sites) {
    const double x0 = u(i);
    const double x = coordinate_minimize(e, u, i, box.lo(i), box.hi(i));
    if (x == x0) continue;
    // the slope keeps its sign along the path, so phi(x) <= phi(x0) holds up to roundoff
    const double before = local_energy(e, u, i, x0);
    const double slack = 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(before));
    if (local_energy(e, u, i, x) <= before + slack) u.at(i) = x;
  }
}

inline double projected_step_norm(const ChainConfig& u, const ConstraintBox& box, const FreeSites& free,
                                  const std::vector<double>& res, int base) {
  double s = 0.0;
  for (int i : free.sites) {
    const double g = res[static_cast<std::size_t>(i - base)];
    const double x = u(i);
    s = std::max(s, std::abs(x - std::clamp(x - g, box.lo(i), box.hi(i))));
  }
  return s;
}

inline std::vector<int> active_sites(const ChainConfig& u, const ConstraintBox& box, const FreeSites& free,
                                     double tol) {
  std::vector<int> act;
  for (int i : free.sites)
    if (u(i) - box.lo(i) <= tol || box.hi(i) - u(i) <= tol) act.push_back(i);
  return act;
}

}  // namespace detail

/// One ascending Gauss-Seidel pass: each free site moves to the first local
/// minimizer of the energy in its coordinate, projected into its interval.
inline ChainConfig gauss_seidel_sweep(const ChainConfig& u, const ConstraintBox& box, const StencilPotential& pot) {
  box.validate();
  if (u.window() != box.window) throw InvalidArgument("gauss_seidel_sweep: window mismatch");
  ChainConfig v = u;
  ChainEnergy e(pot);
  const auto free = detail::FreeSites::build(v, box, pot.r());
  detail::sweep(e, v, box, free);
  return v;
}

/// Descends J_{1;p,q} inside the box until the projected gradient sup-norm is
/// at most `opt.tol`. The energy is nonincreasing across iterations up to
/// roundoff, and every iterate is feasible.
///
/// Non-convergence is reported through `converged = false`, not thrown.
inline SolveReport minimize(const ChainConfig& init, const ConstraintBox& box, const StencilPotential& pot,
                            double c0, const SolveOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw InvalidArgument("minimize: tol must be > 0");
  box.validate();
  if (init.window() != box.window) throw InvalidArgument("minimize: init window does not match box");
  const auto t_start = std::chrono::steady_clock::now();

  const int r = pot.r();
  ChainConfig u = init;
  ChainEnergy e(pot);
  const auto free = detail::FreeSites::build(u, box, r);
  const Window ew = energy_window(u, r);
  const int base = u.lo() - r;

  auto energy = [&](const ChainConfig& x) { return e.window_sum(x, ew.lo, ew.hi, c0); };
  auto magnitude = [&](const ChainConfig& x) {
    double m = 0.0;
    for (int j = ew.lo; j <= ew.hi; ++j) m += std::abs(e.site_energy(x, j) - c0);
    return m;
  };

  SolveReport rep;
  double f = energy(u);
  std::vector<double> res = e.residual(u);
  double pg = detail::projected_step_norm(u, box, free, res, base);
  long iter = 0;
  bool stalled = false;
  for (;;) {
    if (opt.observer) opt.observer(iter, f);
    if (pg <= opt.tol) {
      rep.converged = true;
      break;
    }
    if (iter >= opt.max_iter || stalled) break;
    ++iter;

    const bool gs_step = opt.algorithm == Algorithm::GaussSeidel ||
                         (opt.algorithm == Algorithm::Hybrid && opt.gs_every > 0 && iter % opt.gs_every == 0);
    if (gs_step) {
      detail::sweep(e, u, box, free);
      f = energy(u);
      res = e.residual(u);
      pg = detail::projected_step_norm(u, box, free, res, base);
      continue;
    }

    // projected gradient step with Armijo backtracking
    const double floor = 32.0 * std::numeric_limits<double>::epsilon() * (1.0 + magnitude(u));
    double t = opt.initial_step;
    bool accepted = false;
    ChainConfig trial = u;
    while (t >= 1e-12) {
      double slope = 0.0;
      for (int i : free.sites) {
        const double g = res[static_cast<std::size_t>(i - base)];
        const double x = std::clamp(u(i) - t * g, box.lo(i), box.hi(i));
        trial.at(i) = x;
        slope += g * (x - u(i));
      }
      const double ft = energy(trial);
      if (ft <= f + opt.armijo_slope * slope) {
        accepted = true;
      } else if (ft - f <= floor) {
        // energy change is below roundoff: accept only if the projected gradient shrinks
        const auto rt = e.residual(trial);
        if (detail::projected_step_norm(trial, box, free, rt, base) < pg) accepted = true;
      }
      if (accepted) {
        u = trial;
        f = ft;
        break;
      }
      t *= opt.armijo_shrink;
    }
    if (!accepted) {
      if (opt.algorithm == Algorithm::Hybrid) {
        detail::sweep(e, u, box, free);
        f = energy(u);
      } else {
        stalled = true;
      }
    }
    res = e.residual(u);
    pg = detail::projected_step_norm(u, box, free, res, base);
  }

  rep.profile = u;
  rep.energy = f;
  rep.residual_sup = pg;
  rep.iterations = iter;
  rep.active_sites = detail::active_sites(u, box, free, opt.active_tol);
  rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return rep;
}

}  // namespace fkmt

namespace fkmt {

/// A solve exhausted its iterations; the partial report is attached.
class NoConvergence : public Error {
public:
  NoConvergence(const std::string& what, SolveReport report) : Error(what), report_(std::move(report)) {}
  [[nodiscard]] const SolveReport& report() const { return report_; }

private:
  SolveReport report_;
};

}  // namespace fkmt
