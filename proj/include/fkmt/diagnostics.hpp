#pragma once

// Post-solve structural checks: Birkhoff trichotomy over shifts, asymptotic
// targets, submodularity of the energy, and energy-level separations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fkmt/energy.hpp"
#include "fkmt/errors.hpp"
#include "fkmt/lattice_config.hpp"
#include "fkmt/problem_library.hpp"
#include "fkmt/stencil_potential.hpp"

namespace fkmt {

struct BirkhoffResult {
  std::vector<std::pair<int, Ordering>> verdicts;
  bool birkhoff = true;
  std::optional<int> first_crossing;
};

/// compare(shift(u, k), u) for every k in [-k_range, k_range] \ {0}.
/// Birkhoff is a necessary condition for minimality only.
inline BirkhoffResult birkhoff_check(const ChainConfig& u, int k_range, double eps_ord = kDefaultOrderTol, int r = 1) {
  if (k_range < 1) throw InvalidArgument("birkhoff_check: k_range must be >= 1");
  BirkhoffResult res;
  for (int k = -k_range; k <= k_range; ++k) {
    if (k == 0) continue;
    const Ordering o = compare(shift(u, k), u, eps_ord, r);
    res.verdicts.emplace_back(k, o);
    if (o == Ordering::Crossing && res.birkhoff) {
      res.birkhoff = false;
      res.first_crossing = k;
    }
  }
  return res;
}

/// Shift range used when none is given: twice the window width, capped at 512.
inline int default_k_range(const ChainConfig& u) { return std::min(2 * u.window().size(), 512); }

enum class Target { V0, W0 };

inline const char* to_string(Target t) { return t == Target::V0 ? "v0" : "w0"; }

struct AsymptoticsResult {
  Target left = Target::V0;
  Target right = Target::V0;
  double left_decay = 0.0;   // max |u - target| over the first 4r window sites
  double right_decay = 0.0;  // max |u - target| over the last 4r window sites
};

inline AsymptoticsResult asymptotics_check(const ChainConfig& u, const GapPair& gap, int r = 1) {
  auto classify = [&](double t) {
    if (std::abs(t - gap.v0) <= 1e-9) return Target::V0;
    if (std::abs(t - gap.w0) <= 1e-9) return Target::W0;
    throw TailNotInGap("asymptotics_check: tail value is neither v0 nor w0");
  };
  AsymptoticsResult res;
  res.left = classify(u.left_tail());
  res.right = classify(u.right_tail());
  const double lt = res.left == Target::V0 ? gap.v0 : gap.w0;
  const double rt = res.right == Target::V0 ? gap.v0 : gap.w0;
  const int span = std::min(4 * r, u.window().size());
  for (int q = 0; q < span; ++q) {
    res.left_decay = std::max(res.left_decay, std::abs(u(u.lo() + q) - lt));
    res.right_decay = std::max(res.right_decay, std::abs(u(u.hi() - q) - rt));
  }
  return res;
}

/// J(min(u, v)) + J(max(u, v)) - J(u) - J(v) over the common energy window.
inline double submodularity_margin(const ChainConfig& u, const ChainConfig& v, const StencilPotential& pot, double c0) {
  const auto [mn, mx] = pointwise_min_max(u, v);
  const Window w = energy_window(mn, pot.r());
  ChainEnergy e(pot);
  return e.window_sum(mn, w.lo, w.hi, c0) + e.window_sum(mx, w.lo, w.hi, c0) - e.window_sum(u, w.lo, w.hi, c0) -
         e.window_sum(v, w.lo, w.hi, c0);
}

struct SubmodularityAudit {
  int trials = 0;
  double worst_margin = -std::numeric_limits<double>::infinity();
  [[nodiscard]] bool pass(double tol = 1e-12) const { return worst_margin <= tol; }
  friend bool operator==(const SubmodularityAudit&, const SubmodularityAudit&) = default;
};

/// Seeded random pairs in the global box on a width-30 window, tails included.
inline SubmodularityAudit submodularity_audit(const StencilPotential& pot, const GapPair& gap, double c0, int trials,
                                              std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("submodularity_audit: trials must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(gap.v0, gap.w0);
  auto draw = [&] {
    std::vector<double> vals(30);
    for (auto& x : vals) x = dist(rng);
    const double lt = dist(rng), rt = dist(rng);
    return ChainConfig(0, std::move(vals), lt, rt);
  };
  SubmodularityAudit a;
  a.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const auto u = draw();
    const auto v = draw();
    a.worst_margin = std::max(a.worst_margin, submodularity_margin(u, v, pot, c0));
  }
  return a;
}

struct LevelCheck {
  std::string name;
  bool pass = false;
  double margin = 0.0;  // positive means satisfied with room
  friend bool operator==(const LevelCheck&, const LevelCheck&) = default;
};

struct PatternLevel {
  std::string id;
  double b = 0.0;
  double lower = 0.0;  // max(c1(v0,w0), c1(w0,v0))
  double upper = 0.0;  // sum of front energies over the pattern's transitions
};

struct LevelInputs {
  std::optional<double> c1_up, c1_down, d1_up, d1_down;
  std::vector<PatternLevel> patterns;
};

struct EnergyLevels {
  double c1_up = 0.0, c1_down = 0.0, d1_up = 0.0, d1_down = 0.0;
  std::vector<PatternLevel> patterns;
  std::vector<LevelCheck> checks;
  [[nodiscard]] bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
  }
};

struct LevelTolerances {
  double strict_margin = 1e-6;
  double lower_slack = 1e-9;
  double upper_slack = 1e-3;
};

/// Tabulates the levels and checks c1 + c1' > 0, d1 > c1 in both directions
/// (margin >= 1e-6), and max(c1, c1') - 1e-9 <= b <= sum of fronts + 1e-3 per pattern.
inline EnergyLevels level_summary(const LevelInputs& in, const LevelTolerances& tol = {}) {
  if (!in.c1_up || !in.c1_down) throw MissingLevel("level_summary: front levels c1 not available");
  if (!in.d1_up || !in.d1_down) throw MissingLevel("level_summary: pinned levels d1 not available");
  EnergyLevels lv;
  lv.c1_up = *in.c1_up;
  lv.c1_down = *in.c1_down;
  lv.d1_up = *in.d1_up;
  lv.d1_down = *in.d1_down;
  lv.patterns = in.patterns;
  auto strict = [&](std::string name, double margin) {
    lv.checks.push_back({std::move(name), margin >= tol.strict_margin, margin});
  };
  strict("c1_sum_positive", lv.c1_up + lv.c1_down);
  strict("d1_up_above_c1", lv.d1_up - lv.c1_up);
  strict("d1_down_above_c1", lv.d1_down - lv.c1_down);
  for (const auto& p : in.patterns) {
    const double lo = p.b - (p.lower - tol.lower_slack);
    const double hi = p.upper + tol.upper_slack - p.b;
    lv.checks.push_back({p.id + ":lower", lo >= 0.0, lo});
    lv.checks.push_back({p.id + ":upper", hi >= 0.0, hi});
  }
  return lv;
}

/// Everything the per-solution diagnostics need besides the profile itself.
struct DiagnosticsContext {
  const StencilPotential* pot = nullptr;
  GapPair gap;
  GroundLevel ground;
  SubmodularityAudit submodularity;
  std::vector<std::pair<std::string, ChainConfig>> others;
  double eps_ord = kDefaultOrderTol;
};

struct DiagnosticsReport {
  bool birkhoff = true;
  std::optional<int> first_crossing;
  int k_range = 0;
  std::vector<std::pair<std::string, Ordering>> ordering_vs;
  bool submodularity_pass = true;
  double submodularity_worst = 0.0;
  double residual_sup = 0.0;
  double tail_decay = 0.0;
  std::optional<double> min_slack;
  bool strict_constraints = true;
  Target left_target = Target::V0;
  Target right_target = Target::V0;
  friend bool operator==(const DiagnosticsReport&, const DiagnosticsReport&) = default;
};

/// Recomputes every diagnostic from the stored profile (and its constraint regions, if any).
inline DiagnosticsReport compute_diagnostics(const std::string& id, const ChainConfig& u,
                                             const std::vector<ConstraintRegion>& regions,
                                             const DiagnosticsContext& ctx) {
  const auto& pot = *ctx.pot;
  DiagnosticsReport d;
  d.k_range = default_k_range(u);
  const auto b = birkhoff_check(u, d.k_range, ctx.eps_ord, pot.r());
  d.birkhoff = b.birkhoff;
  d.first_crossing = b.first_crossing;
  for (const auto& [oid, other] : ctx.others)
    if (oid != id) d.ordering_vs.emplace_back(oid, compare(u, other, ctx.eps_ord, pot.r()));
  d.submodularity_pass = ctx.submodularity.pass();
  d.submodularity_worst = ctx.submodularity.worst_margin;
  for (double x : el_residual(u, pot)) d.residual_sup = std::max(d.residual_sup, std::abs(x));
  const auto energy = J1_total(u, pot, ctx.ground);
  const auto n = energy.per_site.size();
  const auto edge = static_cast<std::size_t>(2 * pot.r());
  for (std::size_t q = 0; q < std::min(edge, n); ++q)
    d.tail_decay = std::max({d.tail_decay, std::abs(energy.per_site[q]), std::abs(energy.per_site[n - 1 - q])});
  if (!regions.empty()) {
    d.min_slack = constraint_slack(u, regions, ctx.gap);
    d.strict_constraints = *d.min_slack > 1e-9;
  }
  const auto a = asymptotics_check(u, ctx.gap, pot.r());
  d.left_target = a.left;
  d.right_target = a.right;
  return d;
}

}  // namespace fkmt
