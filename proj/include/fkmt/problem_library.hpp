#pragma once

// The named variational problems: constant ground states and the gap pair,
// basic heteroclinic fronts, pinned heteroclinic levels, and constrained
// multitransition problems over marker patterns.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fkmt/box_minimizer.hpp"
#include "fkmt/energy.hpp"
#include "fkmt/errors.hpp"
#include "fkmt/lattice_config.hpp"
#include "fkmt/stencil_potential.hpp"

namespace fkmt {

/// Adjacent minimizing constants v0 < w0 of the ground level.
///
/// Fails with GapConditionFailed when the minimizing set is a continuum or the
/// lifted constants are not Euler-Lagrange solutions to 1e-10.
inline GapPair find_periodic_and_gap(const StencilPotential& pot, const GroundLevel& ground) {
  if (ground.continuum) throw GapConditionFailed("ground level has a continuum of minimizing constants");
  if (ground.argmin.empty()) throw GapConditionFailed("no minimizing constant found");
  const double v0 = ground.argmin.front();
  const double w0 = ground.argmin.size() > 1 ? ground.argmin[1] : v0 + 1.0;
  for (double x : {v0, w0})
    if (!(std::abs(constant_slope(pot, x)) <= 1e-10))
      throw GapConditionFailed("minimizing constant is not an Euler-Lagrange solution to 1e-10");
  return GapPair::make(v0, w0);
}

inline GapPair find_periodic_and_gap(const StencilPotential& pot) { return find_periodic_and_gap(pot, ground_level(pot)); }

enum class Direction { Ascending, Descending };

inline const char* to_string(Direction d) { return d == Direction::Ascending ? "ascending" : "descending"; }

inline Direction parse_direction(const std::string& s) {
  if (s == "ascending") return Direction::Ascending;
  if (s == "descending") return Direction::Descending;
  throw InvalidArgument("unknown direction '" + s + "'");
}

/// A converged basic front and the rho_-/rho_+ values of its integer translates.
struct HeteroclinicFamily {
  Direction direction = Direction::Ascending;
  ChainConfig base;  // normalized: base(-1) < midpoint <= base(0) (reversed for descending)
  SolveReport report;
  std::vector<double> rho_minus_values;  // |base(i) - v0| in order of i, nontrivial only
  std::vector<double> rho_plus_values;   // |base(i) - w0| in order of i, nontrivial only
};

namespace detail {

inline std::pair<double, double> front_tails(const GapPair& gap, Direction d) {
  return d == Direction::Ascending ? std::pair{gap.v0, gap.w0} : std::pair{gap.w0, gap.v0};
}

inline void sample_rho(HeteroclinicFamily& fam, const GapPair& gap, double eps = kDefaultOrderTol) {
  fam.rho_minus_values.clear();
  fam.rho_plus_values.clear();
  for (int i = fam.base.lo(); i <= fam.base.hi(); ++i) {
    const double rm = std::abs(fam.base(i) - gap.v0);
    const double rp = std::abs(fam.base(i) - gap.w0);
    if (rm > eps && rm < gap.rho_bar - eps) fam.rho_minus_values.push_back(rm);
    if (rp > eps && rp < gap.rho_bar - eps) fam.rho_plus_values.push_back(rp);
  }
}

}  // namespace detail

/// Solves the unconstrained front problem between v0 and w0 in the given
/// direction, starting from a linear ramp over the middle third of the window,
/// and normalizes the result by an integer shift so that it crosses the
/// midpoint (v0 + w0) / 2 between sites -1 and 0.
inline HeteroclinicFamily find_heteroclinic(const GapPair& gap, Direction dir, Window window,
                                            const StencilPotential& pot, const GroundLevel& ground,
                                            const SolveOptions& opt = {}) {
  if (window.size() < 40 * pot.r()) throw InvalidArgument("find_heteroclinic: window must span at least 40r sites");
  const auto [left, right] = detail::front_tails(gap, dir);
  const int third = window.size() / 3;
  const int a = window.lo + third, b = window.hi - third;
  std::vector<double> vals;
  for (int i = window.lo; i <= window.hi; ++i) {
    const double t = std::clamp(static_cast<double>(i - a) / std::max(1, b - a), 0.0, 1.0);
    vals.push_back(left + t * (right - left));
  }
  const ChainConfig init(window.lo, std::move(vals), left, right);
  const auto box = ConstraintBox::uniform(window, gap.v0, gap.w0);
  SolveReport rep = minimize(init, box, pot, ground.c0, opt);
  if (!rep.converged) throw NoConvergence("find_heteroclinic: front did not converge", rep);

  const double mid = 0.5 * (gap.v0 + gap.w0);
  std::optional<int> cross;
  for (int i = window.lo; i <= window.hi; ++i) {
    const double x = rep.profile(i);
    if (dir == Direction::Ascending ? x >= mid : x <= mid) {
      cross = i;
      break;
    }
  }
  bool interior = false;
  for (double x : rep.profile.values())
    if (x > gap.v0 + kDefaultOrderTol && x < gap.w0 - kDefaultOrderTol) interior = true;
  if (!cross || !interior) throw DegenerateFront("find_heteroclinic: converged profile has no transition");
  if (!(rep.energy > 0.0)) throw DegenerateFront("find_heteroclinic: front energy is not positive");

  rep.profile = shift(rep.profile, *cross);
  for (int& i : rep.active_sites) i -= *cross;

  HeteroclinicFamily fam;
  fam.direction = dir;
  fam.base = rep.profile;
  fam.report = rep;
  detail::sample_rho(fam, gap);
  return fam;
}

/// Midpoint of the widest gap between consecutive sorted values of
/// {0, rho_bar} union `values`; ties go to the midpoint nearest rho_bar / 2.
inline double widest_gap_midpoint(std::vector<double> values, double rho_bar, double min_sep = 1e-6) {
  values.push_back(0.0);
  values.push_back(rho_bar);
  std::sort(values.begin(), values.end());
  double best_width = -1.0, best_mid = 0.0;
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    const double lo = std::max(values[k], 0.0), hi = std::min(values[k + 1], rho_bar);
    const double width = hi - lo;
    const double mid = 0.5 * (lo + hi);
    const bool wider = width > best_width + 1e-12;
    const bool tie = std::abs(width - best_width) <= 1e-12 &&
                     std::abs(mid - 0.5 * rho_bar) < std::abs(best_mid - 0.5 * rho_bar);
    if (wider || tie) {
      best_width = width;
      best_mid = mid;
    }
  }
  if (best_width < 2.0 * min_sep) throw RhoSelectionFailed("sampled family values are dense in (0, rho_bar)");
  for (double v : values)
    if (std::abs(v - best_mid) < min_sep) throw RhoSelectionFailed("rho too close to a sampled family value");
  return best_mid;
}

/// rho_1..rho_4 avoiding the sampled rho_-/rho_+ values of both families.
inline std::array<double, 4> choose_rho(const HeteroclinicFamily& up, const HeteroclinicFamily& down,
                                        const GapPair& gap) {
  if (up.direction != Direction::Ascending || down.direction != Direction::Descending)
    throw InvalidArgument("choose_rho: expects (ascending, descending) families");
  return {widest_gap_midpoint(up.rho_minus_values, gap.rho_bar), widest_gap_midpoint(up.rho_plus_values, gap.rho_bar),
          widest_gap_midpoint(down.rho_plus_values, gap.rho_bar),
          widest_gap_midpoint(down.rho_minus_values, gap.rho_bar)};
}

enum class TransitionKind {
  HomoclinicV0,         // 2k transitions, asymptotic to v0 on both sides
  HomoclinicW0,         // 2k transitions, asymptotic to w0 on both sides
  HeteroclinicV0W0,     // 2k+1 transitions, v0 on the left, w0 on the right
  HeteroclinicW0V0,     // 2k+1 transitions, w0 on the left, v0 on the right
  BasicHeteroclinic,
};

inline const char* to_string(TransitionKind k) {
  switch (k) {
    case TransitionKind::HomoclinicV0: return "homoclinic_v0_2k";
    case TransitionKind::HomoclinicW0: return "homoclinic_w0_2k";
    case TransitionKind::HeteroclinicV0W0: return "heteroclinic_v0_w0_2k1";
    case TransitionKind::HeteroclinicW0V0: return "heteroclinic_w0_v0_2k1";
    case TransitionKind::BasicHeteroclinic: return "basic_heteroclinic";
  }
  return "?";
}

inline TransitionKind parse_transition_kind(const std::string& s) {
  for (auto k : {TransitionKind::HomoclinicV0, TransitionKind::HomoclinicW0, TransitionKind::HeteroclinicV0W0,
                 TransitionKind::HeteroclinicW0V0, TransitionKind::BasicHeteroclinic})
    if (s == to_string(k)) return k;
  throw InvalidArgument("unknown problem kind '" + s + "'");
}

/// Marker vector m, constraint length l, and radii rho_1..rho_4 of a multitransition problem.
struct TransitionPattern {
  TransitionKind kind = TransitionKind::HomoclinicV0;
  int k = 1;
  std::vector<int> m;
  int l = 1;
  std::array<double, 4> rho{};

  [[nodiscard]] bool starts_at_v0() const {
    return kind == TransitionKind::HomoclinicV0 || kind == TransitionKind::HeteroclinicV0W0 ||
           kind == TransitionKind::BasicHeteroclinic;
  }
  [[nodiscard]] int transitions() const {
    return kind == TransitionKind::BasicHeteroclinic ? 1 : static_cast<int>(m.size()) / 2;
  }
};

/// Checks marker count and ordering: m_i < m_{i+1}, and m_j + 2l < m_{j+1} for even j (1-based).
inline void validate_markers(TransitionKind kind, const std::vector<int>& m, int l) {
  if (kind == TransitionKind::BasicHeteroclinic) {
    if (!m.empty()) throw InvalidPattern("basic heteroclinic takes no markers");
    return;
  }
  if (l < 1) throw InvalidPattern("constraint length l must be >= 1");
  const bool homoclinic = kind == TransitionKind::HomoclinicV0 || kind == TransitionKind::HomoclinicW0;
  if (m.empty() || (homoclinic ? m.size() % 4 != 0 : m.size() % 4 != 2))
    throw InvalidPattern(std::string("marker count must be ") + (homoclinic ? "4k" : "4k+2") + " for " + to_string(kind));
  for (std::size_t q = 0; q + 1 < m.size(); ++q) {
    if (!(m[q] < m[q + 1])) throw InvalidPattern("markers must be strictly increasing");
    const std::size_t j = q + 1;  // 1-based index of m[q]
    if (j % 2 == 0 && !(m[q] + 2 * l < m[q + 1]))
      throw InvalidPattern("marker gap violates m_j + 2l < m_{j+1} at j = " + std::to_string(j));
  }
}

inline void validate_rho(const std::array<double, 4>& rho, const GapPair& gap) {
  for (double x : rho)
    if (!(x > 0.0 && x < gap.rho_bar)) throw InvalidPattern("each rho_i must lie in (0, rho_bar)");
}

inline TransitionPattern make_pattern(TransitionKind kind, std::vector<int> m, int l, std::array<double, 4> rho = {}) {
  validate_markers(kind, m, l);
  TransitionPattern p;
  p.kind = kind;
  p.m = std::move(m);
  p.l = l;
  p.rho = rho;
  p.k = kind == TransitionKind::BasicHeteroclinic ? 0 : static_cast<int>(p.m.size()) / 4;
  return p;
}

/// (left tail, right tail) of the admissible set for a pattern.
inline std::pair<double, double> pattern_tails(TransitionKind kind, const GapPair& gap) {
  switch (kind) {
    case TransitionKind::HomoclinicV0: return {gap.v0, gap.v0};
    case TransitionKind::HomoclinicW0: return {gap.w0, gap.w0};
    case TransitionKind::HeteroclinicV0W0:
    case TransitionKind::BasicHeteroclinic: return {gap.v0, gap.w0};
    case TransitionKind::HeteroclinicW0V0: return {gap.w0, gap.v0};
  }
  return {gap.v0, gap.v0};
}

/// Default window: 4l + (m_last - m_first) + 16r sites with symmetric margins.
inline Window default_window(const TransitionPattern& p, int r) {
  if (p.m.empty()) return {-20 * r, 20 * r};
  const int margin = 2 * p.l + 8 * r;
  return {p.m.front() - margin, p.m.back() + margin};
}

/// The constraint regions of the pattern's table, in marker order.
///
/// Marker q (1-based) opens a region of length l: before the marker for
/// q = 1, 3 (mod 4) and from the marker on for q = 2, 0 (mod 4). Patterns
/// starting at v0 use the cycle (rho_- rho_1, rho_+ rho_2, rho_+ rho_3, rho_- rho_4);
/// patterns starting at w0 use (rho_+ rho_3, rho_- rho_4, rho_- rho_1, rho_+ rho_2).
inline std::vector<ConstraintRegion> constraint_regions(const TransitionPattern& p) {
  std::vector<ConstraintRegion> regions;
  const bool from_v0 = p.starts_at_v0();
  for (std::size_t q0 = 0; q0 < p.m.size(); ++q0) {
    const int phase = static_cast<int>(q0 % 4);  // 0 -> (a), 1 -> (b), 2 -> (c), 3 -> (d)
    const int mq = p.m[q0];
    ConstraintRegion reg;
    if (phase == 0 || phase == 2) {
      reg.first = mq - p.l;
      reg.last = mq - 1;
    } else {
      reg.first = mq;
      reg.last = mq + p.l - 1;
    }
    static constexpr int v0_rho[4] = {1, 2, 3, 4};
    static constexpr int w0_rho[4] = {3, 4, 1, 2};
    static constexpr ConstraintSide v0_side[4] = {ConstraintSide::Minus, ConstraintSide::Plus, ConstraintSide::Plus,
                                                  ConstraintSide::Minus};
    reg.rho_index = from_v0 ? v0_rho[phase] : w0_rho[phase];
    reg.side = from_v0 ? v0_side[phase]
                       : (v0_side[phase] == ConstraintSide::Minus ? ConstraintSide::Plus : ConstraintSide::Minus);
    reg.rho = p.rho[static_cast<std::size_t>(reg.rho_index - 1)];
    regions.push_back(reg);
  }
  return regions;
}

/// Throws PatternWindowMismatch unless `window` contains [m_first - l - 4r, m_last + l + 4r].
inline void check_window(const TransitionPattern& p, Window window, int r = 1) {
  if (p.m.empty()) return;
  const Window need{p.m.front() - p.l - 4 * r, p.m.back() + p.l + 4 * r};
  if (!window.contains(need))
    throw PatternWindowMismatch("window [" + std::to_string(window.lo) + ", " + std::to_string(window.hi) +
                                "] does not contain [" + std::to_string(need.lo) + ", " + std::to_string(need.hi) + "]");
}

/// The global order interval [v0, w0] over `window`, tightened on every constraint region.
inline ConstraintBox build_constraints(const TransitionPattern& p, const GapPair& gap, Window window, int r = 1) {
  validate_markers(p.kind, p.m, p.l);
  check_window(p, window, r);
  auto box = ConstraintBox::uniform(window, gap.v0, gap.w0);
  box.regions = constraint_regions(p);
  for (const auto& reg : box.regions) {
    for (int i = reg.first; i <= reg.last; ++i) {
      const auto k = static_cast<std::size_t>(i - window.lo);
      if (reg.side == ConstraintSide::Minus) box.upper[k] = std::min(box.upper[k], gap.v0 + reg.rho);
      else box.lower[k] = std::max(box.lower[k], gap.w0 - reg.rho);
    }
  }
  box.validate();
  return box;
}

/// Slack of u against the rho-faces of the constraint regions (the global box faces are ignored).
inline double constraint_slack(const ChainConfig& u, const std::vector<ConstraintRegion>& regions, const GapPair& gap) {
  double slack = std::numeric_limits<double>::infinity();
  for (const auto& reg : regions)
    for (int i = reg.first; i <= reg.last; ++i)
      slack = std::min(slack, reg.side == ConstraintSide::Minus ? gap.v0 + reg.rho - u(i) : u(i) - (gap.w0 - reg.rho));
  return slack;
}

/// Direction of each transition, left to right.
inline std::vector<Direction> transition_directions(const TransitionPattern& p) {
  std::vector<Direction> dirs;
  bool up = p.starts_at_v0();
  for (int t = 0; t < p.transitions(); ++t) {
    dirs.push_back(up ? Direction::Ascending : Direction::Descending);
    up = !up;
  }
  return dirs;
}

/// Sum of the basic front energies, one per transition: the concatenation upper level.
inline double concatenation_level(const TransitionPattern& p, double c1_up, double c1_down) {
  double s = 0.0;
  for (auto d : transition_directions(p)) s += d == Direction::Ascending ? c1_up : c1_down;
  return s;
}

struct MultitransitionResult {
  SolveReport report;
  ConstraintBox box;
  double min_slack = 0.0;
  bool strict = false;       // no rho-face attained inside any constraint region
  double el_residual_sup = 0.0;
  bool tails_exact = false;
};

/// Shifted fronts glued at the midpoints between consecutive transition centers.
inline ChainConfig concatenate_fronts(const TransitionPattern& p, const GapPair& gap, const HeteroclinicFamily& up,
                                      const HeteroclinicFamily& down, Window window) {
  const auto dirs = transition_directions(p);
  std::vector<int> centers;
  if (p.m.empty()) centers.push_back(0);
  for (std::size_t t = 0; t < dirs.size() && !p.m.empty(); ++t) {
    const int a = p.m[2 * t], b = p.m[2 * t + 1];
    centers.push_back(a + (b - a) / 2);
  }
  const auto [left, right] = pattern_tails(p.kind, gap);
  std::vector<double> vals;
  std::size_t t = 0;
  for (int i = window.lo; i <= window.hi; ++i) {
    while (t + 1 < centers.size() && 2 * i >= centers[t] + centers[t + 1]) ++t;
    const auto& base = dirs[t] == Direction::Ascending ? up.base : down.base;
    vals.push_back(base(i - centers[t]));
  }
  return {window.lo, std::move(vals), left, right};
}

/// Minimizes J1 over the constrained set of the pattern, starting from the
/// concatenated fronts clamped into the box. Active constraints are reported,
/// not thrown.
inline MultitransitionResult solve_multitransition(const TransitionPattern& p, const GapPair& gap,
                                                   const StencilPotential& pot, const GroundLevel& ground,
                                                   Window window, const HeteroclinicFamily& up,
                                                   const HeteroclinicFamily& down, const SolveOptions& opt = {}) {
  validate_rho(p.rho, gap);
  MultitransitionResult res;
  res.box = build_constraints(p, gap, window, pot.r());
  ChainConfig init = concatenate_fronts(p, gap, up, down, window);
  for (int i = window.lo; i <= window.hi; ++i) init.at(i) = std::clamp(init(i), res.box.lo(i), res.box.hi(i));
  res.report = minimize(init, res.box, pot, ground.c0, opt);
  if (!res.report.converged) throw NoConvergence("solve_multitransition: did not converge", res.report);
  const auto& u = res.report.profile;
  res.min_slack = constraint_slack(u, res.box.regions, gap);
  res.strict = res.min_slack > opt.active_tol;
  const auto r = el_residual(u, pot);
  for (double x : r) res.el_residual_sup = std::max(res.el_residual_sup, std::abs(x));
  const auto [left, right] = pattern_tails(p.kind, gap);
  res.tails_exact = u.left_tail() == left && u.right_tail() == right;
  return res;
}

/// Front problem with u(0) pinned to `pin_value`, started from the translate
/// of the family base whose value at 0 is closest to the pin.
inline SolveReport solve_pinned(const GapPair& gap, Direction dir, double pin_value, const StencilPotential& pot,
                                const GroundLevel& ground, Window window, const HeteroclinicFamily& fam,
                                const SolveOptions& opt = {}) {
  if (!window.contains(0)) throw InvalidArgument("solve_pinned: window must contain site 0");
  const auto [left, right] = detail::front_tails(gap, dir);
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int s = fam.base.lo(); s <= fam.base.hi(); ++s) {
    const double d = std::abs(fam.base(s) - pin_value);
    if (d < best_d) {
      best_d = d;
      best = s;
    }
  }
  ChainConfig init = ChainConfig::resample(shift(fam.base, best), window);
  init = ChainConfig(init.lo(), init.values(), left, right);
  auto box = ConstraintBox::uniform(window, gap.v0, gap.w0);
  box.pins.emplace_back(0, pin_value);
  box.validate();
  auto rep = minimize(init, box, pot, ground.c0, opt);
  if (!rep.converged) throw NoConvergence("solve_pinned: did not converge", rep);
  return rep;
}

struct PinnedLevel {
  SolveReport best;
  SolveReport minus_pin;  // ||u - v0||_{T_0} = rho
  SolveReport plus_pin;   // ||u - w0||_{T_0} = rho
  double d1 = 0.0;
};

/// d1 candidate: the smaller of the two pinned front energies. Ascending pins
/// u(0) to v0 + rho_1 or w0 - rho_2; descending to v0 + rho_4 or w0 - rho_3.
inline PinnedLevel solve_pinned_level(const GapPair& gap, const std::array<double, 4>& rho, Direction dir,
                                      const StencilPotential& pot, const GroundLevel& ground, Window window,
                                      const HeteroclinicFamily& fam, const SolveOptions& opt = {}) {
  validate_rho(rho, gap);
  const double rm = dir == Direction::Ascending ? rho[0] : rho[3];
  const double rp = dir == Direction::Ascending ? rho[1] : rho[2];
  PinnedLevel lvl;
  lvl.minus_pin = solve_pinned(gap, dir, gap.v0 + rm, pot, ground, window, fam, opt);
  lvl.plus_pin = solve_pinned(gap, dir, gap.w0 - rp, pot, ground, window, fam, opt);
  lvl.best = lvl.minus_pin.energy <= lvl.plus_pin.energy ? lvl.minus_pin : lvl.plus_pin;
  lvl.d1 = lvl.best.energy;
  return lvl;
}

}  // namespace fkmt
