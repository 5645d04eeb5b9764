#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fk_oracle.hpp"
#include "fkmt/problem_library.hpp"

using namespace fkmt;

namespace {

struct FkSetup {
  StencilPotential pot = make_fk_example(2, 1.0);
  GroundLevel ground = ground_level(pot);
  GapPair gap = find_periodic_and_gap(pot, ground);
  Window front_window{-60, 60};
  HeteroclinicFamily up = find_heteroclinic(gap, Direction::Ascending, front_window, pot, ground);
  HeteroclinicFamily down = find_heteroclinic(gap, Direction::Descending, front_window, pot, ground);
  std::array<double, 4> rho = choose_rho(up, down, gap);
};

const FkSetup& fk() {
  static const FkSetup s;
  return s;
}

}  // namespace

TEST(Gap, FkExample) {
  const auto g = find_periodic_and_gap(make_fk_example(2, 1.0));
  EXPECT_NEAR(g.v0, 0.0, 1e-12);
  EXPECT_NEAR(g.w0, 1.0, 1e-12);
  EXPECT_NEAR(g.rho_bar, 1.0, 1e-12);
}

TEST(Gap, TwoWell) {
  const auto g = find_periodic_and_gap(make_fk_two_well(2, 1.0));
  EXPECT_NEAR(g.v0, 0.0, 1e-12);
  EXPECT_NEAR(g.w0, 0.5, 1e-12);
  EXPECT_NEAR(g.rho_bar, 0.5, 1e-12);
}

TEST(Gap, FlatPotentialFails) {
  EXPECT_THROW(find_periodic_and_gap(make_fk_table(2, {0.0, 0.0, 0.0, 0.0})), GapConditionFailed);
}

TEST(Heteroclinic, FrontMatchesOracle) {
  const auto& s = fk();
  const auto ref = oracle::solve_front(2, 1.0, -120, 120, 1e-12);
  EXPECT_NEAR(s.up.report.energy, ref.energy(), 1e-8);
  EXPECT_LE(s.up.report.residual_sup, 1e-10);
  EXPECT_GT(s.up.report.energy, 0.0);
  // normalized: crosses 1/2 between sites -1 and 0
  EXPECT_LT(s.up.base(-1), 0.5);
  EXPECT_GE(s.up.base(0), 0.5);
  for (int i = -60; i < 60; ++i) EXPECT_LE(s.up.base(i), s.up.base(i + 1) + kDefaultOrderTol);
  for (int i = -60; i < 60; ++i) EXPECT_GE(s.down.base(i) + kDefaultOrderTol, s.down.base(i + 1));
}

TEST(Heteroclinic, DirectionSymmetry) {
  const auto& s = fk();
  EXPECT_NEAR(s.up.report.energy, s.down.report.energy, 1e-8);
}

TEST(Heteroclinic, TranslateInvariantEnergy) {
  const auto& s = fk();
  EXPECT_NEAR(J1_total(shift(s.up.base, 7), s.pot, s.ground).total, J1_total(s.up.base, s.pot, s.ground).total,
              1e-12);
}

TEST(Heteroclinic, WindowTooSmall) {
  const auto& s = fk();
  EXPECT_THROW(find_heteroclinic(s.gap, Direction::Ascending, {-10, 10}, s.pot, s.ground), InvalidArgument);
}

TEST(Rho, WidestGapMidpoint) {
  EXPECT_NEAR(widest_gap_midpoint({0.1, 0.9}, 1.0), 0.5, 1e-15);
  EXPECT_NEAR(widest_gap_midpoint({0.2}, 1.0), 0.6, 1e-15);
}

TEST(Rho, FkFrontsGiveSymmetricAdmissibleRadii) {
  const auto& s = fk();
  for (double r : s.rho) {
    EXPECT_GT(r, 0.0);
    EXPECT_LT(r, 1.0);
  }
  EXPECT_NEAR(s.rho[0], s.rho[3], 1e-9);
  EXPECT_NEAR(s.rho[1], s.rho[2], 1e-9);
  for (double v : s.up.rho_minus_values) EXPECT_GT(std::abs(v - s.rho[0]), 1e-6);
  EXPECT_THROW(choose_rho(s.down, s.up, s.gap), InvalidArgument);
}

TEST(Pattern, TwoTransitionRegions) {
  const auto p = make_pattern(TransitionKind::HomoclinicV0, {0, 10, 30, 40}, 3, {0.1, 0.2, 0.3, 0.4});
  const auto regs = constraint_regions(p);
  ASSERT_EQ(regs.size(), 4u);
  const ConstraintRegion expect[4] = {{-3, -1, ConstraintSide::Minus, 1, 0.1},
                                      {10, 12, ConstraintSide::Plus, 2, 0.2},
                                      {27, 29, ConstraintSide::Plus, 3, 0.3},
                                      {40, 42, ConstraintSide::Minus, 4, 0.4}};
  for (int q = 0; q < 4; ++q) EXPECT_EQ(regs[q], expect[q]) << q;

  const auto box = build_constraints(p, GapPair::make(0.0, 1.0), {-20, 60});
  EXPECT_EQ(box.hi(-2), 0.1);
  EXPECT_EQ(box.lo(11), 0.8);
  EXPECT_EQ(box.lo(28), 0.7);
  EXPECT_EQ(box.hi(41), 0.4);
  EXPECT_EQ(box.lo(20), 0.0);
  EXPECT_EQ(box.hi(20), 1.0);
}

TEST(Pattern, RejectsMarkerViolations) {
  EXPECT_THROW(make_pattern(TransitionKind::HomoclinicV0, {0, 10, 14, 40}, 3), InvalidPattern);
  EXPECT_THROW(make_pattern(TransitionKind::HomoclinicV0, {0, 10, 30}, 3), InvalidPattern);
  EXPECT_THROW(make_pattern(TransitionKind::HomoclinicV0, {0, 10, 10, 40}, 0), InvalidPattern);
  EXPECT_THROW(make_pattern(TransitionKind::HeteroclinicV0W0, {0, 10, 30, 40}, 3), InvalidPattern);
  EXPECT_THROW(make_pattern(TransitionKind::BasicHeteroclinic, {0}, 3), InvalidPattern);
  const auto p = make_pattern(TransitionKind::HomoclinicV0, {0, 10, 30, 40}, 3, {0.5, 0.5, 0.5, 0.5});
  EXPECT_THROW(build_constraints(p, GapPair::make(0.0, 1.0), {-5, 45}), PatternWindowMismatch);
  EXPECT_THROW(validate_rho({0.5, 1.0, 0.5, 0.5}, GapPair::make(0.0, 1.0)), InvalidPattern);
}

TEST(Pattern, FourTransitionCycleRepeats) {
  const auto p = make_pattern(TransitionKind::HomoclinicV0, {0, 20, 60, 80, 120, 140, 180, 200}, 5);
  const auto regs = constraint_regions(p);
  ASSERT_EQ(regs.size(), 8u);
  for (int q = 0; q < 4; ++q) {
    EXPECT_EQ(regs[q].side, regs[q + 4].side);
    EXPECT_EQ(regs[q].rho_index, regs[q + 4].rho_index);
    EXPECT_EQ(regs[q + 4].first - regs[q].first, 120);
  }
  EXPECT_EQ(transition_directions(p).size(), 4u);
}

TEST(Pattern, TailsAndStartsPerKind) {
  const auto g = GapPair::make(0.0, 1.0);
  EXPECT_EQ(pattern_tails(TransitionKind::HomoclinicV0, g), (std::pair{0.0, 0.0}));
  EXPECT_EQ(pattern_tails(TransitionKind::HomoclinicW0, g), (std::pair{1.0, 1.0}));
  EXPECT_EQ(pattern_tails(TransitionKind::HeteroclinicV0W0, g), (std::pair{0.0, 1.0}));
  EXPECT_EQ(pattern_tails(TransitionKind::HeteroclinicW0V0, g), (std::pair{1.0, 0.0}));
  const auto w = make_pattern(TransitionKind::HomoclinicW0, {0, 20, 60, 80}, 5);
  EXPECT_EQ(constraint_regions(w)[0].side, ConstraintSide::Plus);
  EXPECT_EQ(constraint_regions(w)[0].rho_index, 3);
  EXPECT_EQ(parse_transition_kind("heteroclinic_w0_v0_2k1"), TransitionKind::HeteroclinicW0V0);
  EXPECT_THROW(parse_transition_kind("HOMOCLINIC"), InvalidArgument);
}

TEST(Multitransition, TwoTransitionBump) {
  const auto& s = fk();
  const auto p = make_pattern(TransitionKind::HomoclinicV0, {0, 20, 60, 80}, 5, s.rho);
  const auto res = solve_multitransition(p, s.gap, s.pot, s.ground, {-40, 120}, s.up, s.down);
  EXPECT_TRUE(res.report.converged);
  EXPECT_TRUE(res.strict);
  EXPECT_TRUE(res.tails_exact);
  EXPECT_LE(res.el_residual_sup, 1e-10);
  const double c = s.up.report.energy + s.down.report.energy;
  EXPECT_GE(res.report.energy, std::max(s.up.report.energy, s.down.report.energy) - 1e-9);
  EXPECT_LE(std::abs(res.report.energy - c), 1e-3);
  EXPECT_EQ(concatenation_level(p, s.up.report.energy, s.down.report.energy), c);
}

TEST(Multitransition, SmallSeparationRuns) {
  const auto& s = fk();
  const auto p = make_pattern(TransitionKind::HomoclinicV0, {0, 4, 8, 12}, 1, s.rho);
  const auto res = solve_multitransition(p, s.gap, s.pot, s.ground, default_window(p, 1), s.up, s.down);
  EXPECT_TRUE(res.report.converged);
  EXPECT_GE(res.min_slack, -1e-12);
}

TEST(Multitransition, ThreeTransitionHeteroclinic) {
  const auto& s = fk();
  const auto p = make_pattern(TransitionKind::HeteroclinicV0W0, {0, 20, 60, 80, 120, 140}, 5, s.rho);
  const auto res = solve_multitransition(p, s.gap, s.pot, s.ground, default_window(p, 1), s.up, s.down);
  EXPECT_TRUE(res.report.converged);
  EXPECT_TRUE(res.strict);
  EXPECT_EQ(res.report.profile.left_tail(), 0.0);
  EXPECT_EQ(res.report.profile.right_tail(), 1.0);
  EXPECT_LE(std::abs(res.report.energy - (2 * s.up.report.energy + s.down.report.energy)), 1e-3);
}

TEST(Pinned, LevelExceedsFrontLevel) {
  const auto& s = fk();
  const auto up = solve_pinned_level(s.gap, s.rho, Direction::Ascending, s.pot, s.ground, s.front_window, s.up);
  const auto dn = solve_pinned_level(s.gap, s.rho, Direction::Descending, s.pot, s.ground, s.front_window, s.down);
  EXPECT_GE(up.d1 - s.up.report.energy, 1e-6);
  EXPECT_GE(dn.d1 - s.down.report.energy, 1e-6);
  EXPECT_EQ(up.best.profile(0), up.d1 == up.minus_pin.energy ? s.rho[0] : 1.0 - s.rho[1]);
}

TEST(Pinned, PinAtFrontValueIsInactive) {
  const auto& s = fk();
  const auto rep = solve_pinned(s.gap, Direction::Ascending, s.up.base(-1), s.pot, s.ground, s.front_window, s.up);
  EXPECT_NEAR(rep.energy, s.up.report.energy, 1e-8);
}

TEST(Pinned, EnergyGrowsAsPinMovesAwayFromFrontValue) {
  // front values near v0 are ... 0.028, 0.162, ...; pins below 0.162 move toward the gap between them
  const auto& s = fk();
  double prev = s.up.report.energy;
  for (double rho : {0.15, 0.125, 0.1}) {
    const auto rep = solve_pinned(s.gap, Direction::Ascending, rho, s.pot, s.ground, s.front_window, s.up);
    EXPECT_GT(rep.energy, prev) << rho;
    prev = rep.energy;
  }
}
