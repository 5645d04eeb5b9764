#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fkmt/diagnostics.hpp"

using namespace fkmt;

namespace {

struct Solved {
  StencilPotential pot = make_fk_example(2, 1.0);
  GroundLevel ground = ground_level(pot);
  GapPair gap = find_periodic_and_gap(pot, ground);
  HeteroclinicFamily up = find_heteroclinic(gap, Direction::Ascending, {-60, 60}, pot, ground);
  HeteroclinicFamily down = find_heteroclinic(gap, Direction::Descending, {-60, 60}, pot, ground);
  TransitionPattern pattern = make_pattern(TransitionKind::HomoclinicV0, {0, 20, 60, 80}, 5, choose_rho(up, down, gap));
  MultitransitionResult bump = solve_multitransition(pattern, gap, pot, ground, {-40, 120}, up, down);
};

const Solved& solved() {
  static const Solved s;
  return s;
}

}  // namespace

TEST(Birkhoff, ConstantIsAllEqual) {
  const auto b = birkhoff_check(ChainConfig::constant(0.0, {-5, 5}), 8);
  EXPECT_TRUE(b.birkhoff);
  for (const auto& [k, o] : b.verdicts) EXPECT_EQ(o, Ordering::Equal);
  EXPECT_THROW(birkhoff_check(ChainConfig::constant(0.0, {-5, 5}), 0), InvalidArgument);
}

TEST(Birkhoff, MonotoneFrontOrdersBySign) {
  const auto& s = solved();
  const auto b = birkhoff_check(s.up.base, default_k_range(s.up.base));
  EXPECT_TRUE(b.birkhoff);
  EXPECT_FALSE(b.first_crossing);
  for (const auto& [k, o] : b.verdicts) EXPECT_EQ(o, k > 0 ? Ordering::Greater : Ordering::Less) << k;
}

TEST(Birkhoff, BumpCrossesItsTranslates) {
  const auto& s = solved();
  const auto b = birkhoff_check(s.bump.report.profile, 40);
  EXPECT_FALSE(b.birkhoff);
  ASSERT_TRUE(b.first_crossing);
  EXPECT_EQ(compare(shift(s.bump.report.profile, *b.first_crossing), s.bump.report.profile), Ordering::Crossing);
}

TEST(Asymptotics, Targets) {
  const auto& s = solved();
  auto a = asymptotics_check(s.up.base, s.gap);
  EXPECT_EQ(a.left, Target::V0);
  EXPECT_EQ(a.right, Target::W0);
  EXPECT_LE(a.left_decay, 1e-6);
  a = asymptotics_check(s.bump.report.profile, s.gap);
  EXPECT_EQ(a.left, Target::V0);
  EXPECT_EQ(a.right, Target::V0);
  const auto w = make_pattern(TransitionKind::HomoclinicW0, {0, 20, 60, 80}, 5, s.pattern.rho);
  const auto r = solve_multitransition(w, s.gap, s.pot, s.ground, {-40, 120}, s.up, s.down);
  a = asymptotics_check(r.report.profile, s.gap);
  EXPECT_EQ(a.left, Target::W0);
  EXPECT_EQ(a.right, Target::W0);
  EXPECT_THROW(asymptotics_check(ChainConfig::constant(0.5, {0, 3}), s.gap), TailNotInGap);
}

TEST(Submodularity, EqualAndOrderedPairsGiveZero) {
  const auto& s = solved();
  EXPECT_EQ(submodularity_margin(s.up.base, s.up.base, s.pot, 0.0), 0.0);
  EXPECT_EQ(submodularity_margin(s.up.base, ChainConfig::constant(1.0, {-60, 60}), s.pot, 0.0), 0.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> d(0.0, 0.5);
  std::vector<double> a(30), b(30);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = d(rng);
    b[i] = a[i] + d(rng);
  }
  EXPECT_EQ(submodularity_margin(ChainConfig(0, a, 0.0, 0.0), ChainConfig(0, b, 0.0, 1.0), s.pot, 0.0), 0.0);
}

TEST(Submodularity, RandomCrossingPairs) {
  const auto& s = solved();
  const auto a = submodularity_audit(s.pot, s.gap, 0.0, 200, 5);
  EXPECT_EQ(a.trials, 200);
  EXPECT_LE(a.worst_margin, 1e-12);
  EXPECT_TRUE(a.pass());
  EXPECT_EQ(a, submodularity_audit(s.pot, s.gap, 0.0, 200, 5));
  EXPECT_NE(a, submodularity_audit(s.pot, s.gap, 0.0, 200, 6));
}

TEST(Levels, StandardRunPasses) {
  const auto& s = solved();
  const double c1 = s.up.report.energy, c1p = s.down.report.energy;
  const auto pu = solve_pinned_level(s.gap, s.pattern.rho, Direction::Ascending, s.pot, s.ground, {-60, 60}, s.up);
  const auto pd = solve_pinned_level(s.gap, s.pattern.rho, Direction::Descending, s.pot, s.ground, {-60, 60}, s.down);
  LevelInputs in{c1, c1p, pu.d1, pd.d1, {{"bump", s.bump.report.energy, std::max(c1, c1p), c1 + c1p}}};
  const auto lv = level_summary(in);
  EXPECT_TRUE(lv.all_pass());
  EXPECT_GE(lv.checks[0].margin, 1e-4);
  const double gap = s.bump.report.energy - (c1 + c1p);
  EXPECT_GE(gap, -1e-9);
  EXPECT_LE(gap, 1e-3);
}

TEST(Levels, MissingInputsAndFailures) {
  EXPECT_THROW(level_summary({std::nullopt, 0.1, 0.2, 0.2, {}}), MissingLevel);
  EXPECT_THROW(level_summary({0.1, 0.1, 0.2, std::nullopt, {}}), MissingLevel);
  const auto lv = level_summary({0.1, 0.1, 0.1, 0.2, {{"p", 0.5, 0.1, 0.2}}});
  EXPECT_FALSE(lv.all_pass());
  EXPECT_FALSE(lv.checks[1].pass);  // d1_up == c1
  EXPECT_FALSE(lv.checks[4].pass);  // above the concatenation level
}

TEST(Report, BumpDiagnostics) {
  const auto& s = solved();
  DiagnosticsContext ctx;
  ctx.pot = &s.pot;
  ctx.gap = s.gap;
  ctx.ground = s.ground;
  ctx.submodularity = submodularity_audit(s.pot, s.gap, 0.0, 50, 1);
  ctx.others = {{"front_up", s.up.base}, {"bump", s.bump.report.profile}};
  const auto d = compute_diagnostics("bump", s.bump.report.profile, s.bump.box.regions, ctx);
  EXPECT_FALSE(d.birkhoff);
  ASSERT_EQ(d.ordering_vs.size(), 1u);
  EXPECT_EQ(d.ordering_vs[0].first, "front_up");
  EXPECT_LE(d.residual_sup, 1e-10);
  EXPECT_TRUE(d.strict_constraints);
  EXPECT_GT(*d.min_slack, 1e-6);
  EXPECT_LE(d.tail_decay, 1e-12);
  EXPECT_EQ(d, compute_diagnostics("bump", s.bump.report.profile, s.bump.box.regions, ctx));
}
