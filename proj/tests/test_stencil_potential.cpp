#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "fkmt/stencil_potential.hpp"

using namespace fkmt;

namespace {

std::size_t offset_index(const StencilIndex& s, std::vector<int> k) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.offsets[i] == k) return i;
  ADD_FAILURE() << "offset not in stencil";
  return 0;
}

}  // namespace

TEST(StencilIndex, BallMatchesClosedFormCount) {
  for (int n = 1; n <= 4; ++n)
    for (int r = 1; r <= 3; ++r) {
      const auto b = StencilIndex::ball(n, r);
      EXPECT_EQ(b.size(), StencilIndex::ball_count(n, r)) << n << " " << r;
      for (const auto& k : b.offsets) EXPECT_LE(StencilIndex::norm1(k), r);
    }
  EXPECT_EQ(StencilIndex::ball(2, 1).size(), 5u);
  EXPECT_EQ(StencilIndex::ball(3, 1).size(), 7u);
  EXPECT_EQ(StencilIndex::ball(2, 2).size(), 13u);
}

TEST(StencilIndex, CenterAndLongitudinal) {
  const auto b = StencilIndex::ball(2, 1);
  EXPECT_EQ(StencilIndex::norm1(b.offsets[b.center()]), 0);
  const auto lon = b.longitudinal();
  EXPECT_EQ(std::count(lon.begin(), lon.end(), 0), 3);
  EXPECT_EQ(std::count(lon.begin(), lon.end(), 1), 1);
  EXPECT_THROW(StencilIndex::ball(0, 1), InvalidArgument);
}

TEST(FkExample, ConstantZeroIsZero) {
  for (int n = 2; n <= 4; ++n) {
    const auto p = make_fk_example(n, 1.0);
    std::vector<double> a(p.stencil.size(), 0.0);
    EXPECT_EQ(p.eval(a), 0.0);
  }
}

TEST(FkExample, ConstantHalf) {
  const auto p = make_fk_example(2, 1.0);
  std::vector<double> a(p.stencil.size(), 0.5);
  const double expect = 2.0 / (4.0 * std::numbers::pi * std::numbers::pi);
  EXPECT_NEAR(p.eval(a), expect, 1e-15);
  EXPECT_NEAR(p.eval(a), 0.050660592, 1e-9);
}

TEST(FkExample, TwoLongitudinalUnitDifferences) {
  const auto p = make_fk_example(2, 1.0);
  std::vector<double> a(p.stencil.size(), 0.0);
  a[offset_index(p.stencil, {1, 0})] = 1.0;
  a[offset_index(p.stencil, {-1, 0})] = 1.0;
  EXPECT_NEAR(p.eval(a), 0.125, 1e-15);
}

TEST(FkExample, RejectsBadParameters) {
  EXPECT_THROW(make_fk_example(1, 1.0), InvalidArgument);
  EXPECT_THROW(make_fk_example(2, 0.0), InvalidArgument);
  EXPECT_THROW(make_fk_example(2, -1.0), InvalidArgument);
}

TEST(FkExample, AnalyticMixedPartial) {
  // d_{0,j} s = -1/(4n) for the nearest neighbours
  const auto p = make_fk_example(3, 0.7);
  const std::size_t c = p.stencil.center();
  const std::size_t j = offset_index(p.stencil, {0, 1, 0});
  std::vector<double> a(p.stencil.size(), 0.3), g1(a.size()), g2(a.size());
  const double h = 1e-4;
  a[j] += h;
  p.grad(a, g1);
  a[j] -= 2 * h;
  p.grad(a, g2);
  EXPECT_NEAR((g1[c] - g2[c]) / (2 * h), -1.0 / 12.0, 1e-9);
}

TEST(Hypotheses, FkExamplePasses) {
  for (auto [n, lambda] : {std::pair{2, 1.0}, std::pair{3, 0.5}}) {
    const auto rep = check_hypotheses(make_fk_example(n, lambda), 1000, 42);
    EXPECT_TRUE(rep.all_pass());
    EXPECT_LE(rep.get("S1").worst, 1e-12);
    EXPECT_EQ(rep.get("S3").worst, 0.0);
    EXPECT_TRUE(rep.get("S3_strict").pass);
    EXPECT_LE(rep.get("gradient").worst, 1e-6);
  }
}

TEST(Hypotheses, PositiveCrossTermFailsTwist) {
  StencilPotential p;
  p.kind = "cross";
  p.stencil = StencilIndex::ball(2, 1);
  const std::size_t c = p.stencil.center();
  p.eval = [c](std::span<const double> a) {
    double e = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
      if (k != c) e += a[k] * a[c];
    return e;
  };
  p.grad = [c](std::span<const double> a, std::span<double> g) {
    double gc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
      if (k != c) {
        g[k] = a[c];
        gc += a[k];
      }
    g[c] = gc;
  };
  const auto rep = check_hypotheses(p, 50, 1);
  EXPECT_FALSE(rep.get("S3").pass);
  EXPECT_FALSE(rep.get("S3_strict").pass);
  EXPECT_FALSE(rep.all_pass());
  EXPECT_THROW((void)rep.get("nope"), InvalidArgument);
}

TEST(Hypotheses, WrongGradientIsCaught) {
  auto p = make_fk_example(2, 1.0);
  auto g = p.grad;
  p.grad = [g](std::span<const double> a, std::span<double> out) {
    g(a, out);
    out[0] += 1e-3;
  };
  EXPECT_FALSE(check_hypotheses(p, 20, 3).get("gradient").pass);
}

TEST(Hypotheses, Deterministic) {
  const auto p = make_fk_example(2, 1.0);
  const auto a = check_hypotheses(p, 100, 9), b = check_hypotheses(p, 100, 9);
  for (std::size_t i = 0; i < a.checks.size(); ++i) EXPECT_EQ(a.checks[i].worst, b.checks[i].worst);
}

TEST(Variants, TwoWellVanishesOnHalfIntegers) {
  const auto p = make_fk_two_well(2, 1.0);
  for (double x : {0.0, 0.5, 1.0, -0.5}) {
    std::vector<double> a(p.stencil.size(), x);
    EXPECT_NEAR(p.eval(a), 0.0, 1e-30);
  }
  EXPECT_TRUE(check_hypotheses(p, 200, 5).all_pass());
}

TEST(Variants, TableInterpolatesSamples) {
  const std::vector<double> table{0.0, 0.3, 0.8, 0.5, 0.1};
  const auto p = make_fk_table(2, table);
  const auto q = make_fk_table(2, {0.0, 0.25, 0.0, 0.25});
  for (std::size_t j = 0; j < table.size(); ++j) {
    std::vector<double> a(p.stencil.size(), static_cast<double>(j) / table.size());
    EXPECT_NEAR(p.eval(a), table[j], 1e-13);
  }
  std::vector<double> a(q.stencil.size(), 0.25);
  EXPECT_NEAR(q.eval(a), 0.25, 1e-14);
  EXPECT_TRUE(check_hypotheses(p, 200, 5).get("gradient").pass);
  EXPECT_THROW(make_fk_table(2, {}), InvalidArgument);
}

TEST(Variants, ShiftedAddsConstant) {
  const auto p = make_fk_example(2, 1.0);
  const auto q = shifted(p, 5.0);
  std::vector<double> a{0.1, 0.4, 0.2, 0.9, 0.3};
  EXPECT_NEAR(q.eval(a), p.eval(a) + 5.0, 1e-14);
}
