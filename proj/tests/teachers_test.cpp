#include <cmath>

#include <gtest/gtest.h>

#include "teachsim/teachers.hpp"

namespace teachsim {
namespace {

Segment constant_segment(double pos, int k = 10) {
  std::vector<Transition> steps(static_cast<std::size_t>(k), Transition{{pos}, kStay, {pos}});
  return Segment(std::move(steps));
}

// Independent brute force for min_t max_i beta_i(t, t) on the 1-D diagonal
// grid: evaluates the Gaussian directly on a much finer probe grid.
double brute_min_coverage_1d(int m, double a, double w) {
  double worst = 1e300;
  for (int j = 0; j <= 40000; ++j) {
    const double t = j / 40000.0;
    double best = 0.0;
    for (int i = 0; i < m; ++i) {
      const double c = (i + 0.5) / m;
      best = std::max(best, a * std::exp(-2.0 * w * w * (t - c) * (t - c)));
    }
    worst = std::min(worst, best);
  }
  return worst;
}

TEST(BetaValue, PeakAtCentroid) {
  const BetaKernel k({0.3, 0.7}, {2.0, 5.0}, 1.7);
  EXPECT_DOUBLE_EQ(k(Vec{0.3}, Vec{0.7}), 1.7);
}

TEST(BetaValue, ZeroWidthIsConstant) {
  const Teacher t{0, BetaKernel({0.1, 0.1}, {0.0, 0.0}, 0.8)};
  for (double x : {0.0, 0.4, 1.0}) EXPECT_EQ(beta_value(t, Vec{x}, Vec{1.0 - x}), 0.8);
}

TEST(BetaValue, DirectEvaluation) {
  // a = 1, c = (0, 0), b = (1, 1), g1 = g2 = 1: exp(-2).
  const Teacher t{0, BetaKernel({0.0, 0.0}, {1.0, 1.0}, 1.0)};
  EXPECT_NEAR(beta_value(t, Vec{1.0}, Vec{1.0}), 0.1353352832366127, 1e-15);
}

TEST(BetaValue, DimensionMismatchThrows) {
  const Teacher t{0, BetaKernel({0.0, 0.0}, {1.0, 1.0}, 1.0)};
  EXPECT_THROW(beta_value(t, Vec{1.0, 0.0}, Vec{1.0}), ContractViolation);
  EXPECT_THROW(BetaKernel({0.0, 0.0}, {-1.0, 1.0}, 1.0), ContractViolation);
  EXPECT_THROW(BetaKernel({0.0, 0.0}, {1.0, 1.0}, 0.0), ContractViolation);
}

TEST(BetaValue, SwapSymmetricForGridTeachers) {
  const TeacherSet set = make_teacher_grid(4, 2, 1.0, 3.0);
  RngStream rng(5, 0);
  for (int i = 0; i < 200; ++i) {
    const Vec g1 = {rng.uniform(), rng.uniform()};
    const Vec g2 = {rng.uniform(), rng.uniform()};
    for (const Teacher& t : set) {
      const double b = beta_value(t, g1, g2);
      EXPECT_NEAR(b, beta_value(t, g2, g1), 1e-12 * b);
    }
  }
}

TEST(PrefProb, SymmetricAndZeroBeta) {
  EXPECT_EQ(pref_prob(3.0, 1.25, 1.25), 0.5);
  EXPECT_EQ(pref_prob(0.0, 100.0, -4.0), 0.5);
}

TEST(PrefProb, DirectFormula) {
  // 1 / (1 + e^-1)
  EXPECT_NEAR(pref_prob(1.0, 1.0, 0.0), 0.7310585786300049, 1e-15);
}

TEST(PrefProb, OverflowSafe) {
  EXPECT_EQ(pref_prob(1000.0, 10.0, 0.0), 1.0);
  EXPECT_EQ(pref_prob(1000.0, 0.0, 10.0), 0.0);
  EXPECT_NEAR(pref_prob(1e6, 1.0, 1.0 + 1e-6), 1.0 / (1.0 + std::exp(1.0)), 1e-9);
}

TEST(PrefProb, ComplementsAndMonotone) {
  RngStream rng(77, 0);
  for (int i = 0; i < 5000; ++i) {
    const double beta = 60.0 * rng.uniform();
    const double r1 = 20.0 * rng.normal();
    const double r2 = 20.0 * rng.normal();
    EXPECT_NEAR(pref_prob(beta, r1, r2) + pref_prob(beta, r2, r1), 1.0, 1e-12);
    if (beta > 0.0) {
      const double bump = std::abs(rng.normal()) * 0.1 + 1e-3;
      EXPECT_LE(pref_prob(beta, r1, r2), pref_prob(beta, r1 + bump, r2));
    }
  }
}

TEST(QueryPrefProb, IdenticalSegmentsAreCoinFlips) {
  const EnvSpec spec = make_env("lineworld");
  const TeacherSet set = make_teacher_grid(4, 1, 1.0, 5.0);
  const Query q(constant_segment(0.3), constant_segment(0.3));
  EXPECT_EQ(query_pref_prob(set[1], q, ground_truth(spec), spec), 0.5);
}

TEST(QueryPrefProb, ExpertAtCentroidIsNearlyCertain) {
  const EnvSpec spec = make_env("lineworld");
  // Both segments map to 0.5: centroid of the single teacher; a = 10.
  const Teacher t{0, BetaKernel({0.5, 0.5}, {4.0, 4.0}, 10.0)};
  std::vector<Transition> up, down;
  for (int i = 0; i < 10; ++i) {
    up.push_back({{0.75}, kStay, {0.75}});
    down.push_back({{0.25}, kStay, {0.25}});
  }
  const Query q{Segment(up), Segment(down)};
  const RewardFn truth = ground_truth(spec);
  const double beta = beta_value(t, map_segment(spec, q.first), map_segment(spec, q.second));
  const double dr = segment_return(q.first, truth) - segment_return(q.second, truth);
  ASSERT_GE(beta * dr, 6.0);
  EXPECT_GT(query_pref_prob(t, q, truth, spec), 0.99);
}

TEST(QueryPrefProb, IsCompositionOfParts) {
  const EnvSpec spec = make_env("lineworld");
  const TeacherSet set = make_teacher_grid(4, 1, 1.0, 3.0);
  const RewardFn truth = ground_truth(spec);
  RngStream rng(4, Stream::kRollout);
  RngStream prng(4, Stream::kLearner);
  const Policy random = [&](std::span<const double>) { return prng.uniform_int(3); };
  const auto segs = rollout_segments(spec, random, rng, 4);
  for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
    const Query q(segs[i], segs[i + 1]);
    for (const Teacher& t : set) {
      const double expected =
          pref_prob(beta_value(t, map_segment(spec, q.first), map_segment(spec, q.second)),
                    segment_return(q.first, truth), segment_return(q.second, truth));
      EXPECT_EQ(query_pref_prob(t, q, truth, spec), expected);
    }
  }
}

TEST(SampleLabel, DegenerateProbabilityAlwaysFirst) {
  RngStream rng(1, Stream::kTeachers);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_label(1.0, rng), LabelDistribution::prefer_first());
}

TEST(SampleLabel, FairCoinFrequency) {
  const EnvSpec spec = make_env("lineworld");
  const TeacherSet set = make_teacher_grid(1, 1, 1.0, 0.0);
  const Query q(constant_segment(0.4), constant_segment(0.4));
  RngStream rng(8, Stream::kTeachers);
  const RewardFn truth = ground_truth(spec);
  int first = 0;
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) first += sample_label(set[0], q, truth, spec, rng).mu1 == 1.0;
  // 3 sigma of Bernoulli(0.5) at 1e5 draws is 0.0047; the bound is 0.01.
  EXPECT_NEAR(static_cast<double>(first) / kDraws, 0.5, 0.01);
}

TEST(SampleLabel, ReplaysWithSameStream) {
  auto draw = [] {
    RngStream rng(99, Stream::kTeachers);
    std::vector<double> out;
    for (int i = 0; i < 200; ++i) out.push_back(sample_label(0.3, rng).mu1);
    return out;
  };
  EXPECT_EQ(draw(), draw());
}

TEST(TeacherGrid, DiagonalCenters) {
  const TeacherSet set = make_teacher_grid(4, 1, 1.0, 2.0);
  const double expected[] = {0.125, 0.375, 0.625, 0.875};
  ASSERT_EQ(set.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(set[i].id, static_cast<int>(i));
    EXPECT_EQ(set[i].kernel.center(), (Vec{expected[i], expected[i]}));
    EXPECT_EQ(set[i].kernel.width(), (Vec{2.0, 2.0}));
    EXPECT_EQ(set[i].kernel.scale(), 1.0);
  }
  EXPECT_EQ(make_teacher_grid(1, 1, 1.0, 2.0)[0].kernel.center(), (Vec{0.5, 0.5}));
}

TEST(TeacherGrid, TwoDimensionalGrid) {
  const TeacherSet set = make_teacher_grid(4, 2, 1.0, 1.0);
  EXPECT_EQ(set[0].kernel.center(), (Vec{0.25, 0.25, 0.25, 0.25}));
  EXPECT_EQ(set[3].kernel.center(), (Vec{0.75, 0.75, 0.75, 0.75}));
  EXPECT_THROW(make_teacher_grid(0, 1, 1.0, 1.0), ContractViolation);
}

TEST(TeacherGrid, NearestCenterHasHighestDiagonalBeta) {
  const TeacherSet set = make_teacher_grid(4, 1, 1.0, 5.0);
  for (int j = 0; j <= 1000; ++j) {
    const double t = j / 1000.0;
    std::size_t nearest = 0;
    for (std::size_t i = 1; i < set.size(); ++i) {
      if (std::abs(set[i].kernel.center()[0] - t) < std::abs(set[nearest].kernel.center()[0] - t)) nearest = i;
    }
    double best = -1.0;
    std::size_t argmax = 0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      const double b = beta_value(set[i], Vec{t}, Vec{t});
      if (b > best) best = b, argmax = i;
    }
    EXPECT_EQ(argmax, nearest) << "t = " << t;
  }
}

TEST(MinCoverage, ConstantKernelGivesScale) {
  const EnvSpec spec = make_env("lineworld");
  EXPECT_EQ(min_coverage_beta(make_teacher_grid(1, 1, 0.7, 0.0), spec, 11), 0.7);
}

TEST(MinCoverage, MidpointClosedFormMatchesBruteForce) {
  const EnvSpec spec = make_env("lineworld");
  for (double w : {0.5, 1.0, 3.0, 6.0}) {
    const double closed = std::exp(-2.0 * (w * 0.125) * (w * 0.125));
    EXPECT_NEAR(brute_min_coverage_1d(4, 1.0, w), closed, 1e-12);
    EXPECT_NEAR(min_coverage_beta(make_teacher_grid(4, 1, 1.0, w), spec, kDefaultProbePoints), closed, 1e-12);
  }
}

TEST(MinCoverage, StrictlyDecreasingInWidth) {
  const EnvSpec spec = make_env("lineworld");
  double previous = 2.0;
  for (double w = 0.25; w < 10.0; w += 0.25) {
    const double v = min_coverage_beta(make_teacher_grid(4, 1, 1.0, w), spec, 101);
    EXPECT_LT(v, previous);
    previous = v;
  }
  EXPECT_THROW(min_coverage_beta(make_teacher_grid(4, 1, 1.0, 1.0), spec, 1), ContractViolation);
}

TEST(Calibrate, FloorAtScaleGivesZeroWidth) {
  const EnvSpec spec = make_env("lineworld");
  EXPECT_EQ(calibrate_widths(make_teacher_grid(4, 1, 1.0, 0.0), spec, 1.0).width, 0.0);
}

TEST(Calibrate, InvertsMidpointExpression) {
  const EnvSpec spec = make_env("lineworld");
  const Calibration c =
      calibrate_widths(make_teacher_grid(4, 1, 1.0, 0.0), spec, std::exp(-2.0 * 0.125 * 0.125));
  EXPECT_NEAR(c.width, 1.0, 1e-6);
  EXPECT_EQ(c.widths, (Vec{c.width, c.width}));
  EXPECT_GE(c.min_coverage, c.beta_floor);
}

TEST(Calibrate, FloorAboveScaleIsInfeasible) {
  const EnvSpec spec = make_env("lineworld");
  EXPECT_THROW(calibrate_widths(make_teacher_grid(4, 1, 1.0, 0.0), spec, 1.5), InfeasibleCalibration);
}

TEST(Calibrate, GridNavCoverageMeetsFloor) {
  const EnvSpec spec = make_env("gridnav");
  const Calibration c = calibrate_widths(make_teacher_grid(4, 2, 4.0, 0.0), spec, 1.0, 41);
  EXPECT_GT(c.width, 0.0);
  EXPECT_GE(min_coverage_beta(make_teacher_grid(4, 2, 4.0, c.width), spec, 41), 1.0);
  EXPECT_LT(min_coverage_beta(make_teacher_grid(4, 2, 4.0, c.width * 1.01), spec, 41), 1.0);
}

TEST(InterDomain, DetectsQueriesOutsideEveryDomain) {
  const TeacherSet set = make_teacher_grid(4, 1, 1.0, 6.0);
  EXPECT_FALSE(is_inter_domain(set, Vec{0.125}, Vec{0.125}, 0.5));
  EXPECT_TRUE(is_inter_domain(set, Vec{0.0}, Vec{1.0}, 0.5));
}

}  // namespace
}  // namespace teachsim
