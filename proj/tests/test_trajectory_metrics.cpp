#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "rankshape/error.hpp"
#include "rankshape/trajectory_metrics.hpp"

namespace rankshape {
namespace {

using testing::random_matrix;

TEST(WindowStarts, AlignedAndFlushed) {
  EXPECT_EQ(window_starts(32, 64, 16), (std::vector<Eigen::Index>{0}));
  EXPECT_EQ(window_starts(64, 64, 16), (std::vector<Eigen::Index>{0}));
  EXPECT_EQ(window_starts(128, 64, 16), (std::vector<Eigen::Index>{0, 16, 32, 48, 64}));
  EXPECT_EQ(window_starts(130, 64, 16), (std::vector<Eigen::Index>{0, 16, 32, 48, 64, 66}));
}

TEST(WindowedMinEffrank, ShortTrajectoryIsOneWindow) {
  std::mt19937_64 rng(1);
  const Trajectory h(random_matrix(rng, 32, 8));
  const WindowRankProfile p = windowed_min_effrank(h, 64, 16);
  ASSERT_EQ(p.per_window_erank.size(), 1u);
  EXPECT_DOUBLE_EQ(p.min_erank, effective_rank(covariance_spectrum(h)));
  EXPECT_EQ(p.r_max, 8);
}

TEST(WindowedMinEffrank, CollapsedPrefixDominates) {
  // Rows 0..63 vary along e1 only; rows 64..191 are isotropic in 16 dims.
  std::mt19937_64 rng(2);
  Eigen::MatrixXd h = random_matrix(rng, 192, 16);
  h.topRows(64).rightCols(15).setZero();
  const WindowRankProfile p = windowed_min_effrank(Trajectory(h), 64, 16);
  EXPECT_NEAR(p.min_erank, 1.0, 1e-9);
  EXPECT_NEAR(p.per_window_erank.front(), 1.0, 1e-9);
  EXPECT_GT(p.per_window_erank.back(), 8.0);
}

TEST(WindowedMinEffrank, ConstantTrajectoryReportsOne) {
  const WindowRankProfile p = windowed_min_effrank(Trajectory(Eigen::MatrixXd::Constant(128, 4, 0.3)), 64, 16);
  ASSERT_EQ(p.per_window_erank.size(), 5u);
  for (const double e : p.per_window_erank) EXPECT_EQ(e, 1.0);
  EXPECT_EQ(norm_rank(p), 0.0);
}

TEST(WindowedMinEffrank, Errors) {
  EXPECT_THROW(windowed_min_effrank(Trajectory(Eigen::MatrixXd::Ones(1, 4))), Error);
  EXPECT_THROW(windowed_min_effrank(Trajectory(Eigen::MatrixXd::Identity(4, 4)), 1, 1), Error);
  EXPECT_THROW(windowed_min_effrank(Trajectory(Eigen::MatrixXd::Identity(4, 4)), 4, 0), Error);
}

TEST(WindowedMinEffrank, RMaxFollowsWidthAndWindow) {
  std::mt19937_64 rng(4);
  EXPECT_EQ(windowed_min_effrank(Trajectory(random_matrix(rng, 100, 80)), 64, 16).r_max, 64);
  EXPECT_EQ(windowed_min_effrank(Trajectory(random_matrix(rng, 100, 10)), 64, 16).r_max, 10);
}

TEST(WindowedMinEffrank, ProfileInvariants) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> rows(2, 200);
  for (int trial = 0; trial < 30; ++trial) {
    const Trajectory h(random_matrix(rng, rows(rng), 6));
    const WindowRankProfile p = windowed_min_effrank(h, 32, 8);
    for (const double e : p.per_window_erank) EXPECT_LE(p.min_erank, e);
    EXPECT_GE(p.min_erank, 1.0 - 1e-12);
    EXPECT_LE(p.min_erank, static_cast<double>(p.r_max) + 1e-9);
  }
}

TEST(WindowedMinEffrank, ExtensionNeverRaisesMinimum) {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd full = random_matrix(rng, 160, 12);
  // A prefix of 96 rows: windows at 0,16,32 are shared with the extension.
  const WindowRankProfile prefix = windowed_min_effrank(Trajectory(full.topRows(96)), 64, 16);
  const WindowRankProfile extended = windowed_min_effrank(Trajectory(full), 64, 16);
  EXPECT_LE(extended.min_erank, prefix.min_erank + 1e-12);
}

TEST(NormRank, HandValues) {
  WindowRankProfile p;
  p.r_max = 5;
  p.min_erank = 1.0;
  EXPECT_EQ(norm_rank(p), 0.0);
  p.min_erank = 5.0;
  EXPECT_EQ(norm_rank(p), 1.0);
  p.min_erank = 3.0;
  EXPECT_DOUBLE_EQ(norm_rank(p), 0.5);
}

TEST(NormRank, MonotoneAndClamped) {
  WindowRankProfile p;
  p.r_max = 9;
  double prev = -1.0;
  for (double e = 0.5; e <= 10.0; e += 0.25) {
    p.min_erank = e;
    const double v = norm_rank(p);
    EXPECT_GE(v, prev);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    prev = v;
  }
}

TEST(NormRank, DegenerateCeiling) {
  WindowRankProfile p;
  p.r_max = 1;
  try {
    norm_rank(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNormalizationDegenerate);
  }
}

}  // namespace
}  // namespace rankshape
