#include <gtest/gtest.h>

#include <random>

#include "ergmpool/errors.hpp"
#include "ergmpool/hull.hpp"

using namespace ergmpool;

namespace {

Eigen::MatrixXd random_rows(std::size_t k, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  Eigen::MatrixXd rows(k, p);
  for (Eigen::Index r = 0; r < rows.rows(); ++r)
    for (Eigen::Index c = 0; c < rows.cols(); ++c) rows(r, c) = z(rng);
  return rows;
}

Eigen::MatrixXd unit_square() {
  Eigen::MatrixXd rows(4, 2);
  rows << 0, 0, 1, 0, 0, 1, 1, 1;
  return rows;
}

}  // namespace

TEST(Simplex, SolvesSmallLinearProgram) {
  // max 3x + 2y s.t. x + y + s1 = 4, x + 3y + s2 = 6  -> x = 4, y = 0
  Eigen::MatrixXd a(2, 4);
  a << 1, 1, 1, 0, 1, 3, 0, 1;
  Eigen::VectorXd b(2);
  b << 4, 6;
  Eigen::VectorXd c(4);
  c << 3, 2, 0, 0;
  Eigen::VectorXd x;
  double v = 0;
  ASSERT_TRUE(simplex_maximize(a, b, c, x, v));
  EXPECT_NEAR(v, 12.0, 1e-12);
  EXPECT_NEAR(x[0], 4.0, 1e-12);
}

TEST(Simplex, DetectsInfeasibility) {
  // x + y = 1 and x + y = 2
  Eigen::MatrixXd a(2, 2);
  a << 1, 1, 1, 1;
  Eigen::VectorXd b(2);
  b << 1, 2;
  Eigen::VectorXd x;
  double v = 0;
  EXPECT_FALSE(simplex_maximize(a, b, Eigen::VectorXd::Zero(2), x, v));
}

TEST(Simplex, HandlesRedundantRows) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 1, 2, 2;
  Eigen::VectorXd b(2);
  b << 1, 2;
  Eigen::VectorXd c(2);
  c << 1, 0;
  Eigen::VectorXd x;
  double v = 0;
  ASSERT_TRUE(simplex_maximize(a, b, c, x, v));
  EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(HullCheck, MeanOfRowsIsInterior) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto rows = random_rows(200, 3, seed);
    const Eigen::VectorXd mean = rows.colwise().mean();
    const auto res = hull_check(rows, mean);
    EXPECT_EQ(res.status, HullStatus::Interior);
    EXPECT_GT(res.margin, 0.0);
    EXPECT_FALSE(res.degenerate);
  }
}

TEST(HullCheck, CentroidOfDistinctRowsHasUnitMargin) {
  const auto res = hull_check(unit_square(), Eigen::Vector2d(0.5, 0.5));
  EXPECT_NEAR(res.margin, 1.0, 1e-12);
}

TEST(HullCheck, BeyondComponentwiseMaxIsExterior) {
  const auto rows = random_rows(100, 4, 9);
  const Eigen::VectorXd target = rows.colwise().maxCoeff().transpose().array() + 1.0;
  const auto res = hull_check(rows, target);
  EXPECT_EQ(res.status, HullStatus::Exterior);
  EXPECT_EQ(res.offending().size(), 4u);
}

TEST(HullCheck, OutsideHullInsideBoxIsExterior) {
  // Triangle (0,0), (1,0), (0,1); (0.8, 0.8) lies in the bounding box only.
  Eigen::MatrixXd rows(3, 2);
  rows << 0, 0, 1, 0, 0, 1;
  const auto res = hull_check(rows, Eigen::Vector2d(0.8, 0.8));
  EXPECT_EQ(res.status, HullStatus::Exterior);
  EXPECT_TRUE(res.offending().empty());
}

TEST(HullCheck, VertexAndEdgeOfCraftedHullAreBoundary) {
  const auto rows = unit_square();
  EXPECT_EQ(hull_check(rows, Eigen::Vector2d(1, 1)).status, HullStatus::Boundary);
  EXPECT_EQ(hull_check(rows, Eigen::Vector2d(0, 0)).status, HullStatus::Boundary);
  EXPECT_EQ(hull_check(rows, Eigen::Vector2d(0.5, 0)).status, HullStatus::Boundary);
  EXPECT_EQ(hull_check(rows, Eigen::Vector2d(0.5, 1e-3)).status, HullStatus::Interior);
}

TEST(HullCheck, DuplicateRowsDoNotChangeTheAnswer) {
  Eigen::MatrixXd rows(8, 2);
  rows << unit_square(), unit_square();
  const auto res = hull_check(rows, Eigen::Vector2d(0.5, 0.5));
  EXPECT_EQ(res.distinct_rows, 4u);
  EXPECT_NEAR(res.margin, 1.0, 1e-12);
}

TEST(HullCheck, CollinearRowsAreDegenerate) {
  Eigen::MatrixXd rows(5, 2);
  for (int r = 0; r < 5; ++r) rows.row(r) << r, 2.0 * r;
  const auto res = hull_check(rows, Eigen::Vector2d(2, 4));
  EXPECT_TRUE(res.degenerate);
  EXPECT_EQ(res.rank, 1u);
  EXPECT_EQ(res.status, HullStatus::Boundary);
}

TEST(HullCheck, RejectsBadInput) {
  EXPECT_THROW(hull_check(Eigen::MatrixXd(0, 2), Eigen::Vector2d(0, 0)), UsageError);
  EXPECT_THROW(hull_check(unit_square(), Eigen::Vector3d(0, 0, 0)), DimensionError);
}
