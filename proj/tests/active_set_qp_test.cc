// Copyright 2026 The ephybrid Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ephybrid/active_set_qp.h"

#include <random>

#include <gtest/gtest.h>

#include "oracles.h"
#include "test_util.h"

namespace ephybrid {
namespace {

using testing::BoxPatternQp;
using testing::KktEnumerationQp;
using testing::RandomMat;
using testing::RandomSpd;
using testing::RandomVec;
using testing::ThrownCode;

constexpr double kKktTol = 1e-9;

// Random feasible instance: rows through a random interior point.
LinearConstraints RandomFeasible(int dim, int rows, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> slack(0.0, 1.0);
  const Point center = RandomVec(dim, rng);
  LinearConstraints cons{RandomMat(rows, dim, rng), Point(rows)};
  for (int i = 0; i < rows; ++i) cons.b(i) = cons.a.row(i).dot(center) + slack(rng);
  return cons;
}

void ExpectKkt(const DenseMatrix& m, const Point& c, const LinearConstraints& cons,
               const QpSolution& sol) {
  const KktResiduals r = ComputeKktResiduals(m, c, cons, sol);
  const double scale = 1.0 + c.norm() + sol.multipliers.lpNorm<Eigen::Infinity>();
  EXPECT_LE(r.stationarity, kKktTol * scale);
  EXPECT_GE(r.min_multiplier, -kKktTol);
  EXPECT_LE(r.complementarity, kKktTol * scale);
  EXPECT_LE(r.primal_violation, kKktTol * (1.0 + cons.b.lpNorm<Eigen::Infinity>()));
}

TEST(ActiveSetQpTest, UnconstrainedMinimizer) {
  ActiveSetQpSolver solver;
  const DenseMatrix m = DenseMatrix::Identity(2, 2) * 2.0;
  const Point c{{-2.0, 4.0}};
  const QpSolution sol = solver.Solve(m, c, {DenseMatrix(0, 2), Point(0)});
  EXPECT_NEAR(sol.y(0), 1.0, 1e-15);
  EXPECT_NEAR(sol.y(1), -2.0, 1e-15);
  EXPECT_TRUE(sol.active.empty());
}

TEST(ActiveSetQpTest, ProjectionOntoSimplexFace) {
  // Project 0 onto {sum y >= 1}: (1/3, 1/3, 1/3) with multiplier 1/3.
  ActiveSetQpSolver solver;
  LinearConstraints cons{-DenseMatrix::Ones(1, 3), Point::Constant(1, -1.0)};
  const QpSolution sol = solver.Solve(DenseMatrix::Identity(3, 3), Point::Zero(3), cons);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(sol.y(i), 1.0 / 3.0, 1e-14);
  EXPECT_NEAR(sol.multipliers(0), 1.0 / 3.0, 1e-14);
  ASSERT_EQ(sol.active.size(), 1u);
}

TEST(ActiveSetQpTest, InactiveConstraintHasZeroMultiplier) {
  ActiveSetQpSolver solver;
  LinearConstraints cons{DenseMatrix::Identity(2, 2), Point{{5.0, 5.0}}};
  const QpSolution sol =
      solver.Solve(DenseMatrix::Identity(2, 2), Point{{-1.0, -1.0}}, cons);
  EXPECT_NEAR(sol.y(0), 1.0, 1e-15);
  EXPECT_EQ(sol.multipliers(0), 0.0);
  EXPECT_EQ(sol.multipliers(1), 0.0);
}

TEST(ActiveSetQpTest, DetectsInfeasibleRows) {
  ActiveSetQpSolver solver;
  DenseMatrix a(2, 1);
  a << 1.0, -1.0;
  LinearConstraints cons{a, Point{{-1.0, -1.0}}};  // y <= -1 and y >= 1
  EXPECT_EQ(ThrownCode([&] { solver.Solve(DenseMatrix::Identity(1, 1), Point::Zero(1), cons); }),
            ErrorCode::kInfeasibleSet);
}

TEST(ActiveSetQpTest, DetectsInfeasibleTriangle) {
  ActiveSetQpSolver solver;
  DenseMatrix a(3, 2);
  a << 1.0, 0.0, 0.0, 1.0, -1.0, -1.0;
  LinearConstraints cons{a, Point{{0.0, 0.0, -1.0}}};  // x <= 0, y <= 0, x + y >= 1
  EXPECT_EQ(ThrownCode([&] { solver.Solve(DenseMatrix::Identity(2, 2), Point::Zero(2), cons); }),
            ErrorCode::kInfeasibleSet);
}

TEST(ActiveSetQpTest, ZeroRowWithNegativeOffsetIsInfeasible) {
  ActiveSetQpSolver solver;
  LinearConstraints cons{DenseMatrix::Zero(1, 2), Point::Constant(1, -1.0)};
  EXPECT_EQ(ThrownCode([&] { solver.Solve(DenseMatrix::Identity(2, 2), Point::Zero(2), cons); }),
            ErrorCode::kInfeasibleSet);
}

TEST(ActiveSetQpTest, RejectsBadInput) {
  ActiveSetQpSolver solver;
  DenseMatrix indefinite(2, 2);
  indefinite << 1.0, 0.0, 0.0, -1.0;
  const LinearConstraints none{DenseMatrix(0, 2), Point(0)};
  EXPECT_EQ(ThrownCode([&] { solver.Solve(indefinite, Point::Zero(2), none); }),
            ErrorCode::kNotSpd);
  EXPECT_EQ(ThrownCode([&] {
              solver.Solve(DenseMatrix::Identity(2, 2), Point::Zero(3), none);
            }),
            ErrorCode::kDimensionMismatch);
  const LinearConstraints bad{DenseMatrix::Ones(2, 3), Point::Zero(2)};
  EXPECT_EQ(ThrownCode([&] {
              solver.Solve(DenseMatrix::Identity(2, 2), Point::Zero(2), bad);
            }),
            ErrorCode::kDimensionMismatch);
}

TEST(ActiveSetQpTest, DuplicateRowsAreHandled) {
  ActiveSetQpSolver solver;
  DenseMatrix a(3, 2);
  a << -1.0, 0.0, -1.0, 0.0, -2.0, 0.0;
  LinearConstraints cons{a, Point{{-1.0, -1.0, -2.0}}};  // x >= 1 three times
  const QpSolution sol =
      solver.Solve(DenseMatrix::Identity(2, 2), Point::Zero(2), cons);
  EXPECT_NEAR(sol.y(0), 1.0, 1e-14);
  EXPECT_NEAR(sol.y(1), 0.0, 1e-14);
  ExpectKkt(DenseMatrix::Identity(2, 2), Point::Zero(2), cons, sol);
}

TEST(ActiveSetQpPropertyTest, MatchesKktEnumerationOracle) {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim_dist(1, 3);
  std::uniform_int_distribution<int> row_dist(0, 8);
  ActiveSetQpSolver solver(ActiveSetQpSolver::Options{false});
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = dim_dist(rng);
    const int rows = row_dist(rng);
    const DenseMatrix m = RandomSpd(dim, rng);
    const Point c = RandomVec(dim, rng, 3.0);
    const LinearConstraints cons = RandomFeasible(dim, rows, rng);
    const QpSolution sol = solver.Solve(m, c, cons);
    const auto oracle = KktEnumerationQp(m, c, cons.a, cons.b);
    ASSERT_TRUE(oracle.has_value()) << "trial " << trial;
    EXPECT_LE((sol.y - *oracle).norm(), 1e-9 * (1.0 + oracle->norm())) << "trial " << trial;
    ExpectKkt(m, c, cons, sol);
  }
}

TEST(ActiveSetQpPropertyTest, MatchesBoxPatternOracle) {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<int> dim_dist(1, 5);
  std::uniform_real_distribution<double> width(0.1, 2.0);
  ActiveSetQpSolver solver(ActiveSetQpSolver::Options{false});
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = dim_dist(rng);
    const DenseMatrix m = RandomSpd(dim, rng);
    const Point c = RandomVec(dim, rng, 3.0);
    const Point lo = RandomVec(dim, rng);
    Point hi = lo;
    for (int i = 0; i < dim; ++i) hi(i) += width(rng);
    LinearConstraints cons{DenseMatrix(2 * dim, dim), Point(2 * dim)};
    cons.a << DenseMatrix::Identity(dim, dim), -DenseMatrix::Identity(dim, dim);
    cons.b << hi, -lo;
    const QpSolution sol = solver.Solve(m, c, cons);
    const auto oracle = BoxPatternQp(m, c, lo, hi);
    ASSERT_TRUE(oracle.has_value());
    EXPECT_LE((sol.y - *oracle).norm(), 1e-9 * (1.0 + oracle->norm())) << "trial " << trial;
  }
}

TEST(ActiveSetQpPropertyTest, KktResidualsOnLargerInstances) {
  std::mt19937_64 rng(303);
  std::uniform_int_distribution<int> dim_dist(1, 6);
  std::uniform_int_distribution<int> row_dist(0, 20);
  ActiveSetQpSolver solver(ActiveSetQpSolver::Options{false});
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = dim_dist(rng);
    const DenseMatrix m = RandomSpd(dim, rng);
    const Point c = RandomVec(dim, rng, 3.0);
    const LinearConstraints cons = RandomFeasible(dim, row_dist(rng), rng);
    ExpectKkt(m, c, cons, solver.Solve(m, c, cons));
  }
}

TEST(ActiveSetQpPropertyTest, WarmStartGivesSameMinimizer) {
  // Consecutive problems differ only in c, as in the prox iteration.
  std::mt19937_64 rng(404);
  ActiveSetQpSolver warm;
  ActiveSetQpSolver cold(ActiveSetQpSolver::Options{false});
  for (int block = 0; block < 100; ++block) {
    const int dim = 1 + block % 4;
    const DenseMatrix m = RandomSpd(dim, rng);
    const LinearConstraints cons = RandomFeasible(dim, 2 + block % 7, rng);
    Point c = RandomVec(dim, rng);
    for (int step = 0; step < 10; ++step) {
      c += 0.2 * RandomVec(dim, rng);
      const QpSolution a = warm.Solve(m, c, cons);
      const QpSolution b = cold.Solve(m, c, cons);
      EXPECT_LE((a.y - b.y).norm(), 1e-9 * (1.0 + b.y.norm()));
      ExpectKkt(m, c, cons, a);
    }
  }
}

TEST(ActiveSetQpTest, ResetWarmStartIsHarmless) {
  ActiveSetQpSolver solver;
  LinearConstraints cons{-DenseMatrix::Ones(1, 2), Point::Constant(1, -1.0)};
  const Point first = solver.Solve(DenseMatrix::Identity(2, 2), Point::Zero(2), cons).y;
  solver.ResetWarmStart();
  const Point second = solver.Solve(DenseMatrix::Identity(2, 2), Point::Zero(2), cons).y;
  EXPECT_EQ(first, second);
}

}  // namespace
}  // namespace ephybrid
