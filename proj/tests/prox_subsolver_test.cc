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

#include "ephybrid/prox_subsolver.h"

#include <random>

#include <gtest/gtest.h>

#include "ephybrid/bench.h"
#include "oracles.h"
#include "test_util.h"

namespace ephybrid {
namespace {

using testing::KktEnumerationQp;
using testing::RandomMat;
using testing::RandomSpd;
using testing::RandomVec;
using testing::ThrownCode;

double Lambda1() {
  return 1.0 / (5.0 * NashCournotConstants(NashCournotP(), NashCournotQ()).c1);
}

TEST(ReduceProxToQpTest, VipWrapperGivesShiftedProjection) {
  std::mt19937_64 rng(1);
  const DenseMatrix s = RandomMat(3, 3, rng);
  const AffineOperator op(s - s.transpose() + DenseMatrix::Identity(3, 3), Point{{1.0, 0.0, -1.0}});
  const VipBifunction vip = VipAsBifunction(op);
  const Point v{{0.2, 0.4, 0.1}};
  const Point x{{0.9, -0.3, 0.5}};
  const double lambda = 0.1;
  const Box box = Box::Uniform(3, 0.0, 1.0);
  const QpInstance qp = ReduceProxToQp(vip.bifunction, v, x, lambda, box);
  EXPECT_LE((qp.m - DenseMatrix::Identity(3, 3)).norm(), 1e-15);
  EXPECT_LE((qp.c - (lambda * op.Apply(v) - x)).norm(), 1e-15);
  const Point closed = ProjectBox(x - lambda * op.Apply(v), box);
  EXPECT_LE((ProxStep(vip.bifunction, v, x, lambda, box) - closed).norm(), 1e-9);
}

TEST(ReduceProxToQpTest, EqualMatricesGiveUnconstrainedNormalEquations) {
  std::mt19937_64 rng(2);
  const DenseMatrix q = RandomSpd(3, rng);
  const QuadraticBifunction f(q, q, Point::Zero(3));
  const Point x{{1.0, -2.0, 0.5}};
  const double lambda = 0.3;
  const QpInstance qp = ReduceProxToQp(f, x, x, lambda, WholeSpace{3});
  EXPECT_LE((qp.c + x).norm(), 1e-14);
  const Point expected =
      (2.0 * lambda * q + DenseMatrix::Identity(3, 3)).fullPivLu().solve(x);
  EXPECT_LE((ProxStep(f, x, x, lambda, WholeSpace{3}) - expected).norm(), 1e-12);
}

TEST(ReduceProxToQpTest, ZeroBifunctionIsProjection) {
  const QuadraticBifunction zero(DenseMatrix::Zero(3, 3), DenseMatrix::Zero(3, 3),
                                 Point::Zero(3));
  const Polyhedron c = Polyhedron::Create({Halfspace::GreaterEqual(Point::Ones(3), 1.0)},
                                          Box::Uniform(3, 0.0, 1.0));
  const Point x{{2.0, -1.0, 0.3}};
  EXPECT_LE((ProxStep(zero, Point::Zero(3), x, 0.7, c) - ProjectPolyhedron(x, c)).norm(),
            1e-12);
}

TEST(ReduceProxToQpTest, Errors) {
  const ProblemBundle b = BuiltinExample1();
  EXPECT_EQ(ThrownCode([&] {
              ReduceProxToQp(b.bifunction, Point::Zero(3), Point::Zero(3), 0.0, b.feasible);
            }),
            ErrorCode::kNonPositiveLambda);
  EXPECT_EQ(ThrownCode([&] {
              ReduceProxToQp(b.bifunction, Point::Zero(2), Point::Zero(3), 0.1, b.feasible);
            }),
            ErrorCode::kDimensionMismatch);
}

TEST(SolveQpActiveSetTest, Examples) {
  const Point x0{{1.5, -0.5, 0.25}};
  const QpInstance box{DenseMatrix::Identity(3, 3), -x0, Box::Uniform(3, 0.0, 1.0)};
  EXPECT_LE((SolveQpActiveSet(box) - Point{{1.0, 0.0, 0.25}}).norm(), 1e-14);
  const QpInstance simplex{DenseMatrix::Identity(3, 3), Point::Zero(3),
                           BuiltinExample1().feasible};
  EXPECT_LE((SolveQpActiveSet(simplex) - Point::Constant(3, 1.0 / 3.0)).norm(), 1e-12);
}

TEST(ProxStepTest, Example1GoldenValue) {
  const ProblemBundle b = BuiltinExample1();
  const Point x{{1.0, 3.0, 1.0}};
  const Point y = ProxStep(b.bifunction, Point::Zero(3), x, Lambda1(), b.feasible);
  EXPECT_NEAR(y(0), 0.38927935, 1e-8);
  EXPECT_NEAR(y(1), 1.0, 1e-12);
  EXPECT_NEAR(y(2), 0.39710254, 1e-8);
  EXPECT_TRUE(Contains(b.feasible, y));

  // Same instance through the enumeration oracle with hand-built data.
  const double lambda = Lambda1();
  const DenseMatrix m = 2.0 * lambda * NashCournotQ() + DenseMatrix::Identity(3, 3);
  const Point c = lambda * Point{{1.0, -2.0, 3.0}} - x;
  DenseMatrix a(7, 3);
  a << -1, -1, -1, 1, 0, 0, 0, 1, 0, 0, 0, 1, -1, 0, 0, 0, -1, 0, 0, 0, -1;
  Point rhs(7);
  rhs << -1, 1, 1, 1, 0, 0, 0;
  const auto oracle = KktEnumerationQp(m, c, a, rhs);
  ASSERT_TRUE(oracle.has_value());
  EXPECT_LE((y - *oracle).norm(), 1e-9);
}

TEST(ProxSolverTest, WarmStartedStepsMatchFreshSteps) {
  const ProblemBundle b = BuiltinExample1();
  std::mt19937_64 rng(5);
  ProxSolver warm;
  for (int i = 0; i < 200; ++i) {
    const Point v = RandomVec(3, rng);
    const Point x = RandomVec(3, rng, 2.0);
    const Point a = warm.Step(b.bifunction, v, x, Lambda1(), b.feasible);
    const Point c = ProxStep(b.bifunction, v, x, Lambda1(), b.feasible);
    EXPECT_LE((a - c).norm(), 1e-12);
  }
}

// Random convex quadratic bifunction data over a random feasible polyhedron.
struct RandomProx {
  QuadraticBifunction f;
  ConvexSet c;
  Point v;
  Point x;
  double lambda;
};

RandomProx MakeRandomProx(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim_dist(1, 6);
  std::uniform_int_distribution<int> row_dist(1, 6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = dim_dist(rng);
  const DenseMatrix a = RandomMat(n, n, rng);
  const DenseMatrix q = a * a.transpose();
  const DenseMatrix p = q + RandomSpd(n, rng);
  const Point center = RandomVec(n, rng);
  std::vector<Halfspace> hs;
  const int rows = row_dist(rng);
  for (int i = 0; i < rows; ++i) {
    const Point normal = RandomVec(n, rng);
    hs.push_back(Halfspace::LessEqual(normal, normal.dot(center) + unit(rng)));
  }
  ConvexSet c = Polyhedron::Create(std::move(hs));
  if (rows % 3 == 0) c = Box::Create(center.array() - 1.0, center.array() + unit(rng));
  return {QuadraticBifunction(p, q, RandomVec(n, rng)), c, RandomVec(n, rng, 2.0),
          RandomVec(n, rng, 2.0), 0.05 + unit(rng)};
}

TEST(ProxPropertyTest, OptimalityInequalities) {
  std::mt19937_64 rng(20260101);
  for (int trial = 0; trial < 1000; ++trial) {
    const RandomProx r = MakeRandomProx(rng);
    const Point yp = ProxStep(r.f, r.v, r.x, r.lambda, r.c);
    ASSERT_TRUE(Contains(r.c, yp, 1e-9)) << "trial " << trial;
    const double obj_p = ProxObjective(r.f, r.v, r.x, r.lambda, yp);
    for (const Point& y : SampleFeasiblePoints(r.c, 200, rng)) {
      const double scale = 1.0 + y.squaredNorm() + r.x.squaredNorm() + r.v.squaredNorm();
      EXPECT_GE((yp - r.x).dot(y - yp),
                r.lambda * (r.f.Evaluate(r.v, yp) - r.f.Evaluate(r.v, y)) - 1e-8 * scale)
          << "trial " << trial;
      const double obj = ProxObjective(r.f, r.v, r.x, r.lambda, y);
      EXPECT_GE(obj, obj_p - 1e-9 * scale) << "trial " << trial;
      EXPECT_GE(obj - obj_p, 0.5 * (y - yp).squaredNorm() - 1e-8 * scale)
          << "trial " << trial;
    }
  }
}

TEST(ProxPropertyTest, MatchesKktEnumerationOracle) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> dim_dist(1, 3);
  std::uniform_int_distribution<int> row_dist(1, 8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = dim_dist(rng);
    const DenseMatrix a = RandomMat(n, n, rng);
    const DenseMatrix q = a * a.transpose();
    const DenseMatrix p = q + RandomSpd(n, rng);
    const Point lin = RandomVec(n, rng);
    const QuadraticBifunction f(p, q, lin);
    const Point center = RandomVec(n, rng);
    const int rows = row_dist(rng);
    std::vector<Halfspace> hs;
    DenseMatrix arows(rows, n);
    Point b(rows);
    for (int i = 0; i < rows; ++i) {
      arows.row(i) = RandomVec(n, rng).transpose();
      b(i) = arows.row(i).dot(center) + unit(rng);
      hs.push_back(Halfspace::LessEqual(arows.row(i).transpose(), b(i)));
    }
    const Point v = RandomVec(n, rng), x = RandomVec(n, rng, 2.0);
    const double lambda = 0.05 + unit(rng);
    const Point y = ProxStep(f, v, x, lambda, Polyhedron::Create(std::move(hs)));
    // Hand-expanded objective: lambda y'Qy + lambda <Pv + q - Q'v, y> + 1/2 |x - y|^2.
    const DenseMatrix m = lambda * (q + q.transpose()) + DenseMatrix::Identity(n, n);
    const Point c = lambda * (p * v + lin - q.transpose() * v) - x;
    const auto oracle = KktEnumerationQp(m, c, arows, b);
    ASSERT_TRUE(oracle.has_value());
    EXPECT_LE((y - *oracle).norm(), 1e-9 * (1.0 + oracle->norm())) << "trial " << trial;
  }
}

}  // namespace
}  // namespace ephybrid
