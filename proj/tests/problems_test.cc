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

#include "ephybrid/problems.h"

#include <random>

#include <gtest/gtest.h>

#include "ephybrid/bench.h"
#include "oracles.h"
#include "test_util.h"

namespace ephybrid {
namespace {

using testing::PowerIterationNorm;
using testing::RandomMat;
using testing::RandomVec;
using testing::ThrownCode;

bool HasViolation(const ConditionReport& report, std::string_view prefix) {
  for (const std::string& v : report.violations) {
    if (v.rfind(prefix, 0) == 0) return true;
  }
  return false;
}

TEST(BifunctionTest, DiagonalIsZero) {
  const ProblemBundle b = BuiltinExample1();
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Point x = RandomVec(3, rng, 5.0);
    EXPECT_EQ(EvalBifunction(b.bifunction, x, x), 0.0);
  }
}

TEST(BifunctionTest, HandEvaluations) {
  const DenseMatrix id = DenseMatrix::Identity(3, 3);
  const QuadraticBifunction f(id, id, Point::Zero(3));
  EXPECT_DOUBLE_EQ(f.Evaluate(Point::Zero(3), Point::Unit(3, 0)), 1.0);

  const ProblemBundle b = BuiltinExample1();
  EXPECT_NEAR(b.bifunction.Evaluate(Point::Unit(3, 0), Point::Unit(3, 1)), -3.5, 1e-14);
}

TEST(BifunctionTest, DimensionMismatch) {
  const ProblemBundle b = BuiltinExample1();
  EXPECT_EQ(ThrownCode([&] { b.bifunction.Evaluate(Point::Zero(2), Point::Zero(3)); }),
            ErrorCode::kDimensionMismatch);
  EXPECT_EQ(ThrownCode([] {
              QuadraticBifunction(DenseMatrix::Identity(3, 3), DenseMatrix::Identity(2, 2),
                                  Point::Zero(3));
            }),
            ErrorCode::kDimensionMismatch);
}

TEST(BifunctionTest, NashCournotFactoryChecksStructure) {
  DenseMatrix q = DenseMatrix::Identity(2, 2);
  DenseMatrix p = q;
  p(0, 0) = 0.5;  // Q - P has a positive eigenvalue
  EXPECT_EQ(ThrownCode([&] { QuadraticBifunction::NashCournot(p, q, Point::Zero(2)); }),
            ErrorCode::kNotNashCournot);
  DenseMatrix skew_q(2, 2);
  skew_q << 1.0, 1.0, 0.0, 1.0;
  EXPECT_EQ(ThrownCode([&] {
              QuadraticBifunction::NashCournot(3.0 * DenseMatrix::Identity(2, 2), skew_q,
                                               Point::Zero(2));
            }),
            ErrorCode::kNotNashCournot);
  EXPECT_NO_THROW(QuadraticBifunction::NashCournot(NashCournotP(), NashCournotQ(),
                                                   Point::Zero(3)));
}

TEST(ConstantsTest, Examples) {
  const LipschitzConstants c = NashCournotConstants(NashCournotP(), NashCournotQ());
  EXPECT_NEAR(c.c1, 1.39039, 1e-5);
  EXPECT_EQ(c.c1, c.c2);
  EXPECT_NEAR(2.0 * c.c1, PowerIterationNorm(NashCournotP() - NashCournotQ()), 1e-9);

  EXPECT_EQ(ThrownCode([] {
              NashCournotConstants(NashCournotP(), NashCournotP());
            }),
            ErrorCode::kDegenerateConstants);
  const LipschitzConstants unit = NashCournotConstants(
      2.0 * DenseMatrix::Identity(3, 3), DenseMatrix::Zero(3, 3));
  EXPECT_NEAR(unit.c1, 1.0, 1e-15);
  EXPECT_EQ(ThrownCode([] {
              NashCournotConstants(DenseMatrix::Ones(2, 3), DenseMatrix::Ones(2, 3));
            }),
            ErrorCode::kNonSquare);
  EXPECT_EQ(ThrownCode([] { LipschitzConstants::Create(0.0, 1.0); }),
            ErrorCode::kDegenerateConstants);
}

TEST(VipTest, Examples) {
  const VipBifunction id =
      VipAsBifunction(AffineOperator(DenseMatrix::Identity(3, 3), Point::Zero(3)));
  EXPECT_NEAR(id.constants.c1, 0.5, 1e-15);
  EXPECT_NEAR(id.constants.c2, 0.5, 1e-15);
  const Point x{{1.0, 2.0, 3.0}};
  const Point y{{0.0, -1.0, 4.0}};
  EXPECT_NEAR(id.bifunction.Evaluate(x, y), x.dot(y - x), 1e-14);

  EXPECT_EQ(ThrownCode([] {
              VipAsBifunction(AffineOperator(DenseMatrix::Zero(3, 3), Point::Ones(3)));
            }),
            ErrorCode::kDegenerateConstants);

  std::mt19937_64 rng(3);
  const DenseMatrix s = RandomMat(3, 3, rng);
  const VipBifunction skew = VipAsBifunction(AffineOperator(s - s.transpose(), Point::Ones(3)));
  for (int i = 0; i < 100; ++i) {
    const Point z = RandomVec(3, rng);
    EXPECT_NEAR(skew.bifunction.Evaluate(z, z), 0.0, 1e-14);
  }
}

TEST(AffineOperatorTest, RejectsNonMonotone) {
  DenseMatrix a(2, 2);
  a << 1.0, 0.0, 0.0, -1.0;
  EXPECT_EQ(ThrownCode([&] { AffineOperator(a, Point::Zero(2)); }), ErrorCode::kNotMonotone);
  EXPECT_EQ(ThrownCode([] { AffineOperator(DenseMatrix::Identity(2, 2), Point::Zero(3)); }),
            ErrorCode::kDimensionMismatch);
}

TEST(MappingTest, Identity) {
  const Point x{{4.0, -2.0}};
  EXPECT_EQ(ApplyMapping(IdentityMapping{}, x), x);
}

TEST(MappingTest, Example2Mapping) {
  const ProblemBundle b = BuiltinExample2();
  const auto& avg = std::get<AveragedProjections>(b.mapping);
  Point mean = Point::Zero(3);
  for (const ConvexSet& s : avg.inner) mean += Project(s, Point::Zero(3));
  mean /= 3.0;
  EXPECT_NEAR(mean(0), -1.2730, 1e-4);
  EXPECT_NEAR(mean(1), -0.8279, 1e-4);
  EXPECT_NEAR(mean(2), -0.6051, 1e-4);
  EXPECT_EQ(ApplyMapping(b.mapping, Point::Zero(3)), Point::Zero(3));

  // Hand composition of the three halfspace projections from (1, 1, 1).
  const Point one = Point::Ones(3);
  const Point a1{{3.0, 2.0, 1.0}}, a2{{5.0, 4.0, 3.0}}, a3{{2.0, 1.0, 1.0}};
  const Point p1 = one - (a1.dot(one) + 6.0) / a1.squaredNorm() * a1;
  const Point p2 = one - (a2.dot(one) + 12.0) / a2.squaredNorm() * a2;
  const Point p3 = one - (a3.dot(one) + 4.0) / a3.squaredNorm() * a3;
  const Point expected = ((p1 + p2 + p3) / 3.0).cwiseMax(0.0).cwiseMin(1.0);
  const Point s = ApplyMapping(b.mapping, one);
  EXPECT_LE((s - expected).norm(), 1e-14);
  EXPECT_TRUE(Contains(b.feasible, s, 0.0));
}

TEST(MappingTest, DimensionMismatch) {
  const ProblemBundle b = BuiltinExample2();
  EXPECT_EQ(ThrownCode([&] { ApplyMapping(b.mapping, Point::Zero(2)); }),
            ErrorCode::kDimensionMismatch);
}

TEST(BundleTest, CheckConsistentRejectsMismatch) {
  ProblemBundle b = BuiltinExample1();
  b.feasible = Box::Uniform(2, 0.0, 1.0);
  EXPECT_EQ(ThrownCode([&] { CheckConsistent(b); }), ErrorCode::kDimensionMismatch);
}

TEST(ValidateConditionsTest, BuiltinsPass) {
  const ConditionReport r1 = ValidateConditions(BuiltinExample1());
  EXPECT_TRUE(r1.ok()) << (r1.violations.empty() ? "" : r1.violations.front());
  EXPECT_EQ(r1.samples, 1000);
  const ConditionReport r2 = ValidateConditions(BuiltinExample2());
  EXPECT_TRUE(r2.ok()) << (r2.violations.empty() ? "" : r2.violations.front());
}

TEST(ValidateConditionsTest, DetectsNonMonotoneData) {
  const DenseMatrix q = DenseMatrix::Identity(3, 3) * 2.0;
  DenseMatrix p = q;
  p.diagonal() += Point{{-1.0, 1.0, -1.0}};
  ProblemBundle b{"bad",
                  QuadraticBifunction(p, q, Point::Zero(3)),
                  Box::Uniform(3, 0.0, 1.0),
                  IdentityMapping{},
                  NashCournotConstants(p, q),
                  std::nullopt};
  const ConditionReport r = ValidateConditions(b);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(HasViolation(r, "monotonicity"));
  EXPECT_FALSE(HasViolation(r, "S:"));
}

TEST(ValidateConditionsTest, DetectsUnderstatedConstants) {
  ProblemBundle b = BuiltinExample2();
  b.constants = LipschitzConstants::Create(0.01, 0.01);
  EXPECT_TRUE(HasViolation(ValidateConditions(b), "lipschitz"));
}

TEST(ValidateConditionsTest, DetectsWrongKnownSolution) {
  ProblemBundle b = BuiltinExample2();
  b.known_solution = Point::Ones(3);
  EXPECT_FALSE(ValidateConditions(b).ok());
}

TEST(BifunctionPropertyTest, MonotoneAndLipschitzOnBuiltins) {
  std::mt19937_64 rng(11);
  for (const ProblemBundle& b : {BuiltinExample1(), BuiltinExample2()}) {
    const auto pts = SampleFeasiblePoints(b.feasible, 3000, rng);
    for (int i = 0; i < 1000; ++i) {
      const Point& x = pts[3 * i];
      const Point& y = pts[3 * i + 1];
      const Point& z = pts[3 * i + 2];
      const auto& f = b.bifunction;
      EXPECT_LE(f.Evaluate(x, y) + f.Evaluate(y, x), 1e-9);
      EXPECT_GE(f.Evaluate(x, y) + f.Evaluate(y, z),
                f.Evaluate(x, z) - b.constants.c1 * (x - y).squaredNorm() -
                    b.constants.c2 * (y - z).squaredNorm() - 1e-9);
    }
  }
}

TEST(BifunctionPropertyTest, LipschitzOnRandomQuadratics) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> dim_dist(1, 6);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = dim_dist(rng);
    const DenseMatrix p = RandomMat(n, n, rng);
    const DenseMatrix a = RandomMat(n, n, rng);
    const DenseMatrix q = a * a.transpose();
    if ((p - q).norm() < 1e-6) continue;
    const QuadraticBifunction f(p, q, RandomVec(n, rng));
    const LipschitzConstants c = NashCournotConstants(p, q);
    const Point x = RandomVec(n, rng), y = RandomVec(n, rng), z = RandomVec(n, rng);
    const double scale = 1.0 + x.squaredNorm() + y.squaredNorm() + z.squaredNorm();
    EXPECT_GE(f.Evaluate(x, y) + f.Evaluate(y, z),
              f.Evaluate(x, z) - c.c1 * (x - y).squaredNorm() -
                  c.c2 * (y - z).squaredNorm() - 1e-9 * scale)
        << "trial " << trial;
  }
}

TEST(MappingPropertyTest, Example2MappingIsNonexpansive) {
  std::mt19937_64 rng(13);
  const ProblemBundle b = BuiltinExample2();
  for (int i = 0; i < 1000; ++i) {
    const Point x = RandomVec(3, rng, 3.0);
    const Point y = RandomVec(3, rng, 3.0);
    EXPECT_LE((ApplyMapping(b.mapping, x) - ApplyMapping(b.mapping, y)).norm(),
              (x - y).norm() + 1e-12);
  }
}

}  // namespace
}  // namespace ephybrid
