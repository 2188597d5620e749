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

#include <cmath>
#include <random>

#include <fmt/format.h>

namespace ephybrid {

namespace {

void RequireSquare(const DenseMatrix& m, int dim, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kNonSquare,
                fmt::format("{} is {}x{}", what, m.rows(), m.cols()));
  }
  if (m.rows() != dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("{} has order {}, expected {}", what, m.rows(), dim));
  }
}

}  // namespace

LipschitzConstants LipschitzConstants::Create(double c1, double c2) {
  if (!(std::isfinite(c1) && std::isfinite(c2) && c1 > 0.0 && c2 > 0.0)) {
    throw Error(ErrorCode::kDegenerateConstants,
                fmt::format("c1 = {}, c2 = {} must both be positive", c1, c2));
  }
  return LipschitzConstants{c1, c2};
}

QuadraticBifunction::QuadraticBifunction(DenseMatrix p, DenseMatrix q,
                                         Point linear)
    : p_(std::move(p)), q_(std::move(q)), linear_(std::move(linear)) {
  const int n = static_cast<int>(linear_.size());
  if (n == 0) {
    throw Error(ErrorCode::kDimensionMismatch, "bifunction has dimension 0");
  }
  RequireSquare(p_, n, "P");
  RequireSquare(q_, n, "Q");
  RequireFinite(p_, "P");
  RequireFinite(q_, "Q");
  RequireFinite(linear_, "q");
}

QuadraticBifunction QuadraticBifunction::NashCournot(DenseMatrix p,
                                                     DenseMatrix q,
                                                     Point linear) {
  QuadraticBifunction f(std::move(p), std::move(q), std::move(linear));
  if (!IsSymmetric(f.q_, kDefinitenessTol)) {
    throw Error(ErrorCode::kNotNashCournot, "Q is not symmetric");
  }
  if (MinSymmetricEigenvalue(f.q_) < -kDefinitenessTol) {
    throw Error(ErrorCode::kNotNashCournot, "Q is not positive semidefinite");
  }
  if (MaxSymmetricEigenvalue(f.q_ - f.p_) > kDefinitenessTol) {
    throw Error(ErrorCode::kNotNashCournot,
                "Q - P is not negative semidefinite");
  }
  return f;
}

double QuadraticBifunction::Evaluate(const Point& x, const Point& y) const {
  if (x.size() != linear_.size() || y.size() != linear_.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("bifunction on R^{} evaluated at R^{} x R^{}",
                            linear_.size(), x.size(), y.size()));
  }
  return (p_ * x + q_ * y + linear_).dot(y - x);
}

double EvalBifunction(const QuadraticBifunction& f, const Point& x,
                      const Point& y) {
  return f.Evaluate(x, y);
}

LipschitzConstants NashCournotConstants(const DenseMatrix& p,
                                        const DenseMatrix& q) {
  if (p.rows() != q.rows() || p.cols() != q.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "P and Q differ in shape");
  }
  const double half_norm = 0.5 * SpectralNorm(p - q);
  return LipschitzConstants::Create(half_norm, half_norm);
}

AffineOperator::AffineOperator(DenseMatrix matrix, Point offset)
    : matrix_(std::move(matrix)), offset_(std::move(offset)) {
  RequireSquare(matrix_, static_cast<int>(offset_.size()), "operator matrix");
  RequireFinite(matrix_, "operator matrix");
  RequireFinite(offset_, "operator offset");
  if (MinSymmetricEigenvalue(matrix_) < -kDefinitenessTol) {
    throw Error(ErrorCode::kNotMonotone, "A + A^T is not positive semidefinite");
  }
}

VipBifunction VipAsBifunction(const AffineOperator& op) {
  const int n = op.dim();
  QuadraticBifunction f(op.matrix(), DenseMatrix::Zero(n, n), op.offset());
  const double half_lipschitz = 0.5 * SpectralNorm(op.matrix());
  return VipBifunction{std::move(f),
                       LipschitzConstants::Create(half_lipschitz, half_lipschitz)};
}

Point ApplyMapping(const NonexpansiveMapping& mapping, const Point& x) {
  if (std::holds_alternative<IdentityMapping>(mapping)) return x;
  const auto& avg = std::get<AveragedProjections>(mapping);
  if (avg.inner.empty()) return Project(avg.outer, x);
  Point mean = Point::Zero(x.size());
  for (const ConvexSet& set : avg.inner) mean += Project(set, x);
  mean /= static_cast<double>(avg.inner.size());
  return Project(avg.outer, mean);
}

void CheckConsistent(const ProblemBundle& bundle) {
  const int n = bundle.dim();
  const auto require = [n](int got, const char* what) {
    if (got != n) {
      throw Error(ErrorCode::kDimensionMismatch,
                  fmt::format("{} lives in R^{}, bifunction in R^{}", what, got, n));
    }
  };
  require(Dimension(bundle.feasible), "feasible set");
  if (const auto* avg = std::get_if<AveragedProjections>(&bundle.mapping)) {
    require(Dimension(avg->outer), "mapping outer set");
    for (const ConvexSet& s : avg->inner) require(Dimension(s), "mapping inner set");
  }
  if (bundle.known_solution) {
    require(static_cast<int>(bundle.known_solution->size()), "known solution");
  }
}

ConditionReport ValidateConditions(const ProblemBundle& bundle,
                                   const ValidationOptions& options) {
  CheckConsistent(bundle);
  ConditionReport report;
  report.samples = options.samples;
  const QuadraticBifunction& f = bundle.bifunction;
  const double tol = options.tol;
  const double c1 = bundle.constants.c1;
  const double c2 = bundle.constants.c2;
  auto fail = [&report](std::string what) {
    report.violations.push_back(std::move(what));
  };

  if (!(c1 > 0.0 && c2 > 0.0)) fail("lipschitz: constants must be positive");
  if (!IsSymmetric(f.q(), kDefinitenessTol) ||
      MinSymmetricEigenvalue(f.q()) < -kDefinitenessTol) {
    fail("convexity: Q is not symmetric positive semidefinite");
  }
  if (MinSymmetricEigenvalue(f.p() - f.q()) < -kDefinitenessTol) {
    fail("monotonicity: Q - P is not negative semidefinite");
  }

  std::mt19937_64 rng(options.seed);
  const std::vector<Point> pts =
      SampleFeasiblePoints(bundle.feasible, 3 * options.samples, rng);
  const auto at = [&pts](int i) -> const Point& {
    return pts[static_cast<std::size_t>(i)];
  };

  double worst_diag = 0.0, worst_mono = -INFINITY, worst_lip = INFINITY;
  double worst_nonexp = -INFINITY;
  for (int i = 0; i < options.samples; ++i) {
    const Point& x = at(3 * i);
    const Point& y = at(3 * i + 1);
    const Point& z = at(3 * i + 2);
    worst_diag = std::max(worst_diag, std::abs(f.Evaluate(x, x)));
    worst_mono = std::max(worst_mono, f.Evaluate(x, y) + f.Evaluate(y, x));
    const double lip = f.Evaluate(x, y) + f.Evaluate(y, z) - f.Evaluate(x, z) +
                       c1 * (x - y).squaredNorm() + c2 * (y - z).squaredNorm();
    worst_lip = std::min(worst_lip, lip);
    const double nonexp = (ApplyMapping(bundle.mapping, x) -
                           ApplyMapping(bundle.mapping, y)).norm() -
                          (x - y).norm();
    worst_nonexp = std::max(worst_nonexp, nonexp);
  }
  if (worst_diag > tol) fail(fmt::format("diagonal: |f(x,x)| reached {:.3e}", worst_diag));
  if (worst_mono > tol) {
    fail(fmt::format("monotonicity: f(x,y) + f(y,x) reached {:.3e}", worst_mono));
  }
  if (worst_lip < -tol) {
    fail(fmt::format("lipschitz: Lipschitz-type inequality short by {:.3e}", -worst_lip));
  }
  if (worst_nonexp > 1e-12) {
    fail(fmt::format("S: expansion by {:.3e}", worst_nonexp));
  }

  if (bundle.known_solution) {
    const Point& xs = *bundle.known_solution;
    if (!Contains(bundle.feasible, xs)) fail("known solution is outside C");
    if ((ApplyMapping(bundle.mapping, xs) - xs).norm() > 1e-12) {
      fail("known solution is not a fixed point of S");
    }
    double worst_ep = INFINITY;
    for (int i = 0; i < options.samples; ++i) {
      worst_ep = std::min(worst_ep, f.Evaluate(xs, at(i)));
    }
    if (worst_ep < -tol) {
      fail(fmt::format("known solution: f(x*, y) reached {:.3e}", worst_ep));
    }
  }
  return report;
}

}  // namespace ephybrid
