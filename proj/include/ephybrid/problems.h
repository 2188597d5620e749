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

// Equilibrium-problem data: bifunctions, their Lipschitz-type constants,
// monotone affine operators, nonexpansive mappings and the bundle (f, C, S)
// handed to the solvers.

#ifndef EPHYBRID_PROBLEMS_H_
#define EPHYBRID_PROBLEMS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ephybrid/convex_sets.h"
#include "ephybrid/core.h"

namespace ephybrid {

// Tolerance for the PSD / NSD eigenvalue checks.
inline constexpr double kDefinitenessTol = 1e-10;

// f(x, y) + f(y, z) >= f(x, z) - c1 ||x - y||^2 - c2 ||y - z||^2.
struct LipschitzConstants {
  double c1 = 0.0;
  double c2 = 0.0;

  // Throws kDegenerateConstants unless both are finite and > 0.
  static LipschitzConstants Create(double c1, double c2);
};

class Bifunction {
 public:
  virtual ~Bifunction() = default;
  virtual int dim() const = 0;
  virtual double Evaluate(const Point& x, const Point& y) const = 0;
};

// f(x, y) = <P x + Q y + q, y - x>.
class QuadraticBifunction final : public Bifunction {
 public:
  // Shape and finiteness checks only. Monotonicity is left to
  // ValidateConditions so non-monotone data can still be inspected.
  QuadraticBifunction(DenseMatrix p, DenseMatrix q, Point linear);

  // Additionally requires Q symmetric PSD and Q - P NSD (kNotNashCournot).
  static QuadraticBifunction NashCournot(DenseMatrix p, DenseMatrix q,
                                         Point linear);

  int dim() const override { return static_cast<int>(linear_.size()); }
  double Evaluate(const Point& x, const Point& y) const override;

  const DenseMatrix& p() const { return p_; }
  const DenseMatrix& q() const { return q_; }
  const Point& linear() const { return linear_; }

 private:
  DenseMatrix p_;
  DenseMatrix q_;
  Point linear_;
};

double EvalBifunction(const QuadraticBifunction& f, const Point& x,
                      const Point& y);

// c1 = c2 = ||P - Q|| / 2 (spectral norm). Throws kDegenerateConstants when
// P = Q and kNonSquare / kDimensionMismatch on bad shapes.
LipschitzConstants NashCournotConstants(const DenseMatrix& p,
                                        const DenseMatrix& q);

// A(x) = matrix x + offset, with matrix + matrix^T PSD.
class AffineOperator {
 public:
  // Throws kNotMonotone, kNonSquare, kDimensionMismatch, kNotFinite.
  AffineOperator(DenseMatrix matrix, Point offset);

  Point Apply(const Point& x) const { return matrix_ * x + offset_; }
  int dim() const { return static_cast<int>(offset_.size()); }

  const DenseMatrix& matrix() const { return matrix_; }
  const Point& offset() const { return offset_; }

 private:
  DenseMatrix matrix_;
  Point offset_;
};

struct VipBifunction {
  QuadraticBifunction bifunction;
  LipschitzConstants constants;
};

// f(x, y) = <A(x), y - x>, i.e. P = A, Q = 0, q = b, with c1 = c2 = ||A|| / 2.
VipBifunction VipAsBifunction(const AffineOperator& op);

struct IdentityMapping {};

// S(x) = P_outer(mean_i P_inner_i(x)).
struct AveragedProjections {
  ConvexSet outer;
  std::vector<ConvexSet> inner;
};

using NonexpansiveMapping = std::variant<IdentityMapping, AveragedProjections>;

Point ApplyMapping(const NonexpansiveMapping& mapping, const Point& x);

struct ProblemBundle {
  std::string name;
  QuadraticBifunction bifunction;
  ConvexSet feasible;
  NonexpansiveMapping mapping;
  LipschitzConstants constants;
  // A point of EP(f, C) n F(S) when one is known analytically.
  std::optional<Point> known_solution;

  int dim() const { return bifunction.dim(); }
};

// Throws kDimensionMismatch when f, C, S and the known solution disagree.
void CheckConsistent(const ProblemBundle& bundle);

struct ConditionReport {
  std::vector<std::string> violations;
  int samples = 0;

  bool ok() const { return violations.empty(); }
};

struct ValidationOptions {
  int samples = 1000;
  std::uint64_t seed = 20260101;
  double tol = 1e-9;
};

// Randomized checks on points of C: f(x, x) = 0, monotonicity, the
// Lipschitz-type inequality with the bundled constants, convexity of f(x, .)
// via Q PSD, nonexpansiveness of S and, when a solution is attached, its
// membership in C and F(S) and f(x*, y) >= 0. Violations are prefixed with
// "diagonal:", "monotonicity:", "lipschitz:", "convexity:", "S:" or "known
// solution". Weak continuity holds for every quadratic bifunction and is not
// sampled.
ConditionReport ValidateConditions(const ProblemBundle& bundle,
                                   const ValidationOptions& options = {});

}  // namespace ephybrid

#endif  // EPHYBRID_PROBLEMS_H_
