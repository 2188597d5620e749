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

// Dense linear algebra shared by every other module: the Point / DenseMatrix
// aliases, the library error type, a Cholesky factorization for symmetric
// positive definite systems and the spectral norm.

#ifndef EPHYBRID_CORE_H_
#define EPHYBRID_CORE_H_

#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace ephybrid {

using Point = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

enum class ErrorCode {
  kDimensionMismatch,
  kNotFinite,
  kNotSpd,
  kNonSquare,
  kNotSymmetric,
  kZeroNormal,
  kInvalidBox,
  kEmptyIntersection,
  kInfeasibleSet,
  kDegenerateConstants,
  kNotMonotone,
  kNotNashCournot,
  kNonPositiveLambda,
  kCyclingDetected,
  kLambdaOutOfRange,
  kKTooSmall,
  kAlphaOutOfRange,
  kSeedOutsideSet,
  kEmptyHalfspace,
  kEmptyOmega,
  kMaxIterExceeded,
  kParseError,
  kValidationError,
  kIoError,
  kInvariantViolation,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported by throwing Error (or a subclass).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

bool AllFinite(const Point& x);
bool AllFinite(const DenseMatrix& m);

// Throws kNotFinite naming `what` if any entry is NaN or infinite.
void RequireFinite(const Point& x, std::string_view what);
void RequireFinite(const DenseMatrix& m, std::string_view what);
void RequireSameDimension(const Point& a, const Point& b, std::string_view what);

bool IsSymmetric(const DenseMatrix& m, double tol = 1e-10);

// Eigenvalue range of the symmetric part (M + M^T) / 2.
double MinSymmetricEigenvalue(const DenseMatrix& m);
double MaxSymmetricEigenvalue(const DenseMatrix& m);

// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
// Construction fails with kNotSpd when the matrix is not symmetric to 1e-10
// or when a pivot drops to 1e-12 or below.
class CholeskyFactor {
 public:
  static constexpr double kSymmetryTol = 1e-10;
  static constexpr double kMinPivot = 1e-12;

  explicit CholeskyFactor(const DenseMatrix& m);

  Point Solve(const Point& b) const;
  DenseMatrix Solve(const DenseMatrix& b) const;

  int dim() const { return static_cast<int>(lower_.rows()); }

 private:
  DenseMatrix lower_;
};

// Solves M y = b for symmetric positive definite M.
Point SpdSolve(const DenseMatrix& m, const Point& b);

// Largest singular value (operator 2-norm) of a square matrix.
double SpectralNorm(const DenseMatrix& m);

}  // namespace ephybrid

#endif  // EPHYBRID_CORE_H_
