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

#include "ephybrid/core.h"

#include <cmath>

#include <fmt/format.h>

namespace ephybrid {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNotFinite: return "NotFinite";
    case ErrorCode::kNotSpd: return "NotSPD";
    case ErrorCode::kNonSquare: return "NonSquare";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kZeroNormal: return "ZeroNormal";
    case ErrorCode::kInvalidBox: return "InvalidBox";
    case ErrorCode::kEmptyIntersection: return "EmptyIntersection";
    case ErrorCode::kInfeasibleSet: return "InfeasibleSet";
    case ErrorCode::kDegenerateConstants: return "DegenerateConstants";
    case ErrorCode::kNotMonotone: return "NotMonotone";
    case ErrorCode::kNotNashCournot: return "NotNashCournot";
    case ErrorCode::kNonPositiveLambda: return "NonPositiveLambda";
    case ErrorCode::kCyclingDetected: return "CyclingDetected";
    case ErrorCode::kLambdaOutOfRange: return "LambdaOutOfRange";
    case ErrorCode::kKTooSmall: return "KTooSmall";
    case ErrorCode::kAlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::kSeedOutsideSet: return "SeedOutsideSet";
    case ErrorCode::kEmptyHalfspace: return "EmptyHalfspace";
    case ErrorCode::kEmptyOmega: return "EmptyOmega";
    case ErrorCode::kMaxIterExceeded: return "MaxIterExceeded";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kInvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(fmt::format("{}: {}", ErrorCodeName(code), message)),
      code_(code) {}

bool AllFinite(const Point& x) { return x.allFinite(); }
bool AllFinite(const DenseMatrix& m) { return m.allFinite(); }

void RequireFinite(const Point& x, std::string_view what) {
  if (!x.allFinite()) {
    throw Error(ErrorCode::kNotFinite,
                fmt::format("{} has non-finite entries", what));
  }
}

void RequireFinite(const DenseMatrix& m, std::string_view what) {
  if (!m.allFinite()) {
    throw Error(ErrorCode::kNotFinite,
                fmt::format("{} has non-finite entries", what));
  }
}

void RequireSameDimension(const Point& a, const Point& b,
                          std::string_view what) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("{}: {} vs {}", what, a.size(), b.size()));
  }
}

bool IsSymmetric(const DenseMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

namespace {

Eigen::VectorXd SymmetricPartEigenvalues(const DenseMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kNonSquare,
                fmt::format("{}x{} matrix", m.rows(), m.cols()));
  }
  if (m.size() == 0) return Eigen::VectorXd();
  const DenseMatrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues();
}

}  // namespace

double MinSymmetricEigenvalue(const DenseMatrix& m) {
  const Eigen::VectorXd ev = SymmetricPartEigenvalues(m);
  return ev.size() == 0 ? 0.0 : ev.minCoeff();
}

double MaxSymmetricEigenvalue(const DenseMatrix& m) {
  const Eigen::VectorXd ev = SymmetricPartEigenvalues(m);
  return ev.size() == 0 ? 0.0 : ev.maxCoeff();
}

CholeskyFactor::CholeskyFactor(const DenseMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kNotSpd,
                fmt::format("{}x{} matrix is not square", m.rows(), m.cols()));
  }
  if (!IsSymmetric(m, kSymmetryTol)) {
    throw Error(ErrorCode::kNotSpd, "matrix is not symmetric");
  }
  const Eigen::Index n = m.rows();
  lower_ = DenseMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = m(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= lower_(j, k) * lower_(j, k);
    if (!(pivot > kMinPivot)) {
      throw Error(ErrorCode::kNotSpd,
                  fmt::format("pivot {} at column {} is not positive", pivot, j));
    }
    const double d = std::sqrt(pivot);
    lower_(j, j) = d;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= lower_(i, k) * lower_(j, k);
      lower_(i, j) = s / d;
    }
  }
}

Point CholeskyFactor::Solve(const Point& b) const {
  if (b.size() != lower_.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("rhs has {} entries, factor is {}x{}", b.size(),
                            lower_.rows(), lower_.cols()));
  }
  const auto tri = lower_.triangularView<Eigen::Lower>();
  Point y = tri.solve(b);
  return tri.transpose().solve(y);
}

DenseMatrix CholeskyFactor::Solve(const DenseMatrix& b) const {
  if (b.rows() != lower_.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("rhs has {} rows, factor is {}x{}", b.rows(),
                            lower_.rows(), lower_.cols()));
  }
  const auto tri = lower_.triangularView<Eigen::Lower>();
  DenseMatrix y = tri.solve(b);
  return tri.transpose().solve(y);
}

Point SpdSolve(const DenseMatrix& m, const Point& b) {
  if (m.rows() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("matrix is {}x{}, rhs has {} entries", m.rows(),
                            m.cols(), b.size()));
  }
  return CholeskyFactor(m).Solve(b);
}

double SpectralNorm(const DenseMatrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kNonSquare,
                fmt::format("{}x{} matrix", m.rows(), m.cols()));
  }
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<DenseMatrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace ephybrid
