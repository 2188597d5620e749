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

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <fmt/format.h>

namespace ephybrid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative size of the component of a_p outside span(A_W) (in the M^{-1}
// metric) below which a_p is treated as linearly dependent on the working set.
constexpr double kDependenceTol = 1e-12;

// Constraints violated by less than this (scaled) amount count as satisfied.
double ViolationTol(double b, double row_norm, double x_norm) {
  return 1e-12 * (1.0 + std::abs(b) + row_norm * x_norm);
}

class WorkingSetAlgebra {
 public:
  WorkingSetAlgebra(const CholeskyFactor& factor, const LinearConstraints& cons)
      : cons_(cons), minv_at_(factor.Solve(DenseMatrix(cons.a.transpose()))) {}

  // M^{-1} a_j.
  auto MinvRow(int j) const { return minv_at_.col(j); }

  // S_W = A_W M^{-1} A_W^T.
  DenseMatrix Schur(const std::vector<int>& w) const {
    const Eigen::Index k = static_cast<Eigen::Index>(w.size());
    DenseMatrix s(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
      for (Eigen::Index j = 0; j < k; ++j) {
        s(i, j) = cons_.a.row(w[i]).dot(minv_at_.col(w[j]));
      }
    }
    return 0.5 * (s + s.transpose());
  }

  // Returns the minimizer over {A_W y = b_W} and its multipliers, or nullopt
  // if the working set rows are numerically dependent.
  std::optional<std::pair<Point, Point>> EqualityMinimizer(
      const std::vector<int>& w, const Point& minv_c) const {
    Point y = -minv_c;
    if (w.empty()) return std::make_pair(y, Point());
    const Eigen::Index k = static_cast<Eigen::Index>(w.size());
    Point rhs(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      rhs(i) = -(cons_.b(w[i]) + cons_.a.row(w[i]).dot(minv_c));
    }
    Point mu;
    try {
      mu = CholeskyFactor(Schur(w)).Solve(rhs);
    } catch (const Error&) {
      return std::nullopt;
    }
    for (Eigen::Index i = 0; i < k; ++i) y -= mu(i) * minv_at_.col(w[i]);
    return std::make_pair(y, mu);
  }

 private:
  const LinearConstraints& cons_;
  DenseMatrix minv_at_;
};

}  // namespace

KktResiduals ComputeKktResiduals(const DenseMatrix& m, const Point& c,
                                 const LinearConstraints& constraints,
                                 const QpSolution& solution) {
  KktResiduals r;
  Point grad = m * solution.y + c;
  if (constraints.count() > 0) {
    grad += constraints.a.transpose() * solution.multipliers;
    r.min_multiplier = solution.multipliers.minCoeff();
  }
  r.stationarity = grad.norm();
  for (int i = 0; i < constraints.count(); ++i) {
    const double slack = constraints.a.row(i).dot(solution.y) - constraints.b(i);
    r.complementarity =
        std::max(r.complementarity, std::abs(solution.multipliers(i) * slack));
    r.primal_violation = std::max(r.primal_violation, slack);
  }
  return r;
}

QpSolution ActiveSetQpSolver::Solve(const DenseMatrix& m, const Point& c,
                                    const LinearConstraints& cons) {
  const Eigen::Index n = c.size();
  if (m.rows() != n || m.cols() != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("QP matrix is {}x{}, linear term has {} entries",
                            m.rows(), m.cols(), n));
  }
  if (cons.a.rows() != cons.b.size() || (cons.count() > 0 && cons.a.cols() != n)) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("constraint block is {}x{} with {} offsets",
                            cons.a.rows(), cons.a.cols(), cons.b.size()));
  }
  const int rows = cons.count();
  const CholeskyFactor factor(m);
  const WorkingSetAlgebra algebra(factor, cons);
  const Point minv_c = factor.Solve(c);

  Point row_norms(rows);
  for (int j = 0; j < rows; ++j) {
    row_norms(j) = cons.a.row(j).norm();
    if (row_norms(j) == 0.0 && cons.b(j) < -ViolationTol(cons.b(j), 0.0, 0.0)) {
      throw Error(ErrorCode::kInfeasibleSet,
                  fmt::format("row {} reads 0 <= {}", j, cons.b(j)));
    }
  }

  std::vector<int> working;
  Point mu_full = Point::Zero(rows);
  Point y = -minv_c;

  // Warm start: shrink the previous active set until its equality-constrained
  // minimizer has nonnegative multipliers (a dual feasible starting point).
  if (options_.warm_start && last_rows_ == rows && last_cols_ == n) {
    working = last_active_;
    while (!working.empty()) {
      auto eq = algebra.EqualityMinimizer(working, minv_c);
      if (!eq) {
        working.clear();
        break;
      }
      const Point& mu = eq->second;
      Eigen::Index worst = 0;
      if (mu.minCoeff(&worst) >= 0.0) {
        y = eq->first;
        for (std::size_t i = 0; i < working.size(); ++i) {
          mu_full(working[i]) = mu(static_cast<Eigen::Index>(i));
        }
        break;
      }
      working.erase(working.begin() + worst);
    }
    if (working.empty()) y = -minv_c;
  }

  const int cap = 3 * (rows + static_cast<int>(n));
  int iterations = 0;
  auto in_working = [&working](int j) {
    return std::find(working.begin(), working.end(), j) != working.end();
  };

  while (true) {
    // Most violated constraint by normalized violation, lowest index on ties.
    int p = -1;
    double worst = 0.0;
    const double y_norm = y.norm();
    for (int j = 0; j < rows; ++j) {
      if (row_norms(j) == 0.0 || in_working(j)) continue;
      const double s = cons.a.row(j).dot(y) - cons.b(j);
      if (s <= ViolationTol(cons.b(j), row_norms(j), y_norm)) continue;
      const double score = s / row_norms(j);
      if (score > worst) {
        worst = score;
        p = j;
      }
    }
    if (p < 0) break;

    const auto ap = cons.a.row(p);
    const double ap_minv_ap = ap.dot(algebra.MinvRow(p));
    double mu_p = 0.0;
    while (true) {
      if (++iterations > cap) {
        throw Error(ErrorCode::kCyclingDetected,
                    fmt::format("no optimum after {} active-set steps", cap));
      }
      const Eigen::Index k = static_cast<Eigen::Index>(working.size());
      Point r(k);
      Point z = algebra.MinvRow(p);
      if (k > 0) {
        Point rhs(k);
        for (Eigen::Index i = 0; i < k; ++i) {
          rhs(i) = cons.a.row(working[i]).dot(algebra.MinvRow(p));
        }
        r = CholeskyFactor(algebra.Schur(working)).Solve(rhs);
        for (Eigen::Index i = 0; i < k; ++i) {
          z -= r(i) * algebra.MinvRow(working[i]);
        }
      }
      const double az = ap.dot(z);
      const bool dependent = az <= kDependenceTol * ap_minv_ap;

      // Largest dual step before some working multiplier reaches zero.
      double t_dual = kInf;
      Eigen::Index blocking = -1;
      for (Eigen::Index i = 0; i < k; ++i) {
        if (r(i) <= 0.0) continue;
        const double ratio = mu_full(working[i]) / r(i);
        if (ratio < t_dual ||
            (ratio == t_dual && working[i] < working[blocking])) {
          t_dual = ratio;
          blocking = i;
        }
      }

      double t_primal = kInf;
      if (!dependent) {
        t_primal = std::max(0.0, ap.dot(y) - cons.b(p)) / az;
      } else if (blocking < 0) {
        throw Error(ErrorCode::kInfeasibleSet,
                    fmt::format("constraint {} cannot be satisfied together "
                                "with the working set",
                                p));
      }

      const double t = std::min(t_primal, t_dual);
      if (!dependent) y -= t * z;
      for (Eigen::Index i = 0; i < k; ++i) mu_full(working[i]) -= t * r(i);
      mu_p += t;

      if (t_primal <= t_dual) {
        mu_full(p) = mu_p;
        working.push_back(p);
        break;
      }
      mu_full(working[blocking]) = 0.0;
      working.erase(working.begin() + blocking);
    }
  }

  // Re-derive the iterate from the final working set to shed accumulated
  // step roundoff.
  if (!working.empty()) {
    if (auto eq = algebra.EqualityMinimizer(working, minv_c);
        eq && eq->second.minCoeff() >= -1e-10) {
      y = eq->first;
      mu_full.setZero();
      for (std::size_t i = 0; i < working.size(); ++i) {
        mu_full(working[i]) =
            std::max(0.0, eq->second(static_cast<Eigen::Index>(i)));
      }
    }
  }

  last_active_ = working;
  last_rows_ = rows;
  last_cols_ = n;

  QpSolution out;
  out.y = std::move(y);
  out.multipliers = std::move(mu_full);
  out.active = std::move(working);
  std::sort(out.active.begin(), out.active.end());
  out.iterations = iterations;
  return out;
}

}  // namespace ephybrid
