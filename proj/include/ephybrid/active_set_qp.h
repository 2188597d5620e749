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

// Dense dual active-set solver for strictly convex inequality-constrained QPs
//
//   minimize    1/2 y^T M y + c^T y
//   subject to  A y <= b
//
// The method starts from a dual feasible point (the unconstrained minimizer,
// or the minimizer over the previous call's active set) and adds the most
// violated constraint at each major step, dropping constraints whose
// multipliers reach zero along the way. Every iterate is dual feasible, so
// the first primal feasible iterate is optimal, and an added constraint that
// is linearly dependent on the working set with no multiplier to release
// certifies infeasibility.

#ifndef EPHYBRID_ACTIVE_SET_QP_H_
#define EPHYBRID_ACTIVE_SET_QP_H_

#include <vector>

#include "ephybrid/core.h"

namespace ephybrid {

// Rows of `a` are constraint normals: a.row(i) . y <= b(i).
struct LinearConstraints {
  DenseMatrix a;
  Point b;

  int count() const { return static_cast<int>(b.size()); }
};

struct QpSolution {
  Point y;
  // One entry per constraint row, zero for inactive rows.
  Point multipliers;
  std::vector<int> active;
  int iterations = 0;
};

struct KktResiduals {
  double stationarity = 0.0;     // ||M y + c + A^T mu||
  double min_multiplier = 0.0;   // min_i mu_i (0 when there are no rows)
  double complementarity = 0.0;  // max_i |mu_i (a_i . y - b_i)|
  double primal_violation = 0.0; // max_i max(0, a_i . y - b_i)
};

KktResiduals ComputeKktResiduals(const DenseMatrix& m, const Point& c,
                                 const LinearConstraints& constraints,
                                 const QpSolution& solution);

// One instance per thread. The instance remembers the last active set and
// reuses it as the starting working set when the next problem has the same
// shape; the minimizer is unique so this only affects cost.
class ActiveSetQpSolver {
 public:
  struct Options {
    bool warm_start = true;
  };

  ActiveSetQpSolver() = default;
  explicit ActiveSetQpSolver(Options options) : options_(options) {}

  // Throws kNotSpd, kDimensionMismatch, kInfeasibleSet, kCyclingDetected.
  QpSolution Solve(const DenseMatrix& m, const Point& c,
                   const LinearConstraints& constraints);

  void ResetWarmStart() { last_active_.clear(); }

 private:
  Options options_;
  std::vector<int> last_active_;
  Eigen::Index last_rows_ = -1;
  Eigen::Index last_cols_ = -1;
};

}  // namespace ephybrid

#endif  // EPHYBRID_ACTIVE_SET_QP_H_
