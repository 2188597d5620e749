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

#include <cmath>

#include <fmt/format.h>

namespace ephybrid {

QpInstance ReduceProxToQp(const QuadraticBifunction& f, const Point& v,
                          const Point& x, double lambda, const ConvexSet& c) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kNonPositiveLambda,
                fmt::format("lambda = {} must be positive", lambda));
  }
  const int n = f.dim();
  if (v.size() != n || x.size() != n || Dimension(c) != n) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("prox program in R^{} given v in R^{}, x in R^{}, "
                            "C in R^{}",
                            n, v.size(), x.size(), Dimension(c)));
  }
  const DenseMatrix& q = f.q();
  DenseMatrix m = lambda * (q + q.transpose());
  m.diagonal().array() += 1.0;
  Point lin = lambda * (f.p() * v + f.linear() - q.transpose() * v) - x;
  return QpInstance{std::move(m), std::move(lin), c};
}

QpSolution SolveQpActiveSet(const QpInstance& qp, ActiveSetQpSolver& solver) {
  return solver.Solve(qp.m, qp.c, ToLinearConstraints(qp.feasible));
}

Point SolveQpActiveSet(const QpInstance& qp) {
  ActiveSetQpSolver solver(ActiveSetQpSolver::Options{.warm_start = false});
  return SolveQpActiveSet(qp, solver).y;
}

double ProxObjective(const QuadraticBifunction& f, const Point& v,
                     const Point& x, double lambda, const Point& y) {
  return lambda * f.Evaluate(v, y) + 0.5 * (x - y).squaredNorm();
}

Point ProxSolver::Step(const QuadraticBifunction& f, const Point& v,
                       const Point& x, double lambda, const ConvexSet& c) {
  return SolveQpActiveSet(ReduceProxToQp(f, v, x, lambda, c), qp_).y;
}

Point ProxStep(const QuadraticBifunction& f, const Point& v, const Point& x,
               double lambda, const ConvexSet& c) {
  ProxSolver solver(ActiveSetQpSolver::Options{.warm_start = false});
  return solver.Step(f, v, x, lambda, c);
}

}  // namespace ephybrid
