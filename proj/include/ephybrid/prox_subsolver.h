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

// Exact solution of the strongly convex prox program
//
//   argmin_{y in C}  lambda f(v, y) + 1/2 ||x - y||^2
//
// for quadratic bifunctions. Expanding f(v, y) = <P v + Q y + q, y - v> gives
// lambda y^T Q y + lambda <P v + q - Q^T v, y> + const, so the program is the
// QP with M = lambda (Q + Q^T) + I and c = lambda (P v + q - Q^T v) - x.

#ifndef EPHYBRID_PROX_SUBSOLVER_H_
#define EPHYBRID_PROX_SUBSOLVER_H_

#include "ephybrid/active_set_qp.h"
#include "ephybrid/convex_sets.h"
#include "ephybrid/problems.h"

namespace ephybrid {

// minimize 1/2 y^T m y + <c, y> over `feasible`.
struct QpInstance {
  DenseMatrix m;
  Point c;
  ConvexSet feasible;

  double Objective(const Point& y) const { return 0.5 * y.dot(m * y) + c.dot(y); }
};

// Throws kNonPositiveLambda, kDimensionMismatch.
QpInstance ReduceProxToQp(const QuadraticBifunction& f, const Point& v,
                          const Point& x, double lambda, const ConvexSet& c);

// Unique minimizer of `qp` (throws kNotSpd, kInfeasibleSet, kCyclingDetected).
Point SolveQpActiveSet(const QpInstance& qp);
QpSolution SolveQpActiveSet(const QpInstance& qp, ActiveSetQpSolver& solver);

// lambda f(v, y) + 1/2 ||x - y||^2.
double ProxObjective(const QuadraticBifunction& f, const Point& v,
                     const Point& x, double lambda, const Point& y);

// Carries a warm-started QP solver across consecutive prox steps.
class ProxSolver {
 public:
  ProxSolver() = default;
  explicit ProxSolver(ActiveSetQpSolver::Options options) : qp_(options) {}

  Point Step(const QuadraticBifunction& f, const Point& v, const Point& x,
             double lambda, const ConvexSet& c);

 private:
  ActiveSetQpSolver qp_;
};

Point ProxStep(const QuadraticBifunction& f, const Point& v, const Point& x,
               double lambda, const ConvexSet& c);

}  // namespace ephybrid

#endif  // EPHYBRID_PROX_SUBSOLVER_H_
