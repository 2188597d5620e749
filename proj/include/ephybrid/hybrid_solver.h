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

// Hybrid outer-approximation method for EP(f, C) n F(S).
//
// Each iteration solves one prox program
//
//   y_{n+1} = argmin_{y in C} lambda f(y_n, y) + 1/2 ||x_n - y||^2,
//   z_{n+1} = alpha_n y_{n+1} + (1 - alpha_n) S y_{n+1},
//
// picks w_{n+1} as whichever of y_{n+1}, z_{n+1} is farther from x_n (ties go
// to y_{n+1}), and sets x_{n+1} to the projection of x_0 onto the intersection
// of the two cuts
//
//   C_n = {z : ||w_{n+1} - z||^2 <= ||x_n - z||^2 + eps_n},
//   Q_n = {z : <x_0 - x_n, z - x_n> <= 0},
//
// with eps_n = k ||x_n - x_{n-1}||^2 + 2 lambda c2 ||y_n - y_{n-1}||^2
//              - (1 - 1/k - 2 lambda c1) ||y_{n+1} - y_n||^2.
//
// Every point of EP(f, C) n F(S) lies in both cuts, so ||x_n - x_0|| is
// nondecreasing and bounded and the iterates converge to the projection of
// x_0 onto the solution set. The module also provides the classical two-step
// extragradient iteration as an independent reference solver.

#ifndef EPHYBRID_HYBRID_SOLVER_H_
#define EPHYBRID_HYBRID_SOLVER_H_

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ephybrid/convex_sets.h"
#include "ephybrid/problems.h"
#include "ephybrid/prox_subsolver.h"

namespace ephybrid {

enum class AlphaKind {
  kConstant,
  kAnhRatio,  // (n - 1) / (2 (n + 1))
  kPow10,     // 10^-n
  kInvLog,    // 1 / log10(n + 1)
};

struct AlphaSchedule {
  AlphaKind kind = AlphaKind::kConstant;
  double value = 0.0;  // kConstant only

  static AlphaSchedule Constant(double value) {
    return {AlphaKind::kConstant, value};
  }
  static AlphaSchedule AnhRatio() { return {AlphaKind::kAnhRatio, 0.0}; }
  static AlphaSchedule Pow10() { return {AlphaKind::kPow10, 0.0}; }
  static AlphaSchedule InvLog() { return {AlphaKind::kInvLog, 0.0}; }

  // "constant(0.5)", "anh_ratio", "pow10", "invlog".
  std::string Label() const;
  // Accepts the labels above and "constant:<value>". Throws kParseError.
  static AlphaSchedule Parse(const std::string& text);

  friend bool operator==(const AlphaSchedule&, const AlphaSchedule&) = default;
};

enum class EpsilonConvention {
  kStep2,  // coefficients 2 lambda c2 and (1 - 1/k - 2 lambda c1)
  kProof,  // c1 and c2 swapped; identical whenever c1 == c2
};

enum class OmegaVariant {
  kTwoSets,    // C_n n Q_n, projected in closed form
  kThreeSets,  // C_n^1 n C_n^2 n Q_n, projected through the QP
};

inline constexpr double kDefaultAlphaCap = 0.99;

struct HybridParams {
  double lambda = 0.0;
  double k = 0.0;
  AlphaSchedule alpha_schedule;
  double alpha_cap = kDefaultAlphaCap;
  EpsilonConvention epsilon_convention = EpsilonConvention::kStep2;
  OmegaVariant omega_variant = OmegaVariant::kTwoSets;
  // Reject a y_0 outside C instead of accepting it as a seed.
  bool strict_seeding = false;
  // Recompute every two-cut projection through the QP and flag disagreement.
  bool cross_check_projection = false;

  // Derived by ValidateParams.
  double step_bound = 0.0;  // 2 lambda (c1 + c2), < 1
  double min_k = 0.0;       // 1 / (1 - step_bound)
};

// Requires 0 < lambda < 1 / (2 (c1 + c2)), k > 1 / (1 - 2 lambda (c1 + c2)),
// alpha_cap in (0, 1) and a constant schedule value in [0, alpha_cap].
// Throws kLambdaOutOfRange, kKTooSmall, kAlphaOutOfRange.
HybridParams ValidateParams(double lambda, double k, AlphaSchedule schedule,
                            const LipschitzConstants& constants,
                            double alpha_cap = kDefaultAlphaCap);

// Unclamped schedule value for n >= 1.
double AlphaRaw(const AlphaSchedule& schedule, int n);
// Schedule value clamped into [0, cap].
double AlphaAt(const AlphaSchedule& schedule, int n, double cap = kDefaultAlphaCap);

// Rolling window of the last two x and y iterates.
struct SolverState {
  int n = 1;
  Point x0;
  Point x_prev;
  Point x_cur;
  Point y_prev;
  Point y_cur;

  // x_1 = x_0, y_1 = y_0.
  static SolverState Initial(const Point& x0, const Point& y0);
};

double ComputeEpsilon(const SolverState& state, const Point& y_next,
                      const HybridParams& params,
                      const LipschitzConstants& constants);

// {z : ||far - z||^2 <= ||near - z||^2 + eps} written as the halfspace
// 2 <near - far, z> <= ||near||^2 - ||far||^2 + eps. A zero normal gives the
// whole space for eps >= 0 and throws kEmptyHalfspace otherwise.
Cut BuildDistanceCut(const Point& far, const Point& near, double epsilon);

// C_n.
Cut BuildCn(const Point& x_cur, const Point& w_next, double epsilon);
// Q_n; the whole space when x_0 == x_n.
Cut BuildQn(const Point& x0, const Point& x_cur);

struct IterationRecord {
  int n = 0;
  Point x_cur;   // x_n
  Point y_next;  // y_{n+1}
  Point s_of_y;  // S y_{n+1}
  Point z_next;  // z_{n+1}
  Point w_next;  // w_{n+1}
  Point x_next;  // x_{n+1}
  double alpha = 0.0;
  bool alpha_clamped = false;
  double epsilon = 0.0;
  double residual_w = 0.0;  // ||w_{n+1} - x_n||
  std::optional<double> dist_to_target;  // ||x_{n+1} - x*||
  Cut cn;      // C_n (two sets) or C_n^2 (three sets)
  Cut cn_aux;  // C_n^1, three sets only
  Cut qn;
  // ||x_n - x*||^2 + eps_n - ||w_{n+1} - x*||^2, when x* is known.
  std::optional<double> distance_slack;
  bool distance_ok = true;
  bool fejer_ok = true;
  bool membership_ok = true;
  bool projection_ok = true;
};

// Tolerances of the per-iteration certificates.
inline constexpr double kDistanceSlackTol = 1e-8;
inline constexpr double kFejerTol = 1e-10;
inline constexpr double kCutMembershipTol = 1e-9;
inline constexpr double kSolutionMembershipTol = 1e-8;
inline constexpr double kProjectionAgreementTol = 1e-8;

// One outer iteration. Throws kEmptyOmega when the cuts do not intersect.
std::pair<SolverState, IterationRecord> HybridIterate(
    const SolverState& state, const ProblemBundle& bundle,
    const HybridParams& params, ProxSolver& prox);
std::pair<SolverState, IterationRecord> HybridIterate(
    const SolverState& state, const ProblemBundle& bundle,
    const HybridParams& params);

enum class StopKind {
  kResidualW,        // ||w_{n+1} - x_n|| <= tol (||y_n - x_n|| for extragradient)
  kDistanceToKnown,  // ||x_{n+1} - x*|| <= tol
};

enum class StopReason { kResidualW, kDistanceToKnown, kMaxIter };

std::string_view StopReasonName(StopReason reason);

inline constexpr int kDefaultMaxIter = 10000;

struct StoppingRule {
  StopKind kind = StopKind::kResidualW;
  double tol = 1e-4;
  int max_iter = kDefaultMaxIter;
  // Overrides the bundle's known solution for kDistanceToKnown.
  std::optional<Point> target;
};

struct RunReport {
  int iterations = 0;
  Point final_x;
  double elapsed_s = 0.0;
  StopReason stop_reason = StopReason::kMaxIter;
  int alpha_clamped_iterations = 0;
  std::vector<IterationRecord> trace;
};

// Carries the partial report of a run that hit max_iter.
class MaxIterExceeded : public Error {
 public:
  explicit MaxIterExceeded(RunReport report);

  const RunReport& report() const { return report_; }

 private:
  RunReport report_;
};

// Runs HybridIterate from x_1 = x_0, y_1 = y_0 until the stopping rule holds.
// For kResidualW the reported point is the x_n that met the test; for
// kDistanceToKnown it is x_{n+1}.
RunReport Solve(const ProblemBundle& bundle, const HybridParams& params,
                const StoppingRule& stopping, const Point& x0, const Point& y0);

// Two-step extragradient iteration
//   y_n     = argmin_{y in C} lambda f(x_n, y) + 1/2 ||x_n - y||^2,
//   x_{n+1} = argmin_{y in C} lambda f(y_n, y) + 1/2 ||x_n - y||^2.
// Requires 0 < lambda < 1 / (2 (c1 + c2)) (kLambdaOutOfRange). Trace records
// carry y_n in the y/z/w slots and ||y_n - x_n|| as residual_w.
RunReport ExtragradientSolve(const ProblemBundle& bundle, double lambda,
                             const StoppingRule& stopping, const Point& x0);

}  // namespace ephybrid

#endif  // EPHYBRID_HYBRID_SOLVER_H_
