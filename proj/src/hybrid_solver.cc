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

#include "ephybrid/hybrid_solver.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

namespace ephybrid {

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

bool InCut(const Cut& cut, const Point& z, double tol) {
  return !cut || Contains(*cut, z, tol);
}

Point ProjectOntoCuts(const Point& x0, const std::vector<Cut>& cuts,
                      ActiveSetQpSolver* solver) {
  std::vector<Halfspace> present;
  for (const Cut& c : cuts) {
    if (c) present.push_back(*c);
  }
  if (present.empty()) return x0;
  const Polyhedron omega = Polyhedron::Create(std::move(present));
  return solver ? ProjectPolyhedron(x0, omega, *solver)
                : ProjectPolyhedron(x0, omega);
}

std::optional<Point> Target(const ProblemBundle& bundle,
                            const StoppingRule& stopping) {
  if (stopping.target) return stopping.target;
  return bundle.known_solution;
}

void CheckStartingPoints(const ProblemBundle& bundle, const Point& x0,
                         const Point* y0) {
  CheckConsistent(bundle);
  const int n = bundle.dim();
  if (x0.size() != n || (y0 && y0->size() != n)) {
    throw Error(ErrorCode::kDimensionMismatch,
                fmt::format("starting points must live in R^{}", n));
  }
  RequireFinite(x0, "x0");
  if (y0) RequireFinite(*y0, "y0");
}

void CheckStopping(const StoppingRule& stopping,
                   const std::optional<Point>& target, int dim) {
  if (!(stopping.tol > 0.0)) {
    throw Error(ErrorCode::kValidationError, "stopping tolerance must be > 0");
  }
  if (stopping.max_iter < 1) {
    throw Error(ErrorCode::kValidationError, "max_iter must be >= 1");
  }
  if (stopping.kind == StopKind::kDistanceToKnown) {
    if (!target) {
      throw Error(ErrorCode::kValidationError,
                  "distance stopping rule needs a known solution");
    }
    if (target->size() != dim) {
      throw Error(ErrorCode::kDimensionMismatch, "target has wrong dimension");
    }
  }
}

}  // namespace

std::string AlphaSchedule::Label() const {
  switch (kind) {
    case AlphaKind::kConstant: return fmt::format("constant({})", value);
    case AlphaKind::kAnhRatio: return "anh_ratio";
    case AlphaKind::kPow10: return "pow10";
    case AlphaKind::kInvLog: return "invlog";
  }
  return "unknown";
}

AlphaSchedule AlphaSchedule::Parse(const std::string& text) {
  if (text == "anh_ratio") return AnhRatio();
  if (text == "pow10") return Pow10();
  if (text == "invlog") return InvLog();
  std::string number;
  if (text.rfind("constant:", 0) == 0) {
    number = text.substr(9);
  } else if (text.rfind("constant(", 0) == 0 && text.back() == ')') {
    number = text.substr(9, text.size() - 10);
  } else {
    throw Error(ErrorCode::kParseError,
                fmt::format("unknown alpha schedule '{}'", text));
  }
  char* end = nullptr;
  const double v = std::strtod(number.c_str(), &end);
  if (number.empty() || end != number.c_str() + number.size()) {
    throw Error(ErrorCode::kParseError,
                fmt::format("bad constant in alpha schedule '{}'", text));
  }
  return Constant(v);
}

HybridParams ValidateParams(double lambda, double k, AlphaSchedule schedule,
                            const LipschitzConstants& constants,
                            double alpha_cap) {
  const double c_sum = constants.c1 + constants.c2;
  if (!(c_sum > 0.0)) {
    throw Error(ErrorCode::kDegenerateConstants, "c1 + c2 must be positive");
  }
  const double lambda_bound = 1.0 / (2.0 * c_sum);
  if (!(lambda > 0.0 && lambda < lambda_bound)) {
    throw Error(ErrorCode::kLambdaOutOfRange,
                fmt::format("lambda = {} must lie in (0, {})", lambda,
                            lambda_bound));
  }
  HybridParams params;
  params.lambda = lambda;
  params.step_bound = 2.0 * lambda * c_sum;
  params.min_k = 1.0 / (1.0 - params.step_bound);
  if (!(k > params.min_k) || !std::isfinite(k)) {
    throw Error(ErrorCode::kKTooSmall,
                fmt::format("k = {} must exceed {}", k, params.min_k));
  }
  params.k = k;
  if (!(alpha_cap > 0.0 && alpha_cap < 1.0)) {
    throw Error(ErrorCode::kAlphaOutOfRange,
                fmt::format("alpha cap {} must lie in (0, 1)", alpha_cap));
  }
  if (schedule.kind == AlphaKind::kConstant &&
      !(schedule.value >= 0.0 && schedule.value <= alpha_cap)) {
    throw Error(ErrorCode::kAlphaOutOfRange,
                fmt::format("constant alpha {} must lie in [0, {}]",
                            schedule.value, alpha_cap));
  }
  params.alpha_cap = alpha_cap;
  params.alpha_schedule = schedule;
  return params;
}

double AlphaRaw(const AlphaSchedule& schedule, int n) {
  const double dn = static_cast<double>(n);
  switch (schedule.kind) {
    case AlphaKind::kConstant: return schedule.value;
    case AlphaKind::kAnhRatio: return (dn - 1.0) / (2.0 * (dn + 1.0));
    case AlphaKind::kPow10: return std::pow(10.0, -dn);
    case AlphaKind::kInvLog: return 1.0 / std::log10(dn + 1.0);
  }
  return 0.0;
}

double AlphaAt(const AlphaSchedule& schedule, int n, double cap) {
  return std::clamp(AlphaRaw(schedule, n), 0.0, cap);
}

SolverState SolverState::Initial(const Point& x0, const Point& y0) {
  return SolverState{1, x0, x0, x0, y0, y0};
}

double ComputeEpsilon(const SolverState& state, const Point& y_next,
                      const HybridParams& params,
                      const LipschitzConstants& constants) {
  const bool step2 = params.epsilon_convention == EpsilonConvention::kStep2;
  const double c_lag = step2 ? constants.c2 : constants.c1;
  const double c_lead = step2 ? constants.c1 : constants.c2;
  const double lam = params.lambda;
  return params.k * (state.x_cur - state.x_prev).squaredNorm() +
         2.0 * lam * c_lag * (state.y_cur - state.y_prev).squaredNorm() -
         (1.0 - 1.0 / params.k - 2.0 * lam * c_lead) *
             (y_next - state.y_cur).squaredNorm();
}

Cut BuildDistanceCut(const Point& far, const Point& near, double epsilon) {
  RequireSameDimension(far, near, "BuildDistanceCut");
  Point normal = 2.0 * (near - far);
  const double offset = near.squaredNorm() - far.squaredNorm() + epsilon;
  if (normal.isZero(0.0)) {
    if (epsilon >= 0.0) return std::nullopt;
    throw Error(ErrorCode::kEmptyHalfspace,
                fmt::format("coincident points with eps = {}", epsilon));
  }
  return Halfspace{std::move(normal), offset};
}

Cut BuildCn(const Point& x_cur, const Point& w_next, double epsilon) {
  return BuildDistanceCut(w_next, x_cur, epsilon);
}

Cut BuildQn(const Point& x0, const Point& x_cur) {
  RequireSameDimension(x0, x_cur, "BuildQn");
  Point normal = x0 - x_cur;
  if (normal.isZero(0.0)) return std::nullopt;
  const double offset = normal.dot(x_cur);
  return Halfspace{std::move(normal), offset};
}

std::pair<SolverState, IterationRecord> HybridIterate(
    const SolverState& state, const ProblemBundle& bundle,
    const HybridParams& params, ProxSolver& prox) {
  IterationRecord rec;
  rec.n = state.n;
  rec.x_cur = state.x_cur;

  // Step 1.
  rec.y_next = prox.Step(bundle.bifunction, state.y_cur, state.x_cur,
                         params.lambda, bundle.feasible);
  const double raw_alpha = AlphaRaw(params.alpha_schedule, state.n);
  rec.alpha = std::clamp(raw_alpha, 0.0, params.alpha_cap);
  rec.alpha_clamped = rec.alpha != raw_alpha;
  rec.s_of_y = ApplyMapping(bundle.mapping, rec.y_next);
  // alpha y + (1 - alpha) S y, written so that S y == y gives z == y exactly.
  rec.z_next = rec.y_next + (1.0 - rec.alpha) * (rec.s_of_y - rec.y_next);

  // Step 2.
  const bool y_farther = (rec.y_next - state.x_cur).squaredNorm() >=
                         (rec.z_next - state.x_cur).squaredNorm();
  rec.w_next = y_farther ? rec.y_next : rec.z_next;
  rec.residual_w = (rec.w_next - state.x_cur).norm();
  rec.epsilon = ComputeEpsilon(state, rec.y_next, params, bundle.constants);

  try {
    rec.qn = BuildQn(state.x0, state.x_cur);
    if (params.omega_variant == OmegaVariant::kTwoSets) {
      rec.cn = BuildCn(state.x_cur, rec.w_next, rec.epsilon);
      rec.x_next = ProjectTwoHalfspaces(state.x0, rec.cn, rec.qn);
      if (params.cross_check_projection) {
        const Point via_qp = ProjectOntoCuts(state.x0, {rec.cn, rec.qn}, nullptr);
        rec.projection_ok =
            (via_qp - rec.x_next).norm() <= kProjectionAgreementTol;
      }
    } else {
      rec.cn_aux = BuildDistanceCut(rec.z_next, rec.y_next, 0.0);
      rec.cn = BuildDistanceCut(rec.y_next, state.x_cur, rec.epsilon);
      rec.x_next = ProjectOntoCuts(state.x0, {rec.cn_aux, rec.cn, rec.qn}, nullptr);
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kEmptyIntersection ||
        e.code() == ErrorCode::kInfeasibleSet ||
        e.code() == ErrorCode::kEmptyHalfspace) {
      throw Error(ErrorCode::kEmptyOmega,
                  fmt::format("iteration {}: {}", state.n, e.what()));
    }
    throw;
  }

  rec.membership_ok = InCut(rec.cn, rec.x_next, kCutMembershipTol) &&
                      InCut(rec.cn_aux, rec.x_next, kCutMembershipTol) &&
                      InCut(rec.qn, rec.x_next, kCutMembershipTol);
  rec.fejer_ok = (rec.x_next - state.x0).norm() >=
                 (state.x_cur - state.x0).norm() - kFejerTol;
  if (bundle.known_solution) {
    const Point& xs = *bundle.known_solution;
    rec.dist_to_target = (rec.x_next - xs).norm();
    rec.distance_slack = (state.x_cur - xs).squaredNorm() + rec.epsilon -
                      (rec.w_next - xs).squaredNorm();
    rec.distance_ok = *rec.distance_slack >= -kDistanceSlackTol;
    rec.membership_ok = rec.membership_ok &&
                        InCut(rec.cn, xs, kSolutionMembershipTol) &&
                        InCut(rec.cn_aux, xs, kSolutionMembershipTol) &&
                        InCut(rec.qn, xs, kSolutionMembershipTol);
  }

  SolverState next{state.n + 1, state.x0,     state.x_cur,
                   rec.x_next,  state.y_cur, rec.y_next};
  return {std::move(next), std::move(rec)};
}

std::pair<SolverState, IterationRecord> HybridIterate(
    const SolverState& state, const ProblemBundle& bundle,
    const HybridParams& params) {
  ProxSolver prox;
  return HybridIterate(state, bundle, params, prox);
}

std::string_view StopReasonName(StopReason reason) {
  switch (reason) {
    case StopReason::kResidualW: return "ResidualW";
    case StopReason::kDistanceToKnown: return "DistanceToKnown";
    case StopReason::kMaxIter: return "MaxIter";
  }
  return "Unknown";
}

MaxIterExceeded::MaxIterExceeded(RunReport report)
    : Error(ErrorCode::kMaxIterExceeded,
            fmt::format("stopping rule not met after {} iterations",
                        report.iterations)),
      report_(std::move(report)) {}

RunReport Solve(const ProblemBundle& bundle, const HybridParams& params,
                const StoppingRule& stopping, const Point& x0, const Point& y0) {
  CheckStartingPoints(bundle, x0, &y0);
  const std::optional<Point> target = Target(bundle, stopping);
  CheckStopping(stopping, target, bundle.dim());
  if (params.strict_seeding && !Contains(bundle.feasible, y0)) {
    throw Error(ErrorCode::kSeedOutsideSet, "y0 is not in C");
  }

  RunReport report;
  ProxSolver prox;
  SolverState state = SolverState::Initial(x0, y0);
  const auto start = Clock::now();
  for (int it = 1; it <= stopping.max_iter; ++it) {
    auto [next, rec] = HybridIterate(state, bundle, params, prox);
    if (stopping.target) rec.dist_to_target = (rec.x_next - *target).norm();
    report.iterations = it;
    if (rec.alpha_clamped) ++report.alpha_clamped_iterations;
    state = std::move(next);

    std::optional<StopReason> stop;
    if (stopping.kind == StopKind::kResidualW && rec.residual_w <= stopping.tol) {
      stop = StopReason::kResidualW;
      report.final_x = rec.x_cur;
    } else if (stopping.kind == StopKind::kDistanceToKnown &&
               *rec.dist_to_target <= stopping.tol) {
      stop = StopReason::kDistanceToKnown;
      report.final_x = rec.x_next;
    }
    report.trace.push_back(std::move(rec));
    if (stop) {
      report.stop_reason = *stop;
      report.elapsed_s = Seconds(start);
      return report;
    }
  }
  report.elapsed_s = Seconds(start);
  report.final_x = state.x_cur;
  report.stop_reason = StopReason::kMaxIter;
  throw MaxIterExceeded(std::move(report));
}

RunReport ExtragradientSolve(const ProblemBundle& bundle, double lambda,
                             const StoppingRule& stopping, const Point& x0) {
  CheckStartingPoints(bundle, x0, nullptr);
  const std::optional<Point> target = Target(bundle, stopping);
  CheckStopping(stopping, target, bundle.dim());
  const double bound =
      1.0 / (2.0 * (bundle.constants.c1 + bundle.constants.c2));
  if (!(lambda > 0.0 && lambda < bound)) {
    throw Error(ErrorCode::kLambdaOutOfRange,
                fmt::format("lambda = {} must lie in (0, {})", lambda, bound));
  }

  RunReport report;
  // Separate solvers so each keeps the warm start of its own subproblem.
  ProxSolver predictor;
  ProxSolver corrector;
  Point x = x0;
  const auto start = Clock::now();
  for (int it = 1; it <= stopping.max_iter; ++it) {
    IterationRecord rec;
    rec.n = it;
    rec.x_cur = x;
    rec.y_next = predictor.Step(bundle.bifunction, x, x, lambda, bundle.feasible);
    rec.s_of_y = rec.y_next;
    rec.z_next = rec.y_next;
    rec.w_next = rec.y_next;
    rec.residual_w = (rec.y_next - x).norm();
    rec.x_next =
        corrector.Step(bundle.bifunction, rec.y_next, x, lambda, bundle.feasible);
    if (target) rec.dist_to_target = (rec.x_next - *target).norm();
    report.iterations = it;

    std::optional<StopReason> stop;
    if (stopping.kind == StopKind::kResidualW && rec.residual_w <= stopping.tol) {
      stop = StopReason::kResidualW;
      report.final_x = x;
    } else if (stopping.kind == StopKind::kDistanceToKnown &&
               *rec.dist_to_target <= stopping.tol) {
      stop = StopReason::kDistanceToKnown;
      report.final_x = rec.x_next;
    }
    x = rec.x_next;
    report.trace.push_back(std::move(rec));
    if (stop) {
      report.stop_reason = *stop;
      report.elapsed_s = Seconds(start);
      return report;
    }
  }
  report.elapsed_s = Seconds(start);
  report.final_x = x;
  report.stop_reason = StopReason::kMaxIter;
  throw MaxIterExceeded(std::move(report));
}

}  // namespace ephybrid
