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

#include "ephybrid/bench.h"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>

namespace ephybrid {

namespace {

[[noreturn]] void FailField(std::string_view field, std::string_view what) {
  throw Error(ErrorCode::kParseError, fmt::format("field '{}': {}", field, what));
}

template <class T>
T Get(const Json& j, const char* key, T fallback, std::string_view field) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const Json::exception&) {
    FailField(fmt::format("{}.{}", field, key), "wrong type");
  }
}

double GetNumber(const Json& j, const char* key, double fallback,
                 std::string_view field) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_number()) FailField(fmt::format("{}.{}", field, key), "expected a number");
  return it->get<double>();
}

int MaxThreads() {
  int limit = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("EPHYBRID_MAX_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) limit = v;
  }
  return std::max(limit, 1);
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, fmt::format("cannot open '{}'", path));
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, fmt::format("write to '{}' failed", path));
}

StopReason ParseStopReason(const std::string& s) {
  if (s == "ResidualW") return StopReason::kResidualW;
  if (s == "DistanceToKnown") return StopReason::kDistanceToKnown;
  if (s == "MaxIter") return StopReason::kMaxIter;
  throw Error(ErrorCode::kParseError, fmt::format("unknown stop reason '{}'", s));
}

}  // namespace

DenseMatrix NashCournotP() {
  DenseMatrix p(3, 3);
  p << 3.1, 2.0, 0.0,
       2.0, 3.6, 0.0,
       0.0, 0.0, 3.5;
  return p;
}

DenseMatrix NashCournotQ() {
  DenseMatrix q(3, 3);
  q << 1.6, 1.0, 0.0,
       1.0, 1.6, 0.0,
       0.0, 0.0, 1.5;
  return q;
}

ProblemBundle BuiltinExample1() {
  const DenseMatrix p = NashCournotP();
  const DenseMatrix q = NashCournotQ();
  Polyhedron c = Polyhedron::Create(
      {Halfspace::GreaterEqual(Point::Ones(3), 1.0)}, Box::Uniform(3, 0.0, 1.0));
  return ProblemBundle{"example1",
                       QuadraticBifunction::NashCournot(p, q, Point{{1.0, -2.0, 3.0}}),
                       std::move(c),
                       IdentityMapping{},
                       NashCournotConstants(p, q),
                       std::nullopt};
}

ProblemBundle BuiltinExample2() {
  const DenseMatrix p = NashCournotP();
  const DenseMatrix q = NashCournotQ();
  const Box c = Box::Uniform(3, 0.0, 1.0);
  AveragedProjections s{
      c,
      {Halfspace::LessEqual(Point{{3.0, 2.0, 1.0}}, -6.0),
       Halfspace::LessEqual(Point{{5.0, 4.0, 3.0}}, -12.0),
       Halfspace::LessEqual(Point{{2.0, 1.0, 1.0}}, -4.0)}};
  return ProblemBundle{"example2",
                       QuadraticBifunction::NashCournot(p, q, Point::Zero(3)),
                       c,
                       std::move(s),
                       NashCournotConstants(p, q),
                       Point::Zero(3)};
}

ProblemBundle BuiltinProblem(std::string_view name) {
  if (name == "example1") return BuiltinExample1();
  if (name == "example2") return BuiltinExample2();
  throw Error(ErrorCode::kParseError,
              fmt::format("field 'problem': unknown builtin '{}'", name));
}

ExperimentConfig ParseConfig(const Json& j) {
  if (!j.is_object()) FailField("<root>", "expected an object");

  const Json& pj = j.contains("problem") ? j.at("problem") : Json();
  std::string label;
  std::optional<ProblemBundle> bundle;
  if (pj.is_string()) {
    label = pj.get<std::string>();
    bundle = BuiltinProblem(label);
  } else if (pj.is_object()) {
    bundle = ParseProblem(pj, "problem");
    label = bundle->name;
  } else {
    FailField("problem", "expected a builtin name or an inline problem");
  }
  ExperimentConfig cfg{label, std::move(*bundle), Algorithm::kHybrid, {}, {}, {}, {}, {}, {}, false};
  const ProblemBundle& problem = cfg.problem;
  const int dim = problem.dim();

  const std::string algorithm = Get<std::string>(j, "algorithm", "hybrid", "");
  if (algorithm == "hybrid") {
    cfg.algorithm = Algorithm::kHybrid;
  } else if (algorithm == "extragradient") {
    cfg.algorithm = Algorithm::kExtragradient;
  } else {
    FailField("algorithm", fmt::format("unknown algorithm '{}'", algorithm));
  }

  const Json params = j.value("params", Json::object());
  if (!params.is_object()) FailField("params", "expected an object");
  const double lambda =
      GetNumber(params, "lambda", 1.0 / (5.0 * problem.constants.c1), "params");
  const double k = GetNumber(params, "k", 6.0, "params");
  const double alpha_cap = GetNumber(params, "alpha_cap", kDefaultAlphaCap, "params");

  if (auto it = params.find("alpha_schedules"); it != params.end()) {
    if (!it->is_array()) FailField("params.alpha_schedules", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const Json& s = (*it)[i];
      if (!s.is_string()) {
        FailField(fmt::format("params.alpha_schedules[{}]", i), "expected a string");
      }
      try {
        cfg.schedules.push_back(AlphaSchedule::Parse(s.get<std::string>()));
      } catch (const Error& e) {
        FailField(fmt::format("params.alpha_schedules[{}]", i), e.what());
      }
    }
  } else if (std::holds_alternative<IdentityMapping>(problem.mapping)) {
    cfg.schedules = {AlphaSchedule::Constant(0.0)};
  } else {
    cfg.schedules = {AlphaSchedule::AnhRatio(), AlphaSchedule::Pow10(),
                     AlphaSchedule::InvLog()};
  }

  EpsilonConvention convention = EpsilonConvention::kStep2;
  const std::string conv = Get<std::string>(params, "epsilon_convention", "step2", "params");
  if (conv == "proof") {
    convention = EpsilonConvention::kProof;
  } else if (conv != "step2") {
    FailField("params.epsilon_convention", fmt::format("unknown convention '{}'", conv));
  }
  OmegaVariant omega = OmegaVariant::kTwoSets;
  const std::string variant = Get<std::string>(params, "omega_variant", "two_sets", "params");
  if (variant == "three_sets") {
    omega = OmegaVariant::kThreeSets;
  } else if (variant != "two_sets") {
    FailField("params.omega_variant", fmt::format("unknown variant '{}'", variant));
  }
  const bool strict = Get<bool>(params, "strict_seeding", false, "params");

  if (auto it = j.find("starts"); it != j.end()) {
    if (!it->is_array()) FailField("starts", "expected an array of points");
    for (std::size_t i = 0; i < it->size(); ++i) {
      cfg.starts.push_back(ParsePoint((*it)[i], fmt::format("starts[{}]", i)));
    }
  }
  cfg.y0 = j.contains("y0") ? ParsePoint(j.at("y0"), "y0") : Point::Zero(dim);

  const Json stopping = j.value("stopping", Json::object());
  const bool has_known = problem.known_solution.has_value();
  const std::string rule = Get<std::string>(
      stopping, "rule", has_known ? "distance_to_known" : "residual_w", "stopping");
  if (rule == "residual_w") {
    cfg.stopping.kind = StopKind::kResidualW;
  } else if (rule == "distance_to_known") {
    cfg.stopping.kind = StopKind::kDistanceToKnown;
  } else {
    FailField("stopping.rule", fmt::format("unknown rule '{}'", rule));
  }
  const bool distance = cfg.stopping.kind == StopKind::kDistanceToKnown;
  cfg.stopping.tol = GetNumber(stopping, "tol", distance ? 1e-3 : 1e-4, "stopping");
  cfg.stopping.max_iter = Get<int>(stopping, "max_iter", kDefaultMaxIter, "stopping");
  if (stopping.contains("target")) {
    cfg.stopping.target = ParsePoint(stopping.at("target"), "stopping.target");
  }

  const Json output = j.value("output", Json::object());
  cfg.output.csv = Get<std::string>(output, "csv", "", "output");
  cfg.output.json = Get<std::string>(output, "json", "", "output");
  cfg.output.trace_dir = Get<std::string>(output, "trace_dir", "", "output");
  cfg.audit = Get<bool>(j, "audit", false, "");

  // Semantic validation, collecting every violated condition.
  std::vector<std::string> problems;
  if (cfg.starts.empty()) problems.push_back("starts: at least one start is required");
  for (std::size_t i = 0; i < cfg.starts.size(); ++i) {
    if (cfg.starts[i].size() != dim) {
      problems.push_back(fmt::format("starts[{}]: expected {} coordinates", i, dim));
    }
  }
  if (cfg.y0.size() != dim) {
    problems.push_back(fmt::format("y0: expected {} coordinates", dim));
  } else if (strict && !Contains(problem.feasible, cfg.y0)) {
    problems.push_back("y0: outside C under strict seeding");
  }
  if (cfg.schedules.empty()) problems.push_back("params.alpha_schedules: empty");
  if (!(cfg.stopping.tol > 0.0)) problems.push_back("stopping.tol: must be > 0");
  if (cfg.stopping.max_iter < 1) problems.push_back("stopping.max_iter: must be >= 1");
  if (distance && !has_known && !cfg.stopping.target) {
    problems.push_back("stopping.rule: distance_to_known needs a known solution");
  }
  if (cfg.stopping.target && cfg.stopping.target->size() != dim) {
    problems.push_back(fmt::format("stopping.target: expected {} coordinates", dim));
  }

  const auto record = [&problems](const Error& e) {
    if (std::find(problems.begin(), problems.end(), e.what()) == problems.end()) {
      problems.push_back(e.what());
    }
  };
  if (cfg.algorithm == Algorithm::kHybrid) {
    for (const AlphaSchedule& s : cfg.schedules) {
      try {
        ValidateParams(lambda, k, s, problem.constants, alpha_cap);
      } catch (const Error& e) {
        record(e);
      }
    }
  } else {
    const double bound = 1.0 / (2.0 * (problem.constants.c1 + problem.constants.c2));
    if (!(lambda > 0.0 && lambda < bound)) {
      problems.push_back(fmt::format("LambdaOutOfRange: lambda = {} must lie in (0, {})",
                                     lambda, bound));
    }
  }
  if (!problems.empty()) {
    std::string joined;
    for (const std::string& p : problems) joined += fmt::format("\n  - {}", p);
    throw Error(ErrorCode::kValidationError,
                fmt::format("{} violated condition(s):{}", problems.size(), joined));
  }

  if (cfg.algorithm == Algorithm::kHybrid) {
    cfg.params = ValidateParams(lambda, k, cfg.schedules.front(),
                                problem.constants, alpha_cap);
  } else {
    cfg.params.lambda = lambda;
    cfg.params.k = k;
    cfg.params.alpha_schedule = cfg.schedules.front();
    cfg.params.alpha_cap = alpha_cap;
  }
  cfg.params.epsilon_convention = convention;
  cfg.params.omega_variant = omega;
  cfg.params.strict_seeding = strict;
  return cfg;
}

ExperimentConfig ParseConfigText(std::string_view text, std::string_view source) {
  return ParseConfig(ParseJsonText(text, source));
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, fmt::format("cannot read '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfigText(buffer.str(), path);
}

ExperimentConfig Table1Config() {
  return ParseConfig(Json{
      {"problem", "example1"},
      {"starts", {{1, 3, 1}, {-3, 4, 1}, {3, -2, 1}}},
      {"stopping", {{"rule", "residual_w"}, {"tol", 1e-4}}},
  });
}

ExperimentConfig Table2Config() {
  return ParseConfig(Json{
      {"problem", "example2"},
      {"params", {{"alpha_schedules", {"anh_ratio", "pow10", "invlog"}}}},
      {"starts", {{1, 3, 1}, {-3, 4, 1}, {3, -2, 1}, {-2, 3, -1}}},
      {"stopping", {{"rule", "distance_to_known"}, {"tol", 1e-3}}},
  });
}

bool ReportRow::SameOutcome(const ReportRow& other) const {
  return start == other.start && schedule == other.schedule &&
         iterations == other.iterations && final_x == other.final_x &&
         stop_reason == other.stop_reason;
}

std::vector<std::string> AuditViolations(const RunReport& report) {
  std::vector<std::string> out;
  for (const IterationRecord& r : report.trace) {
    if (!r.distance_ok) {
      out.push_back(fmt::format("n={}: ||w - x*||^2 <= ||x_n - x*||^2 + eps fails "
                                "by {:.3e}",
                                r.n, -r.distance_slack.value_or(0.0)));
    }
    if (!r.fejer_ok) out.push_back(fmt::format("n={}: ||x_n - x0|| decreased", r.n));
    if (!r.membership_ok) {
      out.push_back(fmt::format("n={}: cut membership violated", r.n));
    }
    if (!r.projection_ok) {
      out.push_back(fmt::format("n={}: closed-form and QP projections disagree", r.n));
    }
  }
  return out;
}

ExperimentResult RunExperiment(const ExperimentConfig& config) {
  struct Job {
    std::size_t start;
    std::size_t schedule;
  };
  std::vector<Job> jobs;
  const std::size_t per_start =
      config.algorithm == Algorithm::kHybrid ? config.schedules.size() : 1;
  for (std::size_t s = 0; s < config.starts.size(); ++s) {
    for (std::size_t a = 0; a < per_start; ++a) jobs.push_back({s, a});
  }

  ExperimentResult result;
  result.rows.resize(jobs.size());
  result.runs.resize(jobs.size());

  const auto run_job = [&](std::size_t i) {
    const Job& job = jobs[i];
    const Point& x0 = config.starts[job.start];
    HybridParams params = config.params;
    params.alpha_schedule = config.schedules[job.schedule];
    params.cross_check_projection = config.audit;
    RunReport report;
    try {
      report = config.algorithm == Algorithm::kHybrid
                   ? Solve(config.problem, params, config.stopping, x0, config.y0)
                   : ExtragradientSolve(config.problem, params.lambda,
                                        config.stopping, x0);
    } catch (const MaxIterExceeded& e) {
      report = e.report();
    }
    ReportRow& row = result.rows[i];
    row.start = x0;
    row.schedule = config.algorithm == Algorithm::kHybrid
                       ? params.alpha_schedule.Label()
                       : std::string("extragradient");
    row.iterations = report.iterations;
    row.elapsed_s = report.elapsed_s;
    row.final_x = report.final_x;
    row.stop_reason = report.stop_reason;
    result.runs[i] = std::move(report);
  };

  const int threads =
      std::min<int>(MaxThreads(), static_cast<int>(std::max<std::size_t>(jobs.size(), 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  const auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        run_job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  if (config.audit) {
    std::string details;
    int count = 0;
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
      for (const std::string& v : AuditViolations(result.runs[i])) {
        if (++count <= 20) {
          details += fmt::format("\n  start {} / {}: {}", FormatPoint(result.rows[i].start),
                                 result.rows[i].schedule, v);
        }
      }
    }
    if (count > 0) {
      throw Error(ErrorCode::kInvariantViolation,
                  fmt::format("{} certificate violation(s):{}", count, details));
    }
  }
  return result;
}

std::string FormatPoint(const Point& x) {
  std::string out = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i > 0) out += ';';
    // Avoid printing "-0.0000000".
    const double v = std::abs(x(i)) < 5e-8 ? 0.0 : x(i);
    out += fmt::format("{:.7f}", v);
  }
  return out + ")";
}

std::string RowsToCsv(const std::vector<ReportRow>& rows) {
  std::string out = "start,schedule,iterations,elapsed_s,final_x,stop_reason\n";
  for (const ReportRow& r : rows) {
    out += fmt::format("{},{},{},{:.7f},{},{}\n", FormatPoint(r.start), r.schedule,
                       r.iterations, r.elapsed_s, FormatPoint(r.final_x),
                       StopReasonName(r.stop_reason));
  }
  return out;
}

Json RowsToJson(const std::vector<ReportRow>& rows) {
  Json out = Json::array();
  for (const ReportRow& r : rows) {
    out.push_back(Json{{"start", PointToJson(r.start)},
                       {"schedule", r.schedule},
                       {"iterations", r.iterations},
                       {"elapsed_s", r.elapsed_s},
                       {"final_x", PointToJson(r.final_x)},
                       {"stop_reason", std::string(StopReasonName(r.stop_reason))}});
  }
  return out;
}

std::vector<ReportRow> RowsFromJson(const Json& j) {
  if (!j.is_array()) FailField("<rows>", "expected an array");
  std::vector<ReportRow> rows;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const Json& r = j[i];
    const std::string field = fmt::format("rows[{}]", i);
    if (!r.is_object()) FailField(field, "expected an object");
    ReportRow row;
    row.start = ParsePoint(r.value("start", Json()), field + ".start");
    row.schedule = Get<std::string>(r, "schedule", "", field);
    row.iterations = Get<int>(r, "iterations", 0, field);
    row.elapsed_s = GetNumber(r, "elapsed_s", 0.0, field);
    row.final_x = ParsePoint(r.value("final_x", Json()), field + ".final_x");
    row.stop_reason = ParseStopReason(Get<std::string>(r, "stop_reason", "", field));
    rows.push_back(std::move(row));
  }
  return rows;
}

void EmitReports(const std::vector<ReportRow>& rows, ReportFormat format,
                 const std::string& path) {
  WriteFile(path, format == ReportFormat::kCsv ? RowsToCsv(rows)
                                               : RowsToJson(rows).dump(2) + "\n");
}

void WriteOutputs(const ExperimentConfig& config, const ExperimentResult& result) {
  if (!config.output.csv.empty()) {
    EmitReports(result.rows, ReportFormat::kCsv, config.output.csv);
  }
  if (!config.output.json.empty()) {
    EmitReports(result.rows, ReportFormat::kJson, config.output.json);
  }
  if (!config.output.trace_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config.output.trace_dir, ec);
    if (ec) {
      throw Error(ErrorCode::kIoError, fmt::format("cannot create '{}': {}",
                                                   config.output.trace_dir, ec.message()));
    }
    for (std::size_t i = 0; i < result.runs.size(); ++i) {
      const std::filesystem::path base =
          std::filesystem::path(config.output.trace_dir) / fmt::format("run_{:03d}", i);
      std::ostringstream csv;
      WriteTraceCsv(result.runs[i], csv);
      WriteFile(base.string() + "_trace.csv", csv.str());
      WriteFile(base.string() + "_report.json",
                RunReportToJson(result.runs[i]).dump(2) + "\n");
    }
  }
}

std::string FormatTable(const std::vector<ReportRow>& rows) {
  std::string out = fmt::format("{:<34} {:<14} {:>6} {:>12}  {:<35} {}\n", "x0",
                                "schedule", "Iter.", "CPU in sec.", "x_n", "stop");
  for (const ReportRow& r : rows) {
    out += fmt::format("{:<34} {:<14} {:>6} {:>12.4f}  {:<35} {}\n",
                       FormatPoint(r.start), r.schedule, r.iterations, r.elapsed_s,
                       FormatPoint(r.final_x), StopReasonName(r.stop_reason));
  }
  return out;
}

}  // namespace ephybrid
