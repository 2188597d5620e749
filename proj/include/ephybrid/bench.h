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

// Experiment harness: built-in Nash-Cournot test problems, JSON experiment
// configs, grid runs over starting points and alpha schedules, and the
// CSV / JSON report writers used by the CLI.

#ifndef EPHYBRID_BENCH_H_
#define EPHYBRID_BENCH_H_

#include <string>
#include <string_view>
#include <vector>

#include "ephybrid/hybrid_solver.h"
#include "ephybrid/problem_io.h"
#include "ephybrid/problems.h"

namespace ephybrid {

// Nash-Cournot data shared by both built-in problems.
DenseMatrix NashCournotP();
DenseMatrix NashCournotQ();

// f with q = (1, -2, 3), C = {sum x_i >= 1, 0 <= x_i <= 1}, S = I.
ProblemBundle BuiltinExample1();
// f with q = 0, C = [0, 1]^3, S = P_C(mean of projections onto three
// halfspaces missing C), known solution 0.
ProblemBundle BuiltinExample2();
// Throws kParseError for unknown names.
ProblemBundle BuiltinProblem(std::string_view name);

enum class Algorithm { kHybrid, kExtragradient };

struct OutputPaths {
  std::string csv;
  std::string json;
  std::string trace_dir;  // one trace CSV + report JSON per run
};

struct ExperimentConfig {
  std::string problem_label;
  ProblemBundle problem;
  Algorithm algorithm = Algorithm::kHybrid;
  // Validated parameters; the schedule slot holds schedules.front().
  HybridParams params;
  std::vector<AlphaSchedule> schedules;
  std::vector<Point> starts;
  Point y0;
  StoppingRule stopping;
  OutputPaths output;
  bool audit = false;
};

// Defaults: lambda = 1 / (5 c1), k = 6, y0 = 0; schedules constant(0) when
// S = I and {anh_ratio, pow10, invlog} otherwise; distance-to-known stopping
// at 1e-3 when a solution is attached and residual stopping at 1e-4 otherwise.
// Throws kParseError (bad JSON / field) or kValidationError listing every
// violated condition.
ExperimentConfig ParseConfig(const Json& j);
ExperimentConfig ParseConfigText(std::string_view text,
                                 std::string_view source = "<config>");
ExperimentConfig LoadConfig(const std::string& path);

// The two reference grids: example1 from three starts, and example2 from
// four starts under the three alpha schedules.
ExperimentConfig Table1Config();
ExperimentConfig Table2Config();

struct ReportRow {
  Point start;
  std::string schedule;
  int iterations = 0;
  double elapsed_s = 0.0;
  Point final_x;
  StopReason stop_reason = StopReason::kMaxIter;

  // Field-wise equality, elapsed time excluded.
  bool SameOutcome(const ReportRow& other) const;
};

struct ExperimentResult {
  std::vector<ReportRow> rows;
  std::vector<RunReport> runs;  // parallel to rows
};

// Violated per-iteration certificates of a run, one line each.
std::vector<std::string> AuditViolations(const RunReport& report);

// One row per (start x schedule), in config order. Rows run on up to
// EPHYBRID_MAX_THREADS threads. A run that hits max_iter yields a MaxIter row.
// In audit mode projections are cross-checked and any violated certificate
// throws kInvariantViolation.
ExperimentResult RunExperiment(const ExperimentConfig& config);

enum class ReportFormat { kCsv, kJson };

// CSV header: start,schedule,iterations,elapsed_s,final_x,stop_reason with
// points written as (x1;x2;...) to 7 decimals.
std::string FormatPoint(const Point& x);
std::string RowsToCsv(const std::vector<ReportRow>& rows);
Json RowsToJson(const std::vector<ReportRow>& rows);
std::vector<ReportRow> RowsFromJson(const Json& j);
// Throws kIoError.
void EmitReports(const std::vector<ReportRow>& rows, ReportFormat format,
                 const std::string& path);
// Writes CSV / JSON / per-run traces named in config.output.
void WriteOutputs(const ExperimentConfig& config, const ExperimentResult& result);

// Fixed-width text table, one line per row.
std::string FormatTable(const std::vector<ReportRow>& rows);

}  // namespace ephybrid

#endif  // EPHYBRID_BENCH_H_
