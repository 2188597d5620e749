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

// Command-line harness.
//
//   ephybrid solve --config <path>
//   ephybrid reproduce table1|table2 [--out <dir>]
//   ephybrid audit --config <path>
//
// Exit codes: 0 success, 1 other failure, 2 invalid config, 3 violated
// invariant.

#include <filesystem>
#include <iostream>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "ephybrid/bench.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitInvariant = 3;

int ExitCodeFor(const ephybrid::Error& e) {
  switch (e.code()) {
    case ephybrid::ErrorCode::kParseError:
    case ephybrid::ErrorCode::kValidationError:
      return kExitValidation;
    case ephybrid::ErrorCode::kInvariantViolation:
      return kExitInvariant;
    default:
      return kExitFailure;
  }
}

int RunAndReport(const ephybrid::ExperimentConfig& config) {
  const ephybrid::ExperimentResult result = ephybrid::RunExperiment(config);
  ephybrid::WriteOutputs(config, result);
  std::cout << "problem: " << config.problem_label << "\n"
            << ephybrid::FormatTable(result.rows);
  int clamped = 0;
  for (const auto& run : result.runs) clamped += run.alpha_clamped_iterations;
  if (clamped > 0) {
    std::cout << fmt::format(
        "note: alpha_n was clamped to [0, {}] in {} iteration(s)\n",
        config.params.alpha_cap, clamped);
  }
  if (config.audit) std::cout << "audit: all certificates held\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid outer-approximation solver for equilibrium problems"};
  app.require_subcommand(1);

  std::string solve_config;
  auto* solve = app.add_subcommand("solve", "Run the experiment described by a JSON config");
  solve->add_option("--config", solve_config, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  std::string table;
  std::string out_dir;
  auto* reproduce =
      app.add_subcommand("reproduce", "Rerun the built-in table1 / table2 grids");
  reproduce->add_option("table", table, "table1 or table2")
      ->required()
      ->check(CLI::IsMember({"table1", "table2"}));
  reproduce->add_option("--out", out_dir, "Directory for CSV / JSON / traces");

  std::string audit_config;
  auto* audit = app.add_subcommand(
      "audit", "Run a config with per-iteration invariant checks enabled");
  audit->add_option("--config", audit_config, "Experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*solve) return RunAndReport(ephybrid::LoadConfig(solve_config));
    if (*audit) {
      ephybrid::ExperimentConfig config = ephybrid::LoadConfig(audit_config);
      config.audit = true;
      return RunAndReport(config);
    }
    ephybrid::ExperimentConfig config = table == "table1"
                                            ? ephybrid::Table1Config()
                                            : ephybrid::Table2Config();
    if (!out_dir.empty()) {
      std::filesystem::create_directories(out_dir);
      const std::filesystem::path dir(out_dir);
      config.output.csv = (dir / (table + ".csv")).string();
      config.output.json = (dir / (table + ".json")).string();
      config.output.trace_dir = (dir / (table + "_traces")).string();
    }
    return RunAndReport(config);
  } catch (const ephybrid::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
