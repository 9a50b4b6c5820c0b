#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hwave/diagnostics_t.hpp"
#include "hwave/signals.hpp"

namespace hwave {

inline constexpr const char* kVersion = "0.1.0";

struct OutputSpec {
  std::string json;     // report path; "report.json" under the output directory when empty
  std::string csv_dir;  // "csv" under the output directory when empty
};

struct RunConfig {
  SignalSpec signal;
  SignalGrids grids;
  LambdaGrid lambda_grid;
  XiGrid xi_grid;
  TruncationPolicy truncation;
  std::vector<std::string> checks;
  IndexWindow indices;
  double tolerance = 1e-2;
  // Condition (i) skips lambda or xi cells below this point; defaults to the
  // signal's lambda_min when it has one.
  std::optional<double> floor;
  OutputSpec output;
  // Per-check settings, validated when the check runs.
  nlohmann::json classical = nlohmann::json::object();
  nlohmann::json lemmas = nlohmann::json::object();
  nlohmann::json bridges = nlohmann::json::object();
  nlohmann::json gram = nlohmann::json::object();
  nlohmann::json design = nlohmann::json::object();
  nlohmann::json source;  // the parsed document, echoed in the report
};

std::vector<std::string> check_names();
// Throws ConfigError on unknown keys, unknown checks or bad values.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

struct RunOptions {
  int threads = 0;  // 0 keeps the OpenMP default
  bool strict = false;
};

enum ExitCode { kExitPass = 0, kExitFail = 1, kExitConfig = 2, kExitNumerical = 3 };

struct CsvFile {
  std::string name;  // relative to the CSV directory
  std::string text;
};

struct RunOutcome {
  int exit_code = kExitPass;
  nlohmann::ordered_json report;   // deterministic for a fixed thread count
  nlohmann::ordered_json timings;  // wall clock, kept apart from the report
  std::vector<CsvFile> csv;
  std::string summary;
  std::string error;  // set for exit codes 2 and 3 raised by exceptions
};

// Never throws: errors become exit codes 2 or 3 with outcome.error set.
RunOutcome run(const RunConfig& config, const RunOptions& opt = {});
RunOutcome run_json(const nlohmann::json& config, const RunOptions& opt = {});

// Writes the report, timings.json and CSV files. Relative output paths in the
// config resolve against out_dir. Throws IoError when a file cannot be written.
void emit_report(const RunOutcome& outcome, const RunConfig& config, const std::filesystem::path& out_dir);

// Exit code for an exception escaping a run.
int exit_code_for(const std::exception& e);

}  // namespace hwave
