#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hwave/errors.hpp"
#include "hwave/runner.hpp"

using namespace hwave;
using nlohmann::json;

namespace {

json classical_config(const std::string& wavelet) {
  return {{"signal", {{"builder", "gaussian2d"}}}, {"checks", {"classical"}}, {"classical", {{"wavelet", wavelet}}}};
}

// Small twisted-translate run of the Gaussian: fails condition (i).
json twisted_config() {
  return {{"signal", {{"builder", "gaussian2d"}}},
          {"grids", {{"x", {{"half_width", 4}, {"step", 0.125}}}, {"y", {{"half_width", 4}, {"step", 0.125}}}}},
          {"checks", {"thm-twisted-translates"}},
          {"indices", {{"l", {-1, 0, 1}}}}};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("parse_config rejects malformed configurations") {
  CHECK_THROWS_AS(parse_config(json{{"signal", {{"builder", "gaussian2d"}}}, {"checks", json::array()}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"signal", {{"builder", "gaussian2d"}}}, {"checks", {"classical", "classical"}}}),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"signal", {{"builder", "nope"}}}, {"checks", {"classical"}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"signal", {{"builder", "gaussian2d"}}}, {"checks", {"frobnicate"}}}),
                  ConfigError);
  json extra = classical_config("shannon");
  extra["colour"] = "blue";
  CHECK_THROWS_AS(parse_config(extra), ConfigError);
  CHECK_NOTHROW(parse_config(classical_config("shannon")));
}

TEST_CASE("run exit codes follow the verdicts") {
  RunOutcome pass = run_json(classical_config("shannon"));
  CHECK(pass.exit_code == kExitPass);
  CHECK(pass.report["exit_code"] == 0);
  RunOutcome fail = run_json(classical_config("gaussian"));
  CHECK(fail.exit_code == kExitFail);
  RunOutcome bad = run_json(json{{"signal", {{"builder", "gaussian2d"}}}, {"checks", json::array()}});
  CHECK(bad.exit_code == kExitConfig);
  CHECK_FALSE(bad.error.empty());
  json wrong = classical_config("morlet");
  RunOutcome w = run_json(wrong);
  CHECK(w.exit_code == kExitConfig);
}

TEST_CASE("exit_code_for maps exception classes") {
  CHECK(exit_code_for(ConfigError("x")) == kExitConfig);
  CHECK(exit_code_for(NumericalError("x")) == kExitNumerical);
  CHECK(exit_code_for(std::runtime_error("x")) == kExitConfig);
}

TEST_CASE("reports are byte-identical across runs and summary numbers come from the report") {
  const json cfg = twisted_config();
  RunOutcome a = run_json(cfg), b = run_json(cfg);
  CHECK(a.exit_code == kExitFail);
  CHECK(a.report.dump(2) == b.report.dump(2));
  CHECK(a.summary == b.summary);

  // Every max_dev on the summary appears verbatim in the report JSON.
  const std::string text = a.report.dump();
  std::istringstream lines(a.summary);
  std::string line;
  int seen = 0;
  while (std::getline(lines, line)) {
    auto p = line.find("max_dev=");
    if (p == std::string::npos) continue;
    std::string num = line.substr(p + 8, line.find(' ', p) - p - 8);
    CHECK(text.find("\"max_dev\":" + num) != std::string::npos);
    ++seen;
  }
  CHECK(seen >= 2);
  CHECK(a.summary.find("exit 1") != std::string::npos);
}

TEST_CASE("emit_report writes report, timings and CSV files") {
  const auto dir = std::filesystem::temp_directory_path() / "hwave_runner_test";
  std::filesystem::remove_all(dir);
  const json cfg = classical_config("gaussian");
  RunConfig rc = parse_config(cfg);
  RunOutcome out = run(rc);
  emit_report(out, rc, dir);
  CHECK(std::filesystem::exists(dir / "timings.json"));
  CHECK(std::filesystem::exists(dir / "csv" / "classical" / "classical_j_0.csv"));
  const json back = json::parse(slurp(dir / "report.json"));
  CHECK(back["exit_code"] == 1);
  CHECK(back["checks"][0]["check"] == "classical");
  std::filesystem::remove_all(dir);
}
