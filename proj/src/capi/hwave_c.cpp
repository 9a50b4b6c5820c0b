#include "hwave/hwave.h"

#include <fstream>
#include <optional>
#include <string>

#include "hwave/errors.hpp"
#include "hwave/runner.hpp"

struct hwave_run {
  hwave::RunOutcome outcome;
  std::optional<hwave::RunConfig> config;
  std::string report, timings;
};

namespace {

thread_local std::string g_error;

hwave_status fail(hwave_status s, std::string msg) {
  g_error = std::move(msg);
  return s;
}

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
  return s;
}

hwave_status finish(const nlohmann::json* parsed, const std::string& parse_error, const hwave_run_options* opts,
                    hwave_run** out) {
  auto* r = new (std::nothrow) hwave_run;
  if (!r) return fail(HWAVE_ERR_INTERNAL, "out of memory");
  hwave::RunOptions ro;
  if (opts) {
    ro.threads = opts->threads;
    ro.strict = opts->strict != 0;
  }
  try {
    if (!parsed) throw hwave::ConfigError(parse_error);
    r->config = hwave::parse_config(*parsed);
    r->outcome = hwave::run(*r->config, ro);
  } catch (const std::exception& e) {
    r->outcome = hwave::RunOutcome{};
    r->outcome.exit_code = hwave::exit_code_for(e);
    r->outcome.error = e.what();
    r->outcome.summary = std::string("error: ") + e.what() + "\nexit " + std::to_string(r->outcome.exit_code) + "\n";
    r->outcome.report = {{"error", e.what()}, {"exit_code", r->outcome.exit_code}};
    r->outcome.timings = nlohmann::ordered_json::object();
  }
  r->report = r->outcome.report.dump(2) + "\n";
  r->timings = r->outcome.timings.dump(2) + "\n";
  *out = r;
  g_error.clear();
  return HWAVE_OK;
}

}  // namespace

extern "C" {

const char* hwave_version(void) { return hwave::kVersion; }

const char* hwave_last_error(void) { return g_error.c_str(); }

hwave_status hwave_run_json(const char* config_json, const hwave_run_options* opts, hwave_run** out) {
  if (!config_json || !out) return fail(HWAVE_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  try {
    nlohmann::json j = nlohmann::json::parse(config_json);
    return finish(&j, "", opts, out);
  } catch (const nlohmann::json::parse_error& e) {
    return finish(nullptr, std::string("config is not valid JSON: ") + e.what(), opts, out);
  } catch (const std::exception& e) {
    return fail(HWAVE_ERR_INTERNAL, e.what());
  }
}

hwave_status hwave_run_file(const char* config_path, const hwave_run_options* opts, hwave_run** out) {
  if (!config_path || !out) return fail(HWAVE_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  try {
    std::ifstream in(config_path);
    if (!in) return finish(nullptr, std::string("cannot open config ") + config_path, opts, out);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      return finish(nullptr, std::string("config is not valid JSON: ") + e.what(), opts, out);
    }
    return finish(&j, "", opts, out);
  } catch (const std::exception& e) {
    return fail(HWAVE_ERR_INTERNAL, e.what());
  }
}

int hwave_run_exit_code(const hwave_run* run) { return run ? run->outcome.exit_code : HWAVE_EXIT_CONFIG; }

const char* hwave_run_report(const hwave_run* run) { return run ? run->report.c_str() : ""; }

const char* hwave_run_timings(const hwave_run* run) { return run ? run->timings.c_str() : ""; }

const char* hwave_run_summary(const hwave_run* run) { return run ? run->outcome.summary.c_str() : ""; }

const char* hwave_run_error(const hwave_run* run) { return run ? run->outcome.error.c_str() : ""; }

hwave_status hwave_run_write(const hwave_run* run, const char* out_dir) {
  if (!run || !out_dir) return fail(HWAVE_ERR_ARGUMENT, "null argument");
  try {
    hwave::RunConfig fallback;
    hwave::emit_report(run->outcome, run->config ? *run->config : fallback, out_dir);
    g_error.clear();
    return HWAVE_OK;
  } catch (const hwave::IoError& e) {
    return fail(HWAVE_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(HWAVE_ERR_INTERNAL, e.what());
  }
}

void hwave_run_free(hwave_run* run) { delete run; }

const char* hwave_builder_names(void) {
  static const std::string s = join(hwave::builder_names());
  return s.c_str();
}

const char* hwave_check_names(void) {
  static const std::string s = join(hwave::check_names());
  return s.c_str();
}

}  // extern "C"
