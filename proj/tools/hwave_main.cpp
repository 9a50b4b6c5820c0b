#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hwave/hwave.h"

namespace {

struct Common {
  int threads = 0;
  bool strict = false;
  std::string out;
};

struct SignalArgs {
  std::string signal;
  std::string params = "{}";
  std::vector<int> j, k, l, m;
};

nlohmann::json signal_json(const SignalArgs& a) {
  nlohmann::json s;
  if (a.signal.size() > 4 && a.signal.compare(a.signal.size() - 4, 4, ".hwg") == 0) {
    s["file"] = a.signal;
  } else {
    s["builder"] = a.signal;
    s["params"] = nlohmann::json::parse(a.params);
  }
  return s;
}

nlohmann::json indices_json(const SignalArgs& a) {
  nlohmann::json w = nlohmann::json::object();
  if (!a.j.empty()) w["j"] = a.j;
  if (!a.k.empty()) w["k"] = a.k;
  if (!a.l.empty()) w["l"] = a.l;
  if (!a.m.empty()) w["m"] = a.m;
  return w;
}

int finish(hwave_status st, hwave_run* run, const std::string& out_dir) {
  if (st != HWAVE_OK) {
    std::fprintf(stderr, "hwave: %s\n", hwave_last_error());
    return HWAVE_EXIT_CONFIG;
  }
  std::fputs(hwave_run_summary(run), stdout);
  int code = hwave_run_exit_code(run);
  if (!out_dir.empty() && hwave_run_write(run, out_dir.c_str()) != HWAVE_OK) {
    std::fprintf(stderr, "hwave: %s\n", hwave_last_error());
    code = HWAVE_EXIT_CONFIG;
  }
  hwave_run_free(run);
  return code;
}

int run_config(const nlohmann::json& cfg, const Common& c) {
  hwave_run_options o{c.threads, c.strict ? 1 : 0};
  hwave_run* run = nullptr;
  const std::string text = cfg.dump();
  const hwave_status st = hwave_run_json(text.c_str(), &o, &run);
  return finish(st, run, c.out);
}

void add_signal_options(CLI::App* app, SignalArgs& a) {
  app->add_option("--signal", a.signal, "Builder name or .hwg file")->required();
  app->add_option("--params", a.params, "Builder parameters as a JSON object");
  app->add_option("--j", a.j, "Scale indices");
  app->add_option("--k", a.k, "k indices");
  app->add_option("--l", a.l, "l indices");
  app->add_option("--m", a.m, "m indices");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Orthonormality diagnostics for wavelet systems on the Heisenberg group"};
  app.set_version_flag("--version", std::string(hwave_version()));
  app.require_subcommand(1);
  Common common;
  app.add_option("--threads", common.threads, "Worker threads (overrides HWAVE_THREADS)")->check(CLI::NonNegativeNumber);
  app.add_flag("--strict", common.strict, "Unconverged sums give exit code 3");
  app.add_option("--out", common.out, "Directory for report.json, timings.json and CSV files");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Execute a JSON run configuration");
  run->add_option("config", config_path, "Configuration file")->required();

  SignalArgs lem;
  double lemma_tol = 1e-6;
  auto* lemmas = app.add_subcommand("lemmas", "Two-path checks of the kernel and t-transform identities");
  add_signal_options(lemmas, lem);
  lemmas->add_option("--tol", lemma_tol, "Pass threshold for the largest gap");

  SignalArgs gr;
  double gram_tol = 1e-3;
  bool plain = false;
  auto* gram = app.add_subcommand("gram", "Gram matrix of a wavelet or translate system by direct quadrature");
  add_signal_options(gram, gr);
  gram->add_option("--tol", gram_tol, "Orthonormality tolerance");
  gram->add_flag("--plain", plain, "Plain instead of twisted translates for 2D signals");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : HWAVE_EXIT_CONFIG;
  }
  if (app.count("--threads") == 0) {
    if (const char* env = std::getenv("HWAVE_THREADS")) {
      try {
        common.threads = std::stoi(env);
      } catch (const std::exception&) {
        std::fprintf(stderr, "hwave: HWAVE_THREADS must be an integer\n");
        return HWAVE_EXIT_CONFIG;
      }
    }
  }

  try {
    if (*run) {
      hwave_run_options o{common.threads, common.strict ? 1 : 0};
      hwave_run* r = nullptr;
      const hwave_status st = hwave_run_file(config_path.c_str(), &o, &r);
      return finish(st, r, common.out.empty() ? "." : common.out);
    }
    if (*lemmas) {
      nlohmann::json cfg = {{"signal", signal_json(lem)}, {"checks", {"lemmas"}}, {"lemmas", {{"tol", lemma_tol}}}};
      cfg["indices"] = indices_json(lem);
      return run_config(cfg, common);
    }
    nlohmann::json cfg = {{"signal", signal_json(gr)}, {"checks", {"gram"}}, {"gram", {{"tol", gram_tol}}}};
    cfg["indices"] = indices_json(gr);
    if (plain) cfg["gram"]["twisted"] = false;
    return run_config(cfg, common);
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "hwave: bad --params: %s\n", e.what());
    return HWAVE_EXIT_CONFIG;
  }
}
