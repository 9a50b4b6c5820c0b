#include "hwave/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fftw3.h>
#include <omp.h>
#include <Eigen/Core>

#include "hwave/designer.hpp"
#include "hwave/errors.hpp"
#include "hwave/json_io.hpp"
#include "hwave/oracle.hpp"
#include "hwave/twisted.hpp"

namespace hwave {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : keys) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("unknown field '" + it.key() + "' in " + where);
  }
}

template <class T>
T opt_value(const json& j, const char* key, T fallback) {
  return j.contains(key) ? get_as<T>(j, key) : fallback;
}

bool covers(const Grid1D& g, const Grid1D& hint) {
  const double eps = 1e-9 * hint.step;
  return g.start <= hint.start + eps && g.last() >= hint.last() - eps && g.step <= hint.step + eps;
}

std::string sanitize(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') {
      o += c;
    } else if (c == '=' || c == ',' || c == '(') {
      if (!o.empty() && o.back() != '_') o += '_';
    }
  }
  while (!o.empty() && o.back() == '_') o.pop_back();
  return o;
}

std::string curve_csv(const DiagnosticCurve& c) {
  std::ostringstream os;
  os.precision(17);
  os << (c.axis == CurveAxis::lambda ? "lambda" : "xi") << ",re,im\n";
  for (int i = 0; i < c.cells; ++i) {
    const cplx v = c.values[static_cast<std::size_t>(i)];
    os << c.point(i) << ',' << v.real() << ',' << v.imag() << '\n';
  }
  return os.str();
}

std::string num(double v) { return json(v).dump(); }

ConditionReport gap_report(const std::string& id, const std::vector<std::pair<std::string, double>>& gaps,
                           double tol) {
  ConditionReport r;
  r.id = id;
  r.tol = tol;
  double sum = 0.0;
  bool missing = false;
  for (const auto& [label, g] : gaps) {
    if (std::isnan(g)) throw NumericalError(id + ": non-finite gap at " + label);
    // Entries whose oracle element left the grid carry +inf; they fail the
    // report and are listed with -1.
    if (std::isinf(g)) {
      missing = true;
      r.details.emplace_back(label, -1.0);
      continue;
    }
    r.max_dev = std::max(r.max_dev, g);
    sum += g;
    ++r.points;
    r.details.emplace_back(label, g);
  }
  r.mean_dev = r.points == 0 ? 0.0 : sum / r.points;
  r.verdict = r.points > 0 && !missing && r.max_dev < tol ? Verdict::pass : Verdict::fail;
  return r;
}

std::string index_label(int k, int l, int m) {
  return "(k=" + std::to_string(k) + ",l=" + std::to_string(l) + ",m=" + std::to_string(m) + ")";
}

struct CheckOutput {
  std::vector<ConditionReport> reports;
  std::vector<DiagnosticCurve> curves;
  ordered_json extra = ordered_json::object();
  std::vector<CsvFile> csv;
};

struct Context {
  const RunConfig& cfg;
  const Signal& sig;
  std::optional<SupportHint> hint;
  double floor = 0.0;

  CheckOptions check_options(std::vector<DiagnosticCurve>* sink) const {
    CheckOptions o;
    o.tol = cfg.tolerance;
    o.floor = floor;
    o.hint = hint;
    o.curves = sink;
    return o;
  }
  const Field3D& f3(const std::string& check) const {
    if (!sig.is3d()) throw ConfigError(check + " needs a 3D signal");
    return sig.f3();
  }
  const Field2D& f2(const std::string& check) const {
    if (sig.is3d()) throw ConfigError(check + " needs a 2D signal");
    return sig.f2();
  }
};

CheckOutput run_classical(const Context& cx) {
  const json& c = cx.cfg.classical;
  reject_unknown_keys(c, {"wavelet", "jmax", "cells", "freq", "tol"}, "classical");
  const std::string w = opt_value<std::string>(c, "wavelet", "shannon");
  const Grid1D freq = c.contains("freq") ? grid_from_json(c["freq"]) : make_grid(-4.0, 1.0 / 128.0, 1025);
  std::vector<cplx> hat(freq.count);
  for (std::size_t i = 0; i < freq.count; ++i) {
    const double x = freq.point(i);
    if (w == "shannon")
      hat[i] = (x >= -1.0 && x < -0.5) || (x >= 0.5 && x < 1.0) ? 1.0 : 0.0;
    else if (w == "gaussian")
      hat[i] = std::pow(2.0, 0.25) * std::exp(-kPi * x * x);
    else
      throw ConfigError("classical.wavelet must be 'shannon' or 'gaussian'");
  }
  CheckOutput out;
  out.reports = classical_check(hat, freq, opt_value<int>(c, "jmax", 3), opt_value<double>(c, "tol", cx.cfg.tolerance),
                                opt_value<int>(c, "cells", 64), &out.curves);
  out.extra["wavelet"] = w;
  out.extra["freq"] = to_json(freq);
  return out;
}

CheckOutput run_h_conditions(const Context& cx, bool wavelet) {
  const std::string name = wavelet ? "thm-wavelet-h" : "thm-translates-h";
  const Field3D& psi = cx.f3(name);
  CheckOutput out;
  const auto opt = cx.check_options(&out.curves);
  out.reports = wavelet ? check_wavelet_h(psi, cx.cfg.indices, cx.cfg.lambda_grid, cx.cfg.truncation, opt)
                        : check_translates_h(psi, cx.cfg.indices, cx.cfg.lambda_grid, cx.cfg.truncation, opt);
  return out;
}

CheckOutput run_t_conditions(const Context& cx, bool wavelet) {
  const std::string name = wavelet ? "thm-twisted-wavelet" : "thm-twisted-translates";
  const Field2D& phi = cx.f2(name);
  CheckOutput out;
  const auto opt = cx.check_options(&out.curves);
  out.reports = wavelet ? check_twisted_wavelet(phi, cx.cfg.indices, cx.cfg.xi_grid, cx.cfg.truncation, opt)
                        : check_twisted_translates(phi, cx.cfg.indices.l, cx.cfg.xi_grid, cx.cfg.truncation, opt);
  return out;
}

CheckOutput run_lemmas(const Context& cx) {
  const json& c = cx.cfg.lemmas;
  reject_unknown_keys(c, {"tol", "lambdas", "kernel_grid"}, "lemmas");
  const double tol = opt_value<double>(c, "tol", 1e-6);
  const IndexWindow& w = cx.cfg.indices;
  CheckOutput out;
  if (cx.sig.is3d()) {
    std::vector<double> lambdas;
    if (c.contains("lambdas")) {
      lambdas = get_as<std::vector<double>>(c, "lambdas");
    } else {
      for (int i = 0; i < cx.cfg.lambda_grid.cells; ++i) lambdas.push_back(cx.cfg.lambda_grid.point(i));
    }
    std::vector<LatticeIndex> idx;
    for (int k : w.k)
      for (int l : w.l)
        for (int m : w.m) idx.push_back({k, l, m});
    auto gaps = wavelet_lemma_gaps(cx.sig.f3(), w.j, idx, lambdas);
    std::vector<std::pair<std::string, double>> rows;
    for (const auto& g : gaps)
      rows.emplace_back("(j=" + std::to_string(g.j) + ",k=" + std::to_string(g.idx.k) + ",l=" +
                            std::to_string(g.idx.l) + ",m=" + std::to_string(g.idx.m) + ")",
                        g.gap);
    out.reports.push_back(gap_report("lemma.wavelet_t_transform", rows, tol));
    out.extra["lambdas"] = lambdas;
    return out;
  }
  const Field2D& phi = cx.sig.f2();
  const std::vector<double> lambdas =
      c.contains("lambdas") ? get_as<std::vector<double>>(c, "lambdas") : std::vector<double>{0.25, 0.5, 1.0};
  const Grid1D kg = c.contains("kernel_grid") ? grid_from_json(c["kernel_grid"]) : symmetric_grid(4.0, 1.0 / 16.0);
  std::vector<std::pair<std::string, double>> dil, tt, dtt;
  for (int j : w.j) {
    for (double lam : lambdas)
      dil.emplace_back("(j=" + std::to_string(j) + ",lambda=" + num(lam) + ")", dilation_lemma_gap(phi, j, lam, kg, kg));
    for (int k : w.k)
      for (int l : w.l) {
        const std::string kl = "(j=" + std::to_string(j) + ",k=" + std::to_string(k) + ",l=" + std::to_string(l);
        tt.emplace_back(kl + ")", twisted_translate_lemma_gap(phi, k, l, j, kg, kg));
        for (double lam : lambdas)
          dtt.emplace_back(kl + ",lambda=" + num(lam) + ")", dilated_twisted_lemma_gap(phi, k, l, j, lam, kg, kg));
      }
  }
  out.reports.push_back(gap_report("lemma.dilation", dil, tol));
  out.reports.push_back(gap_report("lemma.twisted_translate", tt, tol));
  out.reports.push_back(gap_report("lemma.dilated_twisted", dtt, tol));
  out.extra["lambdas"] = lambdas;
  out.extra["kernel_grid"] = to_json(kg);
  return out;
}

std::map<std::string, Eigen::Index> label_index(const GramMatrix& g) {
  std::map<std::string, Eigen::Index> m;
  for (std::size_t i = 0; i < g.labels.size(); ++i) m[g.labels[i].str()] = static_cast<Eigen::Index>(i);
  return m;
}

ConditionReport coverage_report(const GramMatrix& g) {
  ConditionReport r;
  r.id = "oracle.coverage";
  r.points = static_cast<int>(g.labels.size() + g.excluded.size());
  r.max_dev = static_cast<double>(g.excluded.size());
  r.tol = 1.0;
  for (const auto& e : g.excluded) r.details.emplace_back(e.str(), 1.0);
  r.verdict = g.excluded.empty() ? Verdict::pass : Verdict::fail;
  return r;
}

GramOptions gram_options(const json& c, double tol_default) {
  GramOptions o;
  o.tol = opt_value<double>(c, "tol", tol_default);
  o.recheck = opt_value<bool>(c, "recheck", o.recheck);
  o.coverage_tol = opt_value<double>(c, "coverage_tol", o.coverage_tol);
  return o;
}

CheckOutput run_bridges(const Context& cx) {
  const json& c = cx.cfg.bridges;
  reject_unknown_keys(c, {"tol", "fg_tol", "scale_pairs", "recheck"}, "bridges");
  const Field3D& psi = cx.f3("bridges");
  const double tol = opt_value<double>(c, "tol", 1e-3);
  const double fg_tol = opt_value<double>(c, "fg_tol", 1e-6);
  const IndexWindow& w = cx.cfg.indices;
  GramOptions go;
  go.recheck = opt_value<bool>(c, "recheck", false);
  CheckOutput out;
  ordered_json table = ordered_json::array();
  auto row = [&](const std::string& kind, const std::string& label, cplx oracle, cplx bridge) {
    ordered_json r;
    r["kind"] = kind;
    r["indices"] = label;
    r["oracle_re"] = oracle.real();
    r["oracle_im"] = oracle.imag();
    r["bridge_re"] = bridge.real();
    r["bridge_im"] = bridge.imag();
    r["abs_diff"] = std::abs(oracle - bridge);
    table.push_back(r);
    return std::abs(oracle - bridge);
  };

  // G bridge: <L_{(k,l,m)} psi, psi> against the Fourier coefficients of G_{k,l}.
  std::vector<KL> kls;
  for (int k : w.k)
    for (int l : w.l) kls.push_back({k, l});
  if (std::none_of(kls.begin(), kls.end(), [](const KL& p) { return p.k == 0 && p.l == 0; })) kls.push_back({0, 0});
  auto gcurves = compute_G(psi, kls, cx.cfg.lambda_grid, cx.cfg.truncation, cx.hint);
  GramWindow gw{{0}, w.k, w.l, w.m};
  for (auto* v : {&gw.k, &gw.l, &gw.m})
    if (std::find(v->begin(), v->end(), 0) == v->end()) v->push_back(0);
  const GramMatrix g0 = gram_3d(psi, gw, go);
  auto at0 = label_index(g0);
  const auto origin = at0.find(GramLabel{0, 0, 0, 0}.str());
  std::vector<std::pair<std::string, double>> gdiff;
  for (std::size_t c2 = 0; c2 < kls.size(); ++c2)
    for (int m : w.m) {
      const std::string lab = index_label(kls[c2].k, kls[c2].l, m);
      const auto a = at0.find(GramLabel{0, kls[c2].k, kls[c2].l, m}.str());
      if (a == at0.end() || origin == at0.end()) {
        gdiff.emplace_back(lab + " excluded", HUGE_VAL);
        continue;
      }
      gdiff.emplace_back(lab, row("G", lab, g0.entries(a->second, origin->second), g_bridge(gcurves[c2], m)));
    }
  out.reports.push_back(gap_report("bridge.G", gdiff, tol));
  const auto g00 = std::find_if(gcurves.begin(), gcurves.end(), [](const DiagnosticCurve& cv) {
    return cv.indices[0].second == 0 && cv.indices[1].second == 0;
  });
  double mean00 = 0.0;
  for (const cplx& v : g00->values) mean00 += v.real();
  mean00 /= g00->cells;
  const double n2 = norm2(psi);
  row("G_norm", "(k=0,l=0)", n2, mean00);
  out.reports.push_back(gap_report("bridge.G_norm", {{"(k=0,l=0)", std::abs(mean00 - n2) / n2}}, tol));
  out.curves = gcurves;

  // F bridge across scale pairs.
  std::vector<std::pair<int, int>> pairs;
  if (c.contains("scale_pairs")) {
    for (const auto& p : c["scale_pairs"]) {
      if (!p.is_array() || p.size() != 2) throw ConfigError("bridges.scale_pairs entries must be [j1, j2]");
      pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
    }
  } else {
    for (int j1 : w.j)
      for (int d : w.dj) pairs.emplace_back(j1, j1 + d);
  }
  std::vector<FIndex> fidx;
  for (int k1 : w.k)
    for (int k2 : w.k)
      for (int l1 : w.l)
        for (int l2 : w.l) fidx.push_back({k1, k2, l1, l2});
  std::vector<std::pair<std::string, double>> fdiff;
  for (auto [j1, j2] : pairs) {
    if (j2 < j1) throw ConfigError("bridges.scale_pairs need j1 <= j2");
    auto fc = compute_F(psi, j1, j2, fidx, cx.cfg.lambda_grid, cx.cfg.truncation, cx.hint);
    const GramMatrix gm = gram_3d(psi, GramWindow{j1 == j2 ? std::vector<int>{j1} : std::vector<int>{j1, j2}, w.k, w.l, w.m}, go);
    auto at = label_index(gm);
    for (std::size_t q = 0; q < fidx.size(); ++q)
      for (int m1 : w.m)
        for (int m2 : w.m) {
          const auto& f = fidx[q];
          const std::string lab = "(j1=" + std::to_string(j1) + ",j2=" + std::to_string(j2) + ",k1=" +
                                  std::to_string(f.k1) + ",l1=" + std::to_string(f.l1) + ",m1=" + std::to_string(m1) +
                                  ",k2=" + std::to_string(f.k2) + ",l2=" + std::to_string(f.l2) +
                                  ",m2=" + std::to_string(m2) + ")";
          const auto a = at.find(GramLabel{j1, f.k1, f.l1, m1}.str());
          const auto b = at.find(GramLabel{j2, f.k2, f.l2, m2}.str());
          if (a == at.end() || b == at.end()) {
            fdiff.emplace_back(lab + " excluded", HUGE_VAL);
            continue;
          }
          fdiff.emplace_back(lab, row("F", lab, gm.entries(a->second, b->second), f_bridge(fc[q], j1, j2, m1, m2)));
        }
  }
  if (!pairs.empty()) out.reports.push_back(gap_report("bridge.F", fdiff, tol));

  // F_{0,0,0,k,0,l} = G_{k,l}.
  std::vector<FIndex> fg;
  for (const auto& p : kls) fg.push_back({0, p.k, 0, p.l});
  auto f00 = compute_F(psi, 0, 0, fg, cx.cfg.lambda_grid, cx.cfg.truncation, cx.hint);
  std::vector<std::pair<std::string, double>> fgdiff;
  for (std::size_t q = 0; q < kls.size(); ++q) {
    double d = 0.0;
    for (std::size_t i = 0; i < f00[q].values.size(); ++i)
      d = std::max(d, std::abs(f00[q].values[i] - gcurves[q].values[i]));
    fgdiff.emplace_back("(k=" + std::to_string(kls[q].k) + ",l=" + std::to_string(kls[q].l) + ")", d);
  }
  out.reports.push_back(gap_report("bridge.FG", fgdiff, fg_tol));
  out.extra["table"] = table;
  return out;
}

CheckOutput run_gram(const Context& cx) {
  const json& c = cx.cfg.gram;
  reject_unknown_keys(c, {"tol", "recheck", "coverage_tol", "twisted"}, "gram");
  const GramOptions go = gram_options(c, cx.cfg.tolerance);
  const IndexWindow& w = cx.cfg.indices;
  CheckOutput out;
  GramMatrix g;
  if (cx.sig.is3d()) {
    g = gram_3d(cx.sig.f3(), GramWindow{w.j, w.k, w.l, w.m}, go);
  } else {
    const bool twisted = opt_value<bool>(c, "twisted", true);
    g = gram_2d(cx.sig.f2(), GramWindow{w.j, w.k, w.l, {}}, twisted, go);
    out.extra["twisted"] = twisted;
  }
  out.reports.push_back(orthonormality_verdict(g));
  out.reports.push_back(coverage_report(g));
  out.extra["matrix"] = to_json(g);
  out.csv.push_back({"gram.csv", to_csv(g)});
  return out;
}

CheckOutput run_design(const Context& cx) {
  const json& c = cx.cfg.design;
  reject_unknown_keys(c, {"basis_size", "x", "y", "indices", "weights", "budget", "seed", "target_ratio", "init"},
                      "design");
  DesignProblem p;
  p.basis_size = opt_value<int>(c, "basis_size", p.basis_size);
  if (c.contains("x")) p.gx = grid_from_json(c["x"]);
  if (c.contains("y")) p.gy = grid_from_json(c["y"]);
  if (c.contains("indices")) p.window = window_from_json(c["indices"], p.window);
  if (c.contains("weights")) {
    auto ws = get_as<std::vector<double>>(c, "weights");
    if (ws.size() != 5) throw ConfigError("design.weights needs five entries");
    std::copy(ws.begin(), ws.end(), p.weights.begin());
  }
  p.budget = opt_value<int>(c, "budget", p.budget);
  p.seed = opt_value<std::uint64_t>(c, "seed", p.seed);
  p.xi = cx.cfg.xi_grid;
  p.truncation = cx.cfg.truncation;
  const double target = opt_value<double>(c, "target_ratio", 0.5);
  std::optional<std::vector<double>> init;
  if (c.contains("init")) init = get_as<std::vector<double>>(c, "init");
  const DesignResult r = optimize(p, init);
  CheckOutput out;
  ConditionReport rep;
  rep.id = "design.ratio";
  rep.tol = target;
  rep.points = 1;
  rep.max_dev = r.initial_residual > 0.0 ? r.residual / r.initial_residual : 0.0;
  rep.mean_dev = rep.max_dev;
  rep.details.emplace_back("final/initial", rep.max_dev);
  rep.verdict = rep.max_dev <= target ? Verdict::pass : Verdict::fail;
  out.reports.push_back(rep);
  out.extra["problem"] = to_json(p);
  out.extra["result"] = to_json(r);
  std::ostringstream os;
  os.precision(17);
  os << "evaluation,value,best\n";
  for (std::size_t i = 0; i < r.trace.size(); ++i) os << i + 1 << ',' << r.trace[i].value << ',' << r.trace[i].best << '\n';
  out.csv.push_back({"design_trace.csv", os.str()});
  return out;
}

CheckOutput run_check(const std::string& name, const Context& cx) {
  if (name == "classical") return run_classical(cx);
  if (name == "thm-translates-h") return run_h_conditions(cx, false);
  if (name == "thm-wavelet-h") return run_h_conditions(cx, true);
  if (name == "thm-twisted-translates") return run_t_conditions(cx, false);
  if (name == "thm-twisted-wavelet") return run_t_conditions(cx, true);
  if (name == "lemmas") return run_lemmas(cx);
  if (name == "bridges") return run_bridges(cx);
  if (name == "gram") return run_gram(cx);
  if (name == "design") return run_design(cx);
  throw ConfigError("unknown check '" + name + "'");
}

ordered_json grids_json(const Signal& s) {
  ordered_json g;
  if (s.is3d()) {
    g["x"] = to_json(s.f3().gx);
    g["y"] = to_json(s.f3().gy);
    g["t"] = to_json(s.f3().gt);
  } else {
    g["x"] = to_json(s.f2().gx);
    g["y"] = to_json(s.f2().gy);
  }
  return g;
}

// Builder hints that a kernel-prescribed signal's grids must cover.
void check_hints(const RunConfig& cfg) {
  const bool strict_hints = cfg.signal.builder == "box_kernel_phi" || cfg.signal.builder == "lambda_profile_psi";
  if (!strict_hints) return;
  const SignalGrids h = builder_hints(cfg.signal);
  auto test = [&](const std::optional<Grid1D>& g, const std::optional<Grid1D>& hg, const char* axis) {
    if (g && hg && !covers(*g, *hg))
      throw ConfigError(std::string("grid ") + axis + " does not cover the " + cfg.signal.builder +
                        " hint (half-width " + num(hg->last()) + ", step " + num(hg->step) + ")");
  };
  test(cfg.grids.x, h.x, "x");
  test(cfg.grids.t, h.t, "t");
}

ordered_json versions() {
  ordered_json v;
  v["hwave"] = kVersion;
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  v["fftw"] = std::string(fftw_version);
  return v;
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

std::vector<std::string> check_names() {
  return {"classical", "thm-translates-h", "thm-wavelet-h", "thm-twisted-translates", "thm-twisted-wavelet",
          "lemmas",    "bridges",          "gram",          "design"};
}

RunConfig parse_config(const json& j) {
  reject_unknown_keys(j,
                      {"signal", "grids", "lambda_grid", "xi_grid", "truncation", "checks", "indices", "tolerance",
                       "floor", "output", "classical", "lemmas", "bridges", "gram", "design"},
                      "config");
  RunConfig c;
  c.source = j;
  if (!j.contains("checks") || !j["checks"].is_array() || j["checks"].empty())
    throw ConfigError("config needs a non-empty 'checks' list");
  const auto known = check_names();
  std::set<std::string> seen;
  for (const auto& v : j["checks"]) {
    if (!v.is_string()) throw ConfigError("checks must be strings");
    const std::string n = v.get<std::string>();
    if (std::find(known.begin(), known.end(), n) == known.end()) throw ConfigError("unknown check '" + n + "'");
    if (!seen.insert(n).second) throw ConfigError("check '" + n + "' listed twice");
    c.checks.push_back(n);
  }
  const bool needs_signal = std::any_of(c.checks.begin(), c.checks.end(),
                                        [](const std::string& n) { return n != "classical" && n != "design"; });
  if (j.contains("signal")) {
    c.signal = signal_spec_from_json(j["signal"]);
    if (c.signal.file.empty()) {
      const auto names = builder_names();
      if (std::find(names.begin(), names.end(), c.signal.builder) == names.end())
        throw ConfigError("unknown builder '" + c.signal.builder + "'");
    }
  } else if (needs_signal) {
    throw ConfigError("config needs a 'signal'");
  }
  if (j.contains("grids")) {
    reject_unknown_keys(j["grids"], {"x", "y", "t"}, "grids");
    const json& g = j["grids"];
    if (g.contains("x")) c.grids.x = grid_from_json(g["x"]);
    if (g.contains("y")) c.grids.y = grid_from_json(g["y"]);
    if (g.contains("t")) c.grids.t = grid_from_json(g["t"]);
  }
  if (j.contains("lambda_grid")) {
    reject_unknown_keys(j["lambda_grid"], {"cells", "r_range"}, "lambda_grid");
    c.lambda_grid.cells = opt_value<int>(j["lambda_grid"], "cells", c.lambda_grid.cells);
    c.lambda_grid.r_range = opt_value<int>(j["lambda_grid"], "r_range", c.lambda_grid.r_range);
  }
  c.lambda_grid.validate();
  if (j.contains("xi_grid")) {
    reject_unknown_keys(j["xi_grid"], {"cells"}, "xi_grid");
    c.xi_grid.cells = opt_value<int>(j["xi_grid"], "cells", c.xi_grid.cells);
  }
  c.xi_grid.validate();
  c.truncation.r_range = c.lambda_grid.r_range;
  if (j.contains("truncation")) c.truncation = truncation_from_json(j["truncation"], c.truncation);
  if (j.contains("indices")) {
    reject_unknown_keys(j["indices"], {"k", "l", "m", "j", "dj"}, "indices");
    c.indices = window_from_json(j["indices"]);
  }
  c.tolerance = opt_value<double>(j, "tolerance", c.tolerance);
  if (!(c.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (j.contains("floor")) c.floor = get_as<double>(j, "floor");
  if (j.contains("output")) {
    reject_unknown_keys(j["output"], {"json", "csv"}, "output");
    c.output.json = opt_value<std::string>(j["output"], "json", "");
    c.output.csv_dir = opt_value<std::string>(j["output"], "csv", "");
  }
  for (auto [key, dst] : {std::pair{"classical", &c.classical}, std::pair{"lemmas", &c.lemmas},
                          std::pair{"bridges", &c.bridges}, std::pair{"gram", &c.gram}, std::pair{"design", &c.design}})
    if (j.contains(key)) {
      if (!j[key].is_object()) throw ConfigError(std::string(key) + " must be an object");
      *dst = j[key];
    }
  if (needs_signal) check_hints(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  return kExitConfig;
}

RunOutcome run(const RunConfig& cfg, const RunOptions& opt) {
  RunOutcome out;
  const auto t_start = Clock::now();
  if (opt.threads > 0) omp_set_num_threads(opt.threads);
  ordered_json timings;
  timings["started_utc"] = utc_now();
  timings["threads"] = omp_get_max_threads();
  ordered_json check_times = ordered_json::object();
  try {
    ordered_json report;
    report["config"] = ordered_json::parse(cfg.source.dump());
    report["versions"] = versions();
    report["strict"] = opt.strict;

    Signal sig;
    ordered_json sigj;
    const bool needs_signal = std::any_of(cfg.checks.begin(), cfg.checks.end(),
                                          [](const std::string& n) { return n != "classical" && n != "design"; });
    if (needs_signal) {
      const auto t0 = Clock::now();
      sig = build_signal(cfg.signal, cfg.grids);
      timings["signal"] = seconds_since(t0);
      sigj["spec"] = to_json(cfg.signal);
      sigj["builder"] = sig.meta.builder;
      sigj["normalized"] = sig.meta.normalized;
      sigj["grids"] = grids_json(sig);
      sigj["norm2"] = sig.is3d() ? norm2(sig.f3()) : norm2(sig.f2());
      if (sig.meta.lambda_min) sigj["lambda_min"] = *sig.meta.lambda_min;
    }
    report["signal"] = sigj;
    ordered_json achieved;
    achieved["lambda_grid"] = {{"cells", cfg.lambda_grid.cells}, {"r_range", cfg.lambda_grid.r_range}};
    achieved["xi_grid"] = {{"cells", cfg.xi_grid.cells}};
    achieved["truncation"] = to_json(cfg.truncation);
    achieved["indices"] = to_json(cfg.indices);
    report["settings"] = achieved;

    Context cx{cfg, sig, std::nullopt, 0.0};
    if (needs_signal) {
      cx.hint = support_from(sig.meta);
      cx.floor = cfg.floor.value_or(sig.meta.lambda_min.value_or(0.0));
    }
    // Gram pairings of the lambda profile need its wider y window.
    Signal gram_sig;
    const bool wide_y = needs_signal && sig.meta.gram_y && !cfg.grids.y &&
                        std::find(cfg.checks.begin(), cfg.checks.end(), "gram") != cfg.checks.end();
    if (wide_y) {
      SignalGrids g = cfg.grids;
      g.y = sig.meta.gram_y;
      gram_sig = build_signal(cfg.signal, g);
    }

    ordered_json checks = ordered_json::array();
    bool any_fail = false, any_unconverged = false;
    std::ostringstream sum;
    for (const std::string& name : cfg.checks) {
      const auto t0 = Clock::now();
      const Context gcx{cfg, wide_y && name == "gram" ? gram_sig : sig, cx.hint, cx.floor};
      CheckOutput co = run_check(name, gcx);
      check_times[name] = seconds_since(t0);
      ordered_json cj;
      cj["check"] = name;
      if (name == "gram" && wide_y) cj["grids"] = grids_json(gram_sig);
      ordered_json reps = ordered_json::array();
      for (const auto& r : co.reports) {
        reps.push_back(to_json(r));
        any_fail = any_fail || r.verdict == Verdict::fail;
        any_unconverged = any_unconverged || r.verdict == Verdict::unconverged;
        sum << name << "  " << r.id << "  " << to_string(r.verdict) << "  max_dev=" << num(r.max_dev)
            << "  tol=" << num(r.tol) << '\n';
      }
      cj["reports"] = reps;
      int outer = 0, inner = 0;
      bool converged = true;
      ordered_json curves = ordered_json::array();
      for (const auto& c : co.curves) {
        outer = std::max(outer, c.outer_range);
        inner = std::max(inner, c.inner_range);
        converged = converged && c.converged;
        curves.push_back(to_json(c));
        out.csv.push_back({name + "/" + sanitize(c.label()) + ".csv", curve_csv(c)});
      }
      if (!co.curves.empty()) {
        cj["achieved"] = {{"max_outer_range", outer}, {"max_inner_range", inner}, {"all_converged", converged}};
        cj["curves"] = curves;
      }
      for (auto& [k, v] : co.extra.items()) cj[k] = v;
      for (auto& f : co.csv) out.csv.push_back({name + "/" + f.name, f.text});
      checks.push_back(cj);
    }
    report["checks"] = checks;
    out.exit_code = opt.strict && any_unconverged ? kExitNumerical : (any_fail || any_unconverged ? kExitFail : kExitPass);
    report["exit_code"] = out.exit_code;
    sum << "exit " << out.exit_code << '\n';
    out.summary = sum.str();
    out.report = std::move(report);
  } catch (const std::exception& e) {
    out.exit_code = exit_code_for(e);
    out.error = e.what();
    out.summary = std::string("error: ") + e.what() + "\nexit " + std::to_string(out.exit_code) + '\n';
    out.report = ordered_json::object();
    out.report["error"] = e.what();
    out.report["exit_code"] = out.exit_code;
  }
  timings["checks"] = check_times;
  timings["total"] = seconds_since(t_start);
  out.timings = timings;
  return out;
}

RunOutcome run_json(const json& config, const RunOptions& opt) {
  try {
    return run(parse_config(config), opt);
  } catch (const std::exception& e) {
    RunOutcome out;
    out.exit_code = exit_code_for(e);
    out.error = e.what();
    out.summary = std::string("error: ") + e.what() + "\nexit " + std::to_string(out.exit_code) + '\n';
    out.report = {{"error", e.what()}, {"exit_code", out.exit_code}};
    out.timings = ordered_json::object();
    return out;
  }
}

void emit_report(const RunOutcome& o, const RunConfig& cfg, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  auto resolve = [&](const std::string& p, const std::string& fallback) {
    fs::path q = p.empty() ? fs::path(fallback) : fs::path(p);
    return q.is_absolute() ? q : out_dir / q;
  };
  auto write = [](const fs::path& p, const std::string& text) {
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    std::ofstream f(p, std::ios::binary);
    if (!f || !(f << text) || !f.flush()) throw IoError("cannot write " + p.string());
  };
  const fs::path report = resolve(cfg.output.json, "report.json");
  write(report, o.report.dump(2) + "\n");
  write(report.parent_path() / "timings.json", o.timings.dump(2) + "\n");
  const fs::path csv = resolve(cfg.output.csv_dir, "csv");
  for (const auto& f : o.csv) write(csv / f.name, f.text);
}

}  // namespace hwave
