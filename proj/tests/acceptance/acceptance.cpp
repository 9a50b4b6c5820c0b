// Acceptance suite: one line per criterion, exit status 1 when any fails.
// Usage: hwave_acceptance [criterion numbers...]   (all when none given)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hwave/designer.hpp"
#include "hwave/diagnostics_t.hpp"
#include "hwave/errors.hpp"
#include "hwave/oracle.hpp"
#include "hwave/runner.hpp"
#include "hwave/signals.hpp"
#include "hwave/twisted.hpp"
#include "hwave/weyl.hpp"

using namespace hwave;
using nlohmann::json;

namespace {

struct Result {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// max_dev of a report id in a runner outcome; NaN when absent.
double report_dev(const RunOutcome& o, const std::string& id) {
  for (const auto& c : o.report["checks"])
    for (const auto& r : c["reports"])
      if (r["id"] == id) return r["max_dev"].get<double>();
  return std::nan("");
}

std::string report_verdict(const RunOutcome& o, const std::string& id) {
  for (const auto& c : o.report["checks"])
    for (const auto& r : c["reports"])
      if (r["id"] == id) return r["verdict"].get<std::string>();
  return "missing";
}

json grid(double half, double step) { return {{"half_width", half}, {"step", step}}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::vector<double> kLambdas = {0.25, 0.5, 1.0, 2.0};

Field2D gaussian2d() { return build_signal(SignalSpec{"gaussian2d"}).f2(); }

Result c1_kernel_closed_form() {
  const auto t0 = std::chrono::steady_clock::now();
  const Field2D f = gaussian2d();
  const Grid1D w = symmetric_grid(4.0, 1.0 / 16.0);
  double worst = 0.0, worst_pointwise = 0.0;
  for (double lam : kLambdas) {
    WeylKernel k = kernel_of(f, lam, w, w);
    double err = 0.0, peak = 0.0;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t a = 0; a < w.count; ++a)
      for (std::size_t b = 0; b < w.count; ++b) {
        const double xi = w.point(a), eta = w.point(b);
        const double exact = std::sqrt(2.0) * std::exp(-kPi * (eta - xi) * (eta - xi)) *
                             std::exp(-kPi * lam * lam * (xi + eta) * (xi + eta) / 4.0);
        err = std::max(err, std::abs(k.values.at(a, b) - exact));
        peak = std::max(peak, exact);
        pts.emplace_back(exact, std::abs(k.values.at(a, b) - exact));
      }
    worst = std::max(worst, err / peak);
    for (auto [e, d] : pts)
      if (e > 1e-8 * peak) worst_pointwise = std::max(worst_pointwise, d / e);
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-6 && secs < 10.0,
          fmt("max rel err %.3e (window peak), pointwise %.3e where |K| > 1e-8 peak; %.1f s", worst, worst_pointwise,
              secs)};
}

Result c2_hilbert_schmidt() {
  const Field2D f = gaussian2d();
  double worst = 0.0;
  for (double lam : kLambdas) {
    WeylKernel k = kernel_of(f, lam);
    const double expect = norm2(f) / lam;
    worst = std::max(worst, std::abs(norm2(k.values) - expect) / expect);
  }
  return {worst < 1e-4, fmt("max rel deviation %.3e (tol 1e-4)", worst)};
}

Result c3_wavelet_lemma() {
  const auto t0 = std::chrono::steady_clock::now();
  SignalGrids g{symmetric_grid(8.0, 0.125), symmetric_grid(8.0, 0.125), symmetric_grid(6.0, 1.0 / 16.0)};
  const Field3D psi = build_signal(SignalSpec{"gaussian3d"}, g).f3();
  std::vector<LatticeIndex> idx;
  for (int k = -1; k <= 1; ++k)
    for (int l = -1; l <= 1; ++l)
      for (int m = -1; m <= 1; ++m) idx.push_back({k, l, m});
  const LambdaGrid lg;
  std::vector<double> lambdas;
  for (int i = 0; i < lg.cells; ++i) lambdas.push_back(lg.point(i));
  double worst = 0.0;
  for (const auto& gap : wavelet_lemma_gaps(psi, {-1, 0, 1}, idx, lambdas)) worst = std::max(worst, gap.gap);
  const double secs = seconds_since(t0);
  return {worst < 1e-6 && secs < 120.0, fmt("max gap %.3e over %zu indices x %zu lambdas; %.1f s", worst,
                                            3 * idx.size(), lambdas.size(), secs)};
}

Result c4_kernel_lemmas() {
  const json cfg = {{"signal", {{"builder", "gaussian2d"}}},
                    {"grids", {{"x", grid(12, 1.0 / 16)}, {"y", grid(12, 1.0 / 16)}}},
                    {"checks", {"lemmas"}},
                    {"indices", {{"j", {-1, 0, 1, 2}}, {"k", {-2, -1, 0, 1, 2}}, {"l", {-2, -1, 0, 1, 2}}}},
                    {"lemmas", {{"tol", 1e-6}, {"lambdas", {0.25, 0.5, 1.0}}}}};
  RunOutcome o = run_json(cfg);
  const double d = report_dev(o, "lemma.dilation"), t = report_dev(o, "lemma.twisted_translate"),
               dt = report_dev(o, "lemma.dilated_twisted");
  const double worst = std::max({d, t, dt});
  return {o.exit_code == 0 && worst < 1e-6,
          fmt("dilation %.3e, twisted translate %.3e, dilated twisted %.3e (tol 1e-6)", d, t, dt)};
}

double max_offdiag(const GramMatrix& g) {
  double m = 0.0;
  for (Eigen::Index a = 0; a < g.entries.rows(); ++a)
    for (Eigen::Index b = 0; b < g.entries.cols(); ++b)
      if (a != b) m = std::max(m, std::abs(g.entries(a, b)));
  return m;
}

Result c5_box_positive() {
  Signal s = build_signal(SignalSpec{"box_kernel_phi"});
  CheckOptions opt;
  opt.tol = 1e-3;
  opt.hint = support_from(s.meta);
  auto reps = check_twisted_translates(s.f2(), {-2, -1, 0, 1, 2}, XiGrid{}, TruncationPolicy{}, opt);
  GramOptions go;
  go.tol = 1e-3;
  go.recheck = false;
  GramMatrix g = gram_2d(s.f2(), GramWindow{{0}, {-2, -1, 0, 1, 2}, {-2, -1, 0, 1, 2}, {}}, true, go);
  ConditionReport v = orthonormality_verdict(g);
  const bool ok = all_pass(reps) && v.verdict == Verdict::pass && v.max_dev < 1e-3 && g.excluded.empty();
  return {ok, fmt("(i) %.3e, (ii) %.3e, Gram 25x25 max |G - I| %.3e (tol 1e-3)", reps[0].max_dev, reps[1].max_dev,
                  v.max_dev)};
}

Result c6_gaussian_negative() {
  const Field2D f = gaussian2d();
  CheckOptions opt;
  auto reps = check_twisted_translates(f, {-1, 0, 1}, XiGrid{}, TruncationPolicy{}, opt);
  GramOptions go;
  go.recheck = false;
  GramMatrix g = gram_2d(f, GramWindow{{0}, {-1, 0, 1}, {-1, 0, 1}, {}}, true, go);
  const double off = max_offdiag(g);
  const bool curve_fails = reps[0].verdict == Verdict::fail && reps[0].max_dev > 0.05;
  const bool gram_fails = off > 0.05 && orthonormality_verdict(g).verdict == Verdict::fail;
  return {curve_fails && gram_fails, fmt("(i) deviation %.4f (> 0.05), max off-diagonal |G| %.4f (> 0.05)",
                                         reps[0].max_dev, off)};
}

// Shared bridges run for criteria 7 and 8.
const RunOutcome& bridges_run() {
  static const RunOutcome o = run_json(json{
      {"signal", {{"builder", "gaussian3d"}}},
      {"grids", {{"x", grid(6, 0.125)}, {"y", grid(6, 0.125)}, {"t", grid(10, 1.0 / 16)}}},
      {"checks", {"bridges"}},
      {"indices", {{"k", {-1, 0, 1}}, {"l", {-1, 0, 1}}, {"m", {-1, 0, 1}}}},
      {"bridges", {{"tol", 1e-3}, {"fg_tol", 1e-6}, {"scale_pairs", {{0, 1}, {-1, 0}, {0, 2}}}}},
      {"truncation", {{"s_range", 2}}}});
  return o;
}

Result c7_g_bridge() {
  const RunOutcome& o = bridges_run();
  const double g = report_dev(o, "bridge.G"), n = report_dev(o, "bridge.G_norm");
  return {g < 1e-3 && n < 1e-3 && report_verdict(o, "bridge.G") == "pass" &&
              report_verdict(o, "bridge.G_norm") == "pass",
          fmt("max |G bridge - quadrature| %.3e (tol 1e-3), norm rel %.3e (tol 1e-3)", g, n)};
}

Result c8_f_bridge() {
  const RunOutcome& o = bridges_run();
  const double f = report_dev(o, "bridge.F"), fg = report_dev(o, "bridge.FG");
  return {f < 1e-3 && fg < 1e-6 && report_verdict(o, "bridge.F") == "pass" &&
              report_verdict(o, "bridge.FG") == "pass",
          fmt("max |F bridge - quadrature| %.3e (tol 1e-3) over (0,1),(-1,0),(0,2); F-G %.3e (tol 1e-6)", f, fg)};
}

Result c9_lambda_profile() {
  const SignalSpec spec{"lambda_profile_psi"};
  Signal s = build_signal(spec);
  const auto hint = support_from(s.meta);
  const double floor = *s.meta.lambda_min;
  std::vector<KL> pairs;
  for (int k = -1; k <= 1; ++k)
    for (int l = -1; l <= 1; ++l) pairs.push_back({k, l});
  auto curves = compute_G(s.f3(), pairs, LambdaGrid{}, TruncationPolicy{}, hint);
  std::vector<DiagnosticCurve> g00, l_off;
  for (std::size_t c = 0; c < pairs.size(); ++c) {
    if (pairs[c].k == 0 && pairs[c].l == 0) g00.push_back(curves[c]);
    if (pairs[c].l != 0) l_off.push_back(curves[c]);
  }
  ConditionReport ri = condition_report("G00", g00, 1.0, 1e-2, floor);
  ConditionReport rl = condition_report("Gl", l_off, 0.0, 1e-3);

  // Oracle Gram on the y-window wide enough for l = +-1 translates.
  SignalGrids gg = s.meta.hint;
  gg.y = s.meta.gram_y;
  Signal sg = build_signal(spec, gg);
  GramOptions go;
  go.tol = 1e-2;
  go.recheck = false;
  GramMatrix g = gram_3d(sg.f3(), GramWindow{{0}, {-1, 0, 1}, {-1, 0, 1}, {-1, 0, 1}}, go);
  double same_k = 0.0, cross_k = 0.0;
  for (std::size_t a = 0; a < g.size(); ++a)
    for (std::size_t b = 0; b < g.size(); ++b) {
      const cplx target = a == b ? 1.0 : 0.0;
      const double d = std::abs(g.entries(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) - target);
      if (g.labels[a].k == g.labels[b].k)
        same_k = std::max(same_k, d);
      else
        cross_k = std::max(cross_k, d);
    }
  const bool ok = ri.verdict == Verdict::pass && rl.verdict == Verdict::pass && same_k < 1e-2 && cross_k > 1e-2 &&
                  g.excluded.empty();
  return {ok, fmt("G00 dev %.3e (tol 1e-2), G(l!=0) %.3e (tol 1e-3); Gram same-k max |G - I| %.3e (tol 1e-2), "
                  "cross-k %.3e (> 1e-2)",
                  ri.max_dev, rl.max_dev, same_k, cross_k)};
}

double mean_re(const DiagnosticCurve& c) {
  double s = 0.0;
  for (const cplx& v : c.values) s += v.real();
  return s / static_cast<double>(c.values.size());
}

Result c10_r_mean() {
  const XiGrid xg{512};
  const TruncationPolicy pol;
  Signal box = build_signal(SignalSpec{"box_kernel_phi"});
  const std::vector<std::pair<const char*, Field2D>> sigs = {{"gaussian", gaussian2d()}, {"box", box.f2()}};
  double worst = 0.0;
  std::string where;
  for (const auto& [name, phi] : sigs) {
    const double n2 = norm2(phi);
    for (int j : {-2, -1, 1, 2})
      for (int l : {-1, 0, 1}) {
        const double expect = r_target(j) * n2;
        const double rel = std::abs(mean_re(compute_R(phi, j, l, xg, pol)) - expect) / expect;
        if (rel > worst) {
          worst = rel;
          where = fmt("%s j=%d l=%d", name, j, l);
        }
      }
  }
  const bool exact = r_target(1) == 15.0 / 64.0;
  return {worst < 1e-3 && exact,
          fmt("max rel error %.3e at %s (tol 1e-3, 512 xi cells); r_target(1) = %.6f", worst, where.c_str(),
              r_target(1))};
}

Result c11_qr_structure() {
  const Field2D f = gaussian2d();
  const XiGrid xg{64};
  const TruncationPolicy pol;
  bool identical = true;
  double cs_excess = 0.0;
  for (int j : {-1, 1}) {
    std::vector<DiagnosticCurve> r;
    for (int l : {-1, 0, 1}) {
      r.push_back(compute_R(f, j, l, xg, pol));
      DiagnosticCurve q = compute_Q(f, j, l, l, xg, pol);
      for (std::size_t i = 0; i < q.values.size(); ++i) identical = identical && q.values[i].real() == r.back().values[i].real();
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        if (a == b) continue;
        DiagnosticCurve q = compute_Q(f, j, a - 1, b - 1, xg, pol);
        for (std::size_t i = 0; i < q.values.size(); ++i) {
          const double bound = std::sqrt(r[static_cast<std::size_t>(a)].values[i].real() *
                                         r[static_cast<std::size_t>(b)].values[i].real());
          cs_excess = std::max(cs_excess, std::abs(q.values[i]) - bound);
        }
      }
  }
  bool singular = false;
  try {
    compute_Q(f, 0, 0, 1, xg, pol);
  } catch (const SingularScaleError&) {
    singular = true;
  }
  return {identical && cs_excess <= 1e-14 && singular,
          fmt("Q_jll == R_jl bitwise: %s; max(|Q| - sqrt(R R)) %.2e; j = 0 raises: %s", identical ? "yes" : "no",
              cs_excess, singular ? "yes" : "no")};
}

Result c12_classical() {
  auto cfg = [](const char* w) {
    return json{{"signal", {{"builder", "gaussian2d"}}},
                {"checks", {"classical"}},
                {"classical", {{"wavelet", w}, {"tol", 1e-12}}}};
  };
  RunOutcome s = run_json(cfg("shannon")), g = run_json(cfg("gaussian"));
  const double si = report_dev(s, "classical.i"), sii = report_dev(s, "classical.ii");
  const bool ok = s.exit_code == 0 && si < 1e-12 && sii < 1e-12 && g.exit_code == 1;
  return {ok, fmt("Shannon (i) %.1e (ii) %.1e (tol 1e-12); Gaussian (i) %.3f (ii) %.3f -> %s", si, sii,
                  report_dev(g, "classical.i"), report_dev(g, "classical.ii"), g.exit_code == 1 ? "fails" : "passes")};
}

Result c13_designer() {
  DesignProblem p;
  p.seed = 1;
  DesignObjective obj(p);
  std::vector<double> theta(6);
  for (int i = 0; i < 6; ++i) theta[static_cast<std::size_t>(i)] = 0.3 * (i + 1) - 1.0;
  std::vector<double> scaled = theta;
  for (double& v : scaled) v *= 2.0;
  const bool invariant = obj(theta) == obj(scaled);
  DesignResult a = optimize(obj), b = optimize(obj);
  const double ratio = a.residual / a.initial_residual;
  const bool same = a.theta == b.theta && a.residual == b.residual && to_json(a).dump() == to_json(b).dump();
  return {invariant && ratio <= 0.5 && same && a.evaluations <= 500,
          fmt("scaling exact: %s; ratio %.4f (%.4g -> %.4g, %d evals, <= 0.5); equal seeds identical: %s",
              invariant ? "yes" : "no", ratio, a.initial_residual, a.residual, a.evaluations, same ? "yes" : "no")};
}

double g_elapsed = 0.0;

Result c14_reproducibility() {
  const json cfg = {{"signal", {{"builder", "gaussian2d"}}},
                    {"checks", {"thm-twisted-translates", "classical"}},
                    {"indices", {{"l", {-1, 0, 1}}}}};
  RunOutcome a = run_json(cfg), b = run_json(cfg);
  const bool same = a.report.dump(2) == b.report.dump(2);
  return {same && g_elapsed < 900.0,
          fmt("reports byte-identical: %s; suite runtime %.1f s (< 900 s)", same ? "yes" : "no", g_elapsed)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<int, std::function<Result()>>> all = {
      {1, c1_kernel_closed_form}, {2, c2_hilbert_schmidt}, {3, c3_wavelet_lemma}, {4, c4_kernel_lemmas},
      {5, c5_box_positive},       {6, c6_gaussian_negative}, {7, c7_g_bridge},   {8, c8_f_bridge},
      {9, c9_lambda_profile},     {10, c10_r_mean},          {11, c11_qr_structure}, {12, c12_classical},
      {13, c13_designer},         {14, c14_reproducibility}};
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  const auto t0 = std::chrono::steady_clock::now();
  int failed = 0;
  for (const auto& [n, fn] : all) {
    if (!wanted.empty() && !wanted.count(n)) continue;
    g_elapsed = seconds_since(t0);
    const auto t1 = std::chrono::steady_clock::now();
    Result r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r = {false, std::string("error: ") + e.what()};
    }
    std::printf("criterion %2d  %s  %s  [%.1f s]\n", n, r.pass ? "PASS" : "FAIL", r.detail.c_str(),
                seconds_since(t1));
    std::fflush(stdout);
    if (!r.pass) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed ? 1 : 0;
}
