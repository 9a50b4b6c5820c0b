#include <doctest.h>

#include <cmath>

#include "hwave/diagnostics_h.hpp"
#include "hwave/errors.hpp"
#include "hwave/heisenberg.hpp"
#include "hwave/signals.hpp"
#include "test_helpers.hpp"

using namespace hwave;
using namespace hwave::test;

namespace {

// Unit Gaussian on x in [-3, 3] step 1/16, y in [-3, 3] step 1/8, t in [-6, 6] step 1/16.
const Field3D& gaussian() {
  static const Field3D f = unit_gaussian3d(symmetric_grid(3.0, 1.0 / 16.0), symmetric_grid(3.0, 0.125),
                                           symmetric_grid(6.0, 1.0 / 16.0));
  return f;
}

TruncationPolicy fast_policy() {
  TruncationPolicy p;
  p.r_range = 3;
  p.s_range = 2;
  return p;
}

LambdaGrid lgrid() { return LambdaGrid{64, 3}; }

// <L_{(k,l,m)} psi, psi> for the unit Gaussian: the t-integral in closed
// form, then a fine trapezoid sum in (x, y).
double gaussian_translate_overlap(int k, int l, int m) {
  const double h = 1.0 / 64.0;
  double s = 0.0;
  for (int a = -512; a <= 512; ++a)
    for (int b = -512; b <= 512; ++b) {
      double x = a * h, y = b * h;
      double c = m + 0.5 * l * x - 0.5 * k * y;
      s += std::exp(-kPi * ((x - k) * (x - k) + x * x + (y - l) * (y - l) + y * y)) *
           std::exp(-kPi * c * c / 2.0) / std::sqrt(2.0);
    }
  return std::pow(2.0, 1.5) * s * h * h;
}

std::vector<KL> window9() {
  std::vector<KL> v;
  for (int k = -1; k <= 1; ++k)
    for (int l = -1; l <= 1; ++l) v.push_back({k, l});
  return v;
}

}  // namespace

TEST_CASE("G for the Gaussian: positivity, mean and bridge") {
  auto curves = compute_G(gaussian(), window9(), lgrid(), fast_policy());
  REQUIRE(curves.size() == 9);
  const DiagnosticCurve& g00 = curves[4];
  CHECK(g00.label() == "G(k=0,l=0)");
  double mean = 0.0;
  for (const cplx& v : g00.values) {
    CHECK(v.real() >= 0.0);
    CHECK(std::abs(v.imag()) < 1e-10);
    mean += v.real() / g00.cells;
  }
  CHECK(mean == doctest::Approx(1.0).epsilon(1e-3));
  for (const auto& c : curves) CHECK(c.converged);

  double worst = 0.0;
  for (std::size_t c = 0; c < curves.size(); ++c)
    for (int m = -1; m <= 1; ++m) {
      cplx b = g_bridge(curves[c], m);
      double o = gaussian_translate_overlap(curves[c].indices[0].second, curves[c].indices[1].second, m);
      worst = std::max(worst, std::abs(b - o));
    }
  CHECK(worst < 1e-3);
}

TEST_CASE("F reduces to G and bridges to the quadrature Gram") {
  const auto pol = fast_policy();
  std::vector<FIndex> idx;
  for (auto p : window9()) idx.push_back({0, p.k, 0, p.l});
  auto f = compute_F(gaussian(), 0, 0, idx, lgrid(), pol);
  auto g = compute_G(gaussian(), window9(), lgrid(), pol);
  double gap = 0.0;
  for (std::size_t c = 0; c < f.size(); ++c)
    for (int i = 0; i < 64; ++i) gap = std::max(gap, std::abs(f[c].values[i] - g[c].values[i]));
  CHECK(gap < 1e-6);

  // Cross-scale entries against wavelet elements sampled on the grid.
  const Field3D& psi = gaussian();
  std::vector<FIndex> cross = {{0, 0, 0, 0}, {1, 0, 0, -1}, {-1, 1, 1, 0}};
  auto fc = compute_F(psi, 0, 1, cross, lgrid(), pol);
  const int ms[3][2] = {{0, 0}, {1, 0}, {0, -1}};
  for (std::size_t c = 0; c < cross.size(); ++c) {
    const auto& t = cross[c];
    Field3D e1 = wavelet_element(psi, 0, {t.k1, t.l1, ms[c][0]});
    Field3D e2 = wavelet_element(psi, 1, {t.k2, t.l2, ms[c][1]});
    cplx oracle = inner_product(e1, e2);
    cplx bridge = f_bridge(fc[c], 0, 1, ms[c][0], ms[c][1]);
    CHECK(std::abs(oracle - bridge) < 1e-3);
    CHECK(fc[c].converged);
  }
}

TEST_CASE("F two scales apart matches the dilated-Gaussian overlap") {
  // nu = 16 mu passes the t-Nyquist frequency; those slices must not alias.
  auto f = compute_F(gaussian(), -1, 1, FIndex{0, 0, 0, 0}, lgrid(), fast_policy());
  const double closed = 8.0 / 17.0 * std::sqrt(32.0 / 257.0);
  CHECK(std::abs(f_bridge(f, -1, 1, 0, 0) - closed) < 1e-4);
}

TEST_CASE("F of the zero field vanishes") {
  Field3D zero(symmetric_grid(2.0, 0.25), symmetric_grid(2.0, 0.25), symmetric_grid(2.0, 0.25));
  auto f = compute_F(zero, -1, 1, FIndex{1, -1, 0, 1}, LambdaGrid{8, 1}, fast_policy());
  for (const cplx& v : f.values) CHECK(v == cplx{});
  auto rep = check_translates_h(zero, IndexWindow{}, LambdaGrid{8, 1}, fast_policy(), CheckOptions{});
  CHECK(rep[0].verdict == Verdict::fail);
  CHECK(rep[0].max_dev == doctest::Approx(1.0));
}

TEST_CASE("condition checks on the Gaussian fail with quantified deviations") {
  IndexWindow win;
  win.j = {0};
  win.dj = {1};
  auto reps = check_wavelet_h(gaussian(), win, lgrid(), fast_policy(), CheckOptions{});
  REQUIRE(reps.size() == 3);
  CHECK(reps[0].id == "translates_h.i");
  CHECK(reps[0].verdict == Verdict::fail);
  CHECK(reps[0].max_dev > 0.05);
  CHECK(reps[1].verdict == Verdict::fail);
  CHECK(reps[2].verdict == Verdict::fail);
  CHECK(reps[2].details.size() == 81);
  CHECK_FALSE(all_pass(reps));
}

TEST_CASE("compute_F argument checks") {
  CHECK_THROWS_AS(compute_F(gaussian(), 1, 0, FIndex{}, lgrid(), fast_policy()), ConfigError);
  CHECK_THROWS_AS(compute_G(gaussian(), 0, 1, LambdaGrid{0, 1}, fast_policy()), ConfigError);
}

TEST_CASE("condition_report verdicts") {
  DiagnosticCurve c{"G", CurveAxis::lambda, 4, {{"k", 0}, {"l", 0}}, {1.0, 1.001, 0.999, 1.0}, true, 0, 0};
  auto r = condition_report("x", {c}, 1.0, 1e-2);
  CHECK(r.verdict == Verdict::pass);
  CHECK(r.max_dev == doctest::Approx(1e-3));
  CHECK(r.points == 4);
  c.converged = false;
  CHECK(condition_report("x", {c}, 1.0, 1e-2).verdict == Verdict::unconverged);
  CHECK(condition_report("x", {c}, 1.0, 1e-4).verdict == Verdict::fail);
  // Cells below the floor are skipped.
  c.values[0] = 0.0;
  c.converged = true;
  CHECK(condition_report("x", {c}, 1.0, 1e-2, 0.25).verdict == Verdict::pass);
}

TEST_CASE("classical check: Shannon passes, Gaussian fails") {
  Grid1D g = make_grid(-4.0, 1.0 / 128.0, 1025);
  std::vector<cplx> shannon(g.count), gau(g.count), zero(g.count);
  for (std::size_t i = 0; i < g.count; ++i) {
    double x = g.point(i);
    bool in = (x >= -1.0 && x < -0.5) || (x >= 0.5 && x < 1.0);
    shannon[i] = in ? 1.0 : 0.0;
    gau[i] = gauss(x);
  }
  auto s = classical_check(shannon, g, 3, 1e-12);
  REQUIRE(s.size() == 2);
  CHECK(s[0].verdict == Verdict::pass);
  CHECK(s[0].max_dev < 1e-12);
  CHECK(s[1].verdict == Verdict::pass);
  auto q = classical_check(gau, g, 3, 1e-2);
  CHECK(q[0].verdict == Verdict::fail);
  CHECK(classical_check(zero, g, 1, 1e-2)[0].verdict == Verdict::fail);
  CHECK_THROWS_AS(classical_check(shannon, make_grid(-4.0, 0.1, 81), 1, 1e-2), ConfigError);
}

TEST_CASE("lambda profile G with support tightening") {
  SignalSpec spec;
  spec.builder = "lambda_profile_psi";
  Signal sig = build_signal(spec);
  auto hint = support_from(sig.meta);
  REQUIRE(hint);
  std::vector<KL> pairs = {{0, 0}, {0, 1}, {0, -1}, {1, 1}, {1, 0}};
  auto g = compute_G(sig.f3(), pairs, LambdaGrid{64, 4}, TruncationPolicy{}, hint);
  double d00 = 0.0, dl = 0.0;
  for (int i = 1; i < 64; ++i) d00 = std::max(d00, std::abs(g[0].values[i] - 1.0));
  for (int c = 1; c <= 3; ++c)
    for (int i = 0; i < 64; ++i) dl = std::max(dl, std::abs(g[c].values[i]));
  CHECK(d00 < 1e-2);
  CHECK(dl < 1e-3);
  CHECK(std::abs(g[0].values[0]) < 1e-12);  // below lambda_min
  CHECK(g[0].outer_range == 0);
  CHECK(g[0].inner_range == 0);
  double k1 = 0.0;
  for (int i = 1; i < 64; ++i) k1 = std::max(k1, std::abs(g[4].values[i]));
  CHECK(k1 > 0.05);
}
