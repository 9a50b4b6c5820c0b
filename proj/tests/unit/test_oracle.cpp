#include <doctest.h>

#include <cmath>

#include "hwave/errors.hpp"
#include "hwave/heisenberg.hpp"
#include "hwave/oracle.hpp"
#include "hwave/signals.hpp"
#include "hwave/weyl.hpp"
#include "test_helpers.hpp"

using namespace hwave;
using namespace hwave::test;

namespace {

// sqrt(2) exp(-pi (x^2 + y^2)) exp(-pi t^2): unit planar factor, unnormalized t-factor.
const Field3D& psi() {
  static const Field3D f = sample3d(symmetric_grid(4.0, 0.125), symmetric_grid(4.0, 0.125),
                                    symmetric_grid(6.0, 1.0 / 16.0), [](double x, double y, double t) {
                                      return cplx(std::sqrt(2.0) * gauss(x) * gauss(y) * gauss(t));
                                    });
  return f;
}

// <delta_{j1} L_a psi, delta_{j2} L_b psi> for psi above: closed-form t integral
// of two Gaussians, then a fine trapezoid sum over (x, y).
double gram_oracle(int j1, const LatticeIndex& a, int j2, const LatticeIndex& b) {
  auto factor = [](int j, const LatticeIndex& i, double x, double y, double& amp, double& centre) {
    const double s = std::ldexp(1.0, j);
    amp = s * s * std::sqrt(2.0) * std::exp(-kPi * ((s * x - i.k) * (s * x - i.k) + (s * y - i.l) * (s * y - i.l)));
    centre = (i.m - 0.5 * s * (y * i.k - x * i.l)) / (s * s);
  };
  const double al = std::ldexp(1.0, 4 * j1), be = std::ldexp(1.0, 4 * j2);
  const double h = 1.0 / 128.0;
  double sum = 0.0;
  for (int p = -1024; p <= 1024; ++p)
    for (int q = -1024; q <= 1024; ++q) {
      const double x = p * h, y = q * h;
      double a1, c1, a2, c2;
      factor(j1, a, x, y, a1, c1);
      factor(j2, b, x, y, a2, c2);
      if (a1 * a2 < 1e-300) continue;
      sum += a1 * a2 * std::exp(-kPi * al * be / (al + be) * (c1 - c2) * (c1 - c2)) / std::sqrt(al + be);
    }
  return sum * h * h;
}

Field2D gaussian2(double h) { return unit_gaussian2d(symmetric_grid(5.0, h), symmetric_grid(5.0, h)); }

std::size_t index_of(const GramMatrix& g, const GramLabel& l) {
  for (std::size_t i = 0; i < g.labels.size(); ++i)
    if (g.labels[i] == l) return i;
  FAIL("label missing: " << l.str());
  return 0;
}

double hermitian_gap(const GramMatrix& g) {
  return (g.entries - g.entries.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("gram_3d of the Gaussian: diagonal, t overlap, Hermitian, closed forms") {
  GramOptions opt;
  opt.recheck = false;
  GramMatrix g = gram_3d(psi(), GramWindow{}, opt);
  REQUIRE(g.size() == 81);
  CHECK(g.excluded.empty());
  const double n2 = norm2(psi());
  for (Eigen::Index a = 0; a < 81; ++a) CHECK(std::abs(g.entries(a, a) - n2) < 1e-5);
  CHECK(hermitian_gap(g) < 1e-13);
  const auto o = index_of(g, {0, 0, 0, 0}), o1 = index_of(g, {0, 0, 0, 1});
  CHECK(std::abs(g.entries(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(o1)) -
                 std::exp(-kPi / 2.0) / std::sqrt(2.0)) < 1e-8);
  const std::vector<std::pair<GramLabel, GramLabel>> picks = {
      {{0, 1, 0, 0}, {0, 0, 1, -1}}, {{-1, 0, 0, 0}, {1, 0, 0, 0}}, {{-1, 1, -1, 1}, {0, 0, 1, 0}},
      {{1, 1, 1, 0}, {0, 1, 0, 1}},  {{0, -1, 1, 0}, {1, 1, 0, -1}}};
  for (const auto& [la, lb] : picks) {
    const auto a = index_of(g, la), b = index_of(g, lb);
    const double ref = gram_oracle(la.j, {la.k, la.l, *la.m}, lb.j, {lb.k, lb.l, *lb.m});
    INFO(la.str() << " " << lb.str() << " ref " << ref);
    CHECK(std::abs(g.entries(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) - ref) < 1e-6);
  }
}

TEST_CASE("gram_3d: slabs do not change entries, recheck and coverage flags") {
  GramWindow w;
  w.j = {0, 1};
  w.k = {0, 1};
  w.l = {0};
  w.m = {-1, 0};
  GramOptions one;
  one.recheck = false;
  GramOptions many = one;
  many.slab_bytes = 1;  // one x-row per slab
  GramMatrix a = gram_3d(psi(), w, one), b = gram_3d(psi(), w, many);
  CHECK((a.entries - b.entries).cwiseAbs().maxCoeff() < 1e-13);

  GramOptions rc;
  GramMatrix c = gram_3d(psi(), w, rc);
  CHECK(c.resolution_gap >= 0.0);
  CHECK(c.resolution_gap < 1e-4);
  CHECK(c.quadrature_limited.empty());

  w.k = {0, 6};
  GramMatrix d = gram_3d(psi(), w, one);
  CHECK(d.size() == 4);
  CHECK(d.excluded.size() == 4);
  CHECK(!d.warnings.empty());
  CHECK_THROWS_AS(gram_3d(psi(), GramWindow{{}, {0}, {0}, {0}}), ConfigError);
}

TEST_CASE("gram_3d agrees with the kernel pairing on a 3x3 window") {
  const Field3D f = unit_gaussian3d(symmetric_grid(3.0, 0.125), symmetric_grid(3.0, 0.125),
                                    symmetric_grid(5.0, 0.125));
  GramWindow w;
  w.j = {0};
  w.k = {-1, 0, 1};
  w.l = {0};
  w.m = {0};
  GramOptions opt;
  opt.recheck = false;
  GramMatrix g = gram_3d(f, w, opt);
  TruncationPolicy pol;
  pol.r_range = 3;
  pol.s_range = 2;
  ResampleOptions quiet;
  quiet.check_coverage = false;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      Field3D ea = wavelet_element(f, 0, {a - 1, 0, 0}, quiet), eb = wavelet_element(f, 0, {b - 1, 0, 0}, quiet);
      PairResult p = pair_via_kernels(ea, eb, LambdaGrid{64, 3}, pol);
      CHECK(std::abs(g.entries(a, b) - p.value) < 1e-3);
    }
}

TEST_CASE("gram_2d of the Gaussian: closed forms and self-convergence") {
  GramOptions opt;
  opt.recheck = false;
  GramWindow w;
  w.j = {-1, 0, 1};
  w.k = {0, 1};
  w.l = {0};
  GramMatrix g = gram_2d(gaussian2(1.0 / 16.0), w, true, opt);
  for (Eigen::Index a = 0; a < g.entries.rows(); ++a) CHECK(std::abs(g.entries(a, a) - 1.0) < 1e-6);
  CHECK(hermitian_gap(g) < 1e-14);
  auto at = [&](const GramLabel& a, const GramLabel& b) {
    return g.entries(static_cast<Eigen::Index>(index_of(g, a)), static_cast<Eigen::Index>(index_of(g, b)));
  };
  // <phi, D_2 phi> = 4/5, <D_{1/2} phi, D_2 phi> = 8/17.
  CHECK(std::abs(at({0, 0, 0}, {1, 0, 0}) - 0.8) < 1e-10);
  CHECK(std::abs(at({-1, 0, 0}, {0, 0, 0}) - 0.8) < 1e-10);
  CHECK(std::abs(at({-1, 0, 0}, {1, 0, 0}) - 8.0 / 17.0) < 1e-10);
  // <phi, T_{(1,0)} phi> = exp(-5 pi / 8) at parameter 1.
  const cplx t10 = at({0, 0, 0}, {0, 1, 0});
  CHECK(std::abs(t10 - std::exp(-5.0 * kPi / 8.0)) < 1e-10);
  GramMatrix fine = gram_2d(gaussian2(1.0 / 32.0), w, true, opt);
  CHECK((fine.entries - g.entries).cwiseAbs().maxCoeff() < 1e-6);

  GramMatrix plain = gram_2d(gaussian2(1.0 / 16.0), w, false, opt);
  CHECK(std::abs(plain.entries(static_cast<Eigen::Index>(index_of(plain, {0, 0, 0})),
                               static_cast<Eigen::Index>(index_of(plain, {0, 1, 0}))) -
                 std::exp(-kPi / 2.0)) < 1e-10);
  CHECK(orthonormality_verdict(g).verdict == Verdict::fail);
  Field2D off = unit_gaussian2d(make_grid(-5.05, 0.1, 101), make_grid(-5.0, 0.1, 101));
  CHECK_THROWS_AS(gram_2d(off, w, true, opt), ConfigError);
}

TEST_CASE("gram_2d: the indicator-kernel phi is orthonormal under twisted translates") {
  Signal s = build_signal(SignalSpec{"box_kernel_phi"});
  const Field2D& phi = std::get<Field2D>(s.field);
  GramWindow w;
  w.j = {0};
  w.k = w.l = {-2, -1, 0, 1, 2};
  GramOptions opt;
  GramMatrix g = gram_2d(phi, w, true, opt);
  REQUIRE(g.size() == 25);
  ConditionReport r = orthonormality_verdict(g);
  INFO("max dev " << r.max_dev << " gap " << g.resolution_gap);
  CHECK(r.verdict == Verdict::pass);
  CHECK(r.max_dev < 1e-3);
  GramMatrix plain = gram_2d(phi, w, false, opt);
  CHECK(orthonormality_verdict(plain).verdict == Verdict::fail);
}

TEST_CASE("orthonormality verdict and serialization") {
  GramMatrix g;
  g.labels = {{0, 0, 0, std::nullopt}, {0, 1, 0, std::nullopt}};
  g.entries = Eigen::MatrixXcd::Identity(2, 2);
  ConditionReport r = orthonormality_verdict(g);
  CHECK(r.verdict == Verdict::pass);
  CHECK(r.max_dev == 0.0);
  g.entries(0, 1) = cplx(0.25, -0.5);
  g.entries(1, 0) = cplx(0.25, 0.5);
  CHECK(orthonormality_verdict(g).verdict == Verdict::fail);
  const std::string csv = to_csv(g);
  CHECK(csv.rfind("label,\"(0,0,0)\",\"(0,1,0)\"\n", 0) == 0);
  CHECK(csv.find("0.25-0.5i") != std::string::npos);
  CHECK(csv.find("1+0i") != std::string::npos);
  auto j = to_json(g);
  CHECK(j["index_names"].size() == 3);
  CHECK(j["im"][1][0] == 0.5);
  CHECK(j["resolution_gap"].get<double>() == 0.0);
  GramMatrix empty;
  CHECK(orthonormality_verdict(empty).verdict == Verdict::fail);
}
