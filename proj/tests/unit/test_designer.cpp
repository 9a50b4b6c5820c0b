#include <doctest.h>

#include <cmath>
#include <random>

#include "hwave/designer.hpp"
#include "hwave/errors.hpp"
#include "test_helpers.hpp"

using namespace hwave;
using namespace hwave::test;

namespace {

// P_{0,0,0,l}(xi) for the unit Gaussian: sum over m and eta of K(xi + m, eta) K(xi + m + l, eta)
// with K(a, b) = sqrt(2) exp(-pi (b - a)^2) exp(-pi (a + b)^2 / 4).
double p00_oracle(int l, double xi) {
  auto k = [](double a, double b) {
    return std::sqrt(2.0) * std::exp(-kPi * (b - a) * (b - a)) * std::exp(-kPi * (a + b) * (a + b) / 4.0);
  };
  const double h = 1.0 / 64.0;
  double s = 0.0;
  for (int m = -16; m <= 16; ++m)
    for (int e = -512; e <= 512; ++e) s += k(xi + m, e * h) * k(xi + m + l, e * h);
  return s * h;
}

std::vector<double> random_theta(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> t(n);
  for (double& v : t) v = u(rng);
  return t;
}

}  // namespace

TEST_CASE("designer residual: scaling invariance and non-negativity") {
  DesignObjective obj{DesignProblem{}};
  for (unsigned seed : {1u, 2u, 3u}) {
    auto th = random_theta(6, seed);
    auto th2 = th;
    for (double& v : th2) v *= 2.0;
    const double r = obj(th);
    CHECK(r >= 0.0);
    CHECK(r == obj(th2));
    auto th3 = th;
    for (double& v : th3) v *= 0.37;
    CHECK(std::abs(r - obj(th3)) < 1e-12 * (1.0 + r));
  }
}

TEST_CASE("designer residual: Gaussian fails condition (i) macroscopically") {
  DesignObjective obj{DesignProblem{}};
  std::vector<double> e1(6, 0.0);
  e1[0] = 1.0;
  double want = 0.0;
  const XiGrid xg;
  for (int i = 0; i < xg.cells; ++i) {
    const double xi = xg.point(i);
    want += std::pow(p00_oracle(0, xi) - 1.0, 2) + std::pow(p00_oracle(1, xi), 2) + std::pow(p00_oracle(-1, xi), 2);
  }
  const double r = obj(e1);
  CHECK(r > 0.1);
  CHECK(std::abs(r - want) < 1e-6 * want);
  const auto t = obj.terms(e1);
  CHECK(t[2] == 0.0);
  CHECK(t[0] + t[1] == doctest::Approx(r).epsilon(1e-15));

  DesignProblem only_ii;
  only_ii.weights = {0.0, 1.0, 0.0, 0.0, 0.0};
  CHECK(DesignObjective(only_ii)(e1) == t[1]);
}

TEST_CASE("designer residual: dilation window adds conditions (iii)-(v)") {
  DesignProblem p;
  p.window.j = {1};
  p.window.l = {0, 1};
  DesignObjective obj(p);
  std::vector<double> e1(6, 0.0);
  e1[0] = 1.0;
  const auto t = obj.terms(e1);
  for (double v : t) CHECK(v > 0.0);
  double s = 0.0;
  for (double v : t) s += v;
  CHECK(obj(e1) == doctest::Approx(s).epsilon(1e-15));
}

TEST_CASE("designer: invalid problems and degenerate candidates") {
  DesignObjective obj{DesignProblem{}};
  CHECK_THROWS_AS(obj(std::vector<double>(6, 0.0)), DegenerateCandidateError);
  CHECK_THROWS_AS(obj(std::vector<double>(5, 1.0)), ConfigError);
  DesignProblem p;
  p.budget = 6;
  CHECK_THROWS_AS(DesignObjective{p}, ConfigError);
  p = DesignProblem{};
  p.weights = {0.0, 0.0, 1.0, 1.0, 1.0};  // (iii)-(v) are off without dilations
  CHECK_THROWS_AS(DesignObjective{p}, ConfigError);
  p = DesignProblem{};
  p.basis_size = 0;
  CHECK_THROWS_AS(DesignObjective{p}, ConfigError);
  CHECK_THROWS_AS(optimize(DesignProblem{}, std::vector<double>(6, 0.0)), DegenerateCandidateError);
}

TEST_CASE("designer optimize: equal seeds give identical traces, running best is monotone") {
  DesignProblem p;
  p.budget = 60;
  p.seed = 7;
  DesignObjective obj(p);
  const auto a = optimize(obj);
  const auto b = optimize(obj);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].value == b.trace[i].value);
    CHECK(a.trace[i].best == b.trace[i].best);
  }
  CHECK(a.theta == b.theta);
  CHECK(a.evaluations == 60);
  CHECK(a.budget_exhausted);
  CHECK(a.trace.front().value == a.initial_residual);
  for (std::size_t i = 1; i < a.trace.size(); ++i) CHECK(a.trace[i].best <= a.trace[i - 1].best);
  CHECK(a.residual == a.trace.back().best);
  CHECK(a.residual < a.initial_residual);
  CHECK(obj(a.theta) == a.residual);

  p.seed = 8;
  CHECK(optimize(p).initial_residual != a.initial_residual);
}

TEST_CASE("designer optimize: no downhill move leaves the start point unchanged") {
  // With one basis element every nonzero theta gives the same candidate up to sign.
  DesignProblem p;
  p.basis_size = 1;
  p.budget = 200;
  const std::vector<double> init = {0.8};
  const auto r = optimize(p, init);
  CHECK(r.theta == init);
  CHECK(!r.budget_exhausted);
  CHECK(r.residual == r.initial_residual);
}

TEST_CASE("designer: phi_box is poorly represented by 36 Hermite functions") {
  // phi_box decays like 1/x, so the degree <= 7 projection keeps about 84% of
  // its norm and the projected candidate is far from passing (i), (ii).
  DesignProblem p;
  p.basis_size = 36;
  p.gx = symmetric_grid(5.0, 1.0 / 16.0);
  p.gy = symmetric_grid(5.0, 1.0 / 16.0);
  DesignObjective obj(p);
  // e^{i pi x} phi_box is real; the modulation leaves the Gram moduli unchanged.
  const Field2D f = sample2d(p.gx, p.gy, [](double x, double y) {
    const double w = 1.0 - std::abs(y);
    if (w <= 0.0) return cplx{};
    const double a = kPi * x * w;
    return cplx(a == 0.0 ? w : w * std::sin(a) / a);
  });
  const auto th = project(f, obj);
  double kept = 0.0;
  for (double v : th) kept += v * v;
  CHECK(kept == doctest::Approx(0.841).epsilon(1e-3));
  CHECK(obj(th) > 1.0);
}
