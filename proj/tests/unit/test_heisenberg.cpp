#include "doctest.h"

#include <random>

#include "hwave/errors.hpp"
#include "hwave/heisenberg.hpp"
#include "hwave/twisted.hpp"
#include "test_helpers.hpp"

using namespace hwave;
using hwave::test::gauss;

namespace {

bool close(const HPoint& a, const HPoint& b, double tol) {
  return std::abs(a.x - b.x) <= tol && std::abs(a.y - b.y) <= tol && std::abs(a.t - b.t) <= tol;
}

double max_diff(const Field3D& a, const Field3D& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

}  // namespace

TEST_CASE("group law examples") {
  HPoint p = group_mul({1, 0, 0}, {0, 1, 0});
  CHECK(close(p, {1, 1, -0.5}, 0));
  CHECK(close(group_mul({2, 3, 5}, {}), {2, 3, 5}, 0));
  HPoint a{1, 2, 3}, b{4, 5, 6}, c{7, 8, 9};
  CHECK(close(group_mul(group_mul(a, b), c), group_mul(a, group_mul(b, c)), 1e-12));
  CHECK(close(group_inv({2, 3, 5}), {-2, -3, -5}, 0));
  CHECK(close(group_inv({}), {}, 0));
}

TEST_CASE("group law properties on random triples") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int n = 0; n < 1000; ++n) {
    HPoint a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)}, c{u(rng), u(rng), u(rng)};
    CHECK(close(group_mul(group_mul(a, b), c), group_mul(a, group_mul(b, c)), 1e-11));
    CHECK(close(group_mul(a, HPoint{}), a, 0));
    CHECK(close(group_mul(HPoint{}, a), a, 0));
    CHECK(close(group_mul(a, group_inv(a)), {}, 1e-12));
  }
}

TEST_CASE("translations and dilations of the Gaussian") {
  Grid1D g = symmetric_grid(6, 1.0 / 16);
  Field3D psi = hwave::test::unit_gaussian3d(g, g, g);
  const double n0 = norm2(psi);

  Field3D shifted = left_translate(psi, 0, 0, 1);
  double err = 0;
  for (std::size_t i = 0; i < g.count; i += 7)
    for (std::size_t j = 0; j < g.count; j += 5)
      for (std::size_t k = 0; k < g.count; ++k) {
        double t = g.point(k) - 1;
        double expect = std::abs(t) > 6 ? 0 : std::pow(2.0, 0.75) * gauss(g.point(i)) * gauss(g.point(j)) * gauss(t);
        err = std::max(err, std::abs(shifted.at(i, j, k) - expect));
      }
  CHECK(err < 1e-12);
  CHECK(max_diff(left_translate(psi, 0, 0, 0), psi) == 0.0);

  Field3D lt = left_translate(psi, 1, 1, 0);
  CHECK(std::abs(std::sqrt(norm2(lt)) - std::sqrt(n0)) < 1e-6);

  CHECK(max_diff(dilate_h(psi, 1.0), psi) == 0.0);
  Field3D raw = hwave::test::sample3d(g, g, g, [](double x, double y, double t) {
    return cplx(gauss(x) * gauss(y) * gauss(t));
  });
  Field3D d2 = dilate_h(raw, 2.0);
  auto i1 = *g.node(1.0), i0 = *g.node(0.0);
  CHECK(std::abs(d2.at(static_cast<std::size_t>(i1), static_cast<std::size_t>(i0), static_cast<std::size_t>(i0)) -
                 4 * std::exp(-4 * kPi)) < 1e-15);
  CHECK(std::abs(4 * std::exp(-4 * kPi) - 1.39493e-5) < 1e-10);
  CHECK(std::abs(std::sqrt(norm2(dilate_h(psi, 2.0))) - 1.0) < 1e-6);
  CHECK(std::abs(std::sqrt(norm2(dilate_h(psi, 0.5))) - 1.0) < 1e-6);
  CHECK_THROWS_AS(dilate_h(psi, 0.0), ConfigError);
}

TEST_CASE("wavelet elements") {
  Grid1D g = symmetric_grid(6, 1.0 / 16);
  Field3D psi = hwave::test::unit_gaussian3d(g, g, g);
  CHECK(max_diff(wavelet_element(psi, 0, {}), psi) == 0.0);
  CHECK(max_diff(wavelet_element(psi, 0, {1, -1, 1}), left_translate(psi, 1, -1, 1)) < 1e-13);
  Field3D w = wavelet_element(psi, 1, {1, 1, 1});
  CHECK(std::abs(std::sqrt(norm2(w)) - 1.0) < 1e-5);
  // Element equals dilate_h after left_translate.
  Field3D composed = dilate_h(left_translate(psi, 1, 1, 1), 2.0);
  CHECK(max_diff(w, composed) < 1e-8);
  CHECK_THROWS_AS(wavelet_element(psi, 9, {}), ConfigError);
}

TEST_CASE("support escape is reported") {
  Grid1D g = symmetric_grid(3, 1.0 / 8);
  Field3D psi = hwave::test::unit_gaussian3d(g, g, g);
  CHECK_THROWS_AS(left_translate(psi, 3, 0, 0), DomainCoverageError);
}

TEST_CASE("t_transform examples") {
  Grid1D g = symmetric_grid(6, 1.0 / 16);
  Field3D psi = hwave::test::unit_gaussian3d(g, g, g);
  Field2D f1 = t_transform(psi, 1.0);
  double err = 0;
  for (std::size_t i = 0; i < g.count; ++i)
    for (std::size_t j = 0; j < g.count; ++j) {
      double phi = std::pow(2.0, 0.75) * gauss(g.point(i)) * gauss(g.point(j));
      err = std::max(err, std::abs(f1.at(i, j) - phi * std::exp(-kPi)));
    }
  CHECK(err < 1e-12);

  Field2D f0 = t_transform(psi, 0.0);
  double e0 = 0;
  for (std::size_t i = 0; i < g.count; i += 9)
    for (std::size_t j = 0; j < g.count; j += 9) {
      CompensatedSum s;
      for (std::size_t k = 0; k < g.count; ++k) s += psi.at(i, j, k) * g.weight(k);
      e0 = std::max(e0, std::abs(s.value() - f0.at(i, j)));
    }
  CHECK(e0 < 1e-14);

  Field3D shifted = left_translate(psi, 0, 0, 1);
  for (double lambda : {0.3, 1.0}) {
    Field2D a = t_transform(shifted, lambda);
    Field2D b = t_transform(psi, lambda);
    cplx ph = std::polar(1.0, 2 * kPi * lambda);
    double m = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - ph * b.data[i]));
    CHECK(m < 1e-8);
  }
}

TEST_CASE("t-transform of wavelet elements follows the twisted dilation identity") {
  // (d_{2^j} L_{k,l,m} psi)^lambda = 2^{-j} e^{2 pi i mu m} D_{2^j} T^{mu}_{k,l} psi^{mu}, mu = lambda 4^{-j}
  Grid1D gxy = symmetric_grid(8, 1.0 / 8);
  Grid1D gt = symmetric_grid(8, 1.0 / 16);
  Field3D psi = hwave::test::unit_gaussian3d(gxy, gxy, gt);
  struct Case {
    int j;
    Grid1D ot;
  };
  Case cases[] = {{-1, symmetric_grid(20, 1.0 / 8)}, {0, gt}, {1, symmetric_grid(3, 1.0 / 32)}};
  double worst = 0;
  for (const auto& c : cases) {
    for (LatticeIndex idx : {LatticeIndex{1, -1, 1}, LatticeIndex{0, 1, -1}}) {
      Field3D w = wavelet_element(psi, c.j, idx, gxy, gxy, c.ot);
      for (double lambda : {0.5 / 64, 0.5, 63.5 / 64}) {
        double mu = lambda * std::ldexp(1.0, -2 * c.j);
        Field2D left = t_transform(w, lambda);
        // psi^mu is roundoff noise for the largest mu, so coverage checks are off here.
        ResampleOptions quiet;
        quiet.check_coverage = false;
        Field2D right = dilate_2d(twisted_translate(t_transform(psi, mu), idx.k, idx.l, mu, quiet), c.j, quiet);
        cplx factor = std::ldexp(1.0, -c.j) * std::polar(1.0, 2 * kPi * mu * idx.m);
        double m = 0;
        for (std::size_t i = 0; i < left.data.size(); ++i)
          m = std::max(m, std::abs(left.data[i] - factor * right.data[i]));
        worst = std::max(worst, m);
      }
    }
  }
  MESSAGE("worst lemma deviation " << worst);
  CHECK(worst < 1e-6);
}
