#include "hwave/numerics.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "hwave/errors.hpp"
#include "hwave/fft.hpp"

namespace hwave {

std::string to_string(Boundary b) {
  switch (b) {
    case Boundary::zero:
      return "zero";
    case Boundary::periodic:
      return "periodic";
    case Boundary::antiperiodic:
      return "antiperiodic";
  }
  return "zero";
}

Boundary boundary_from_string(const std::string& s) {
  if (s == "zero") return Boundary::zero;
  if (s == "periodic") return Boundary::periodic;
  if (s == "antiperiodic") return Boundary::antiperiodic;
  throw ConfigError("unknown boundary '" + s + "'");
}

double Grid1D::weight(std::size_t i) const {
  if (boundary == Boundary::zero && (i == 0 || i + 1 == count)) return 0.5 * step;
  return step;
}

std::optional<std::ptrdiff_t> Grid1D::node(double x, double tol) const {
  double f = (x - start) / step;
  double r = std::nearbyint(f);
  if (std::abs(f - r) > tol) return std::nullopt;
  return static_cast<std::ptrdiff_t>(r);
}

Grid1D make_grid(double start, double step, long long count, Boundary b) {
  if (!std::isfinite(start) || !std::isfinite(step) || !(step > 0.0))
    throw ConfigError("grid step must be positive and finite");
  if (count < 2) throw ConfigError("grid count must be at least 2");
  return Grid1D{start, step, static_cast<std::size_t>(count), b};
}

Grid1D symmetric_grid(double half_width, double step) {
  double n = half_width / step;
  if (!(half_width > 0.0) || std::abs(n - std::nearbyint(n)) > 1e-9)
    throw ConfigError("half width must be a positive multiple of the step");
  return make_grid(-half_width, step, 2 * static_cast<long long>(std::nearbyint(n)) + 1);
}

std::vector<double> axis_weights(const Grid1D& g) {
  std::vector<double> w(g.count);
  for (std::size_t i = 0; i < g.count; ++i) w[i] = g.weight(i);
  return w;
}

void TruncationPolicy::validate() const {
  if (r_range < 0 || s_range < 0 || m_range < 0)
    throw ConfigError("truncation ranges must be non-negative");
  if (!(tail_eps > 0.0 && tail_eps < 1.0)) throw ConfigError("tail_eps must lie in (0, 1)");
  if (s_cap < s_range) throw ConfigError("s_cap must be at least s_range");
}

PeriodizedSum periodize_sum(const std::function<cplx(int)>& term, int range, double tail_eps) {
  if (range < 0) throw ConfigError("negative periodization range");
  std::vector<cplx> terms(2 * static_cast<std::size_t>(range) + 1);
  for (int i = -range; i <= range; ++i) terms[static_cast<std::size_t>(i + range)] = term(i);
  CompensatedSum total;
  for (const cplx& t : terms) total += t;
  PeriodizedSum out{total.value(), true, range};
  if (!std::isfinite(out.value.real()) || !std::isfinite(out.value.imag()))
    throw NumericalError("non-finite periodized sum");
  if (range > 0) {
    double ring = std::abs(terms.front()) + std::abs(terms.back());
    out.converged = !(ring > tail_eps * std::abs(out.value));
  }
  return out;
}

PeriodizedSum periodize_sum(const std::function<cplx(int)>& term, const TruncationPolicy& pol,
                            SumIndex which) {
  pol.validate();
  int range = which == SumIndex::r ? pol.r_range : which == SumIndex::s ? pol.s_range : pol.m_range;
  return periodize_sum(term, range, pol.tail_eps);
}

void require_finite(std::span<const cplx> v, const char* what) {
  for (const cplx& z : v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw NumericalError(std::string("non-finite sample in ") + what);
}

cplx integrate(const Field2D& f) {
  require_finite(f.data, "integrate");
  auto wy = axis_weights(f.gy);
  CompensatedSum s;
  for (std::size_t i = 0; i < f.nx(); ++i) {
    double wx = f.gx.weight(i);
    for (std::size_t j = 0; j < f.ny(); ++j) s += f.at(i, j) * (wx * wy[j]);
  }
  return s.value();
}

cplx integrate(const Field3D& f) {
  require_finite(f.data, "integrate");
  auto wt = axis_weights(f.gt);
  CompensatedSum s;
  for (std::size_t i = 0; i < f.nx(); ++i)
    for (std::size_t j = 0; j < f.ny(); ++j) {
      double wxy = f.gx.weight(i) * f.gy.weight(j);
      auto col = f.column(i, j);
      for (std::size_t k = 0; k < f.nt(); ++k) s += col[k] * (wxy * wt[k]);
    }
  return s.value();
}

cplx inner_product(const Field2D& f, const Field2D& g) {
  if (!(f.gx == g.gx) || !(f.gy == g.gy)) throw ConfigError("inner_product: grid mismatch");
  auto wy = axis_weights(f.gy);
  CompensatedSum s;
  for (std::size_t i = 0; i < f.nx(); ++i) {
    double wx = f.gx.weight(i);
    for (std::size_t j = 0; j < f.ny(); ++j)
      s += f.at(i, j) * std::conj(g.at(i, j)) * (wx * wy[j]);
  }
  return s.value();
}

cplx inner_product(const Field3D& f, const Field3D& g) {
  if (!(f.gx == g.gx) || !(f.gy == g.gy) || !(f.gt == g.gt))
    throw ConfigError("inner_product: grid mismatch");
  auto wt = axis_weights(f.gt);
  std::size_t ncol = f.nx() * f.ny();
  std::vector<cplx> partial(ncol);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(ncol); ++c) {
    std::size_t i = static_cast<std::size_t>(c) / f.ny(), j = static_cast<std::size_t>(c) % f.ny();
    auto a = f.column(i, j);
    auto b = g.column(i, j);
    CompensatedSum s;
    for (std::size_t k = 0; k < f.nt(); ++k) s += a[k] * std::conj(b[k]) * wt[k];
    partial[static_cast<std::size_t>(c)] = s.value() * (f.gx.weight(i) * f.gy.weight(j));
  }
  CompensatedSum s;
  for (const cplx& p : partial) s += p;
  return s.value();
}

double norm2(const Field2D& f) { return inner_product(f, f).real(); }
double norm2(const Field3D& f) { return inner_product(f, f).real(); }

namespace {

std::vector<cplx> ft_direct(std::span<const cplx> f, const Grid1D& xg, double lambda,
                            const Grid1D& vg) {
  std::vector<cplx> out(vg.count);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(vg.count); ++m) {
    double v = vg.point(static_cast<std::size_t>(m));
    CompensatedSum s;
    for (std::size_t n = 0; n < xg.count; ++n) {
      double ph = kPi * lambda * xg.point(n) * v;
      s += f[n] * xg.weight(n) * cplx(std::cos(ph), std::sin(ph));
    }
    out[static_cast<std::size_t>(m)] = s.value();
  }
  return out;
}

cplx expi(double a) { return {std::cos(a), std::sin(a)}; }

// Bluestein evaluation of the same sum on uniform v grids.
std::vector<cplx> ft_chirp(std::span<const cplx> f, const Grid1D& xg, double lambda,
                           const Grid1D& vg) {
  const std::size_t n_in = xg.count, n_out = vg.count;
  const double x0 = xg.start, hx = xg.step, v0 = vg.start, hv = vg.step;
  // exp(i c k^2 / 2) with the multiple of pi reduced first; exact for dyadic steps.
  const double q = 0.5 * lambda * hx * hv;
  auto quad = [q](double k) { return expi(kPi * std::fmod(q * k * k, 2.0)); };
  std::size_t len = fft::good_size(n_in + n_out - 1);
  std::vector<cplx> a(len), b(len);
  for (std::size_t n = 0; n < n_in; ++n) {
    double nn = static_cast<double>(n);
    a[n] = f[n] * xg.weight(n) * expi(kPi * std::fmod(lambda * hx * v0 * nn, 2.0)) * quad(nn);
  }
  // b_k = exp(-i c k^2 / 2) for k in (-(n_in - 1), n_out - 1], stored circularly.
  for (std::size_t k = 0; k < n_out; ++k) {
    double kk = static_cast<double>(k);
    b[k] = std::conj(quad(kk));
  }
  for (std::size_t k = 1; k < n_in; ++k) {
    double kk = static_cast<double>(k);
    b[len - k] = std::conj(quad(kk));
  }
  fft::forward(a);
  fft::forward(b);
  for (std::size_t i = 0; i < len; ++i) a[i] *= b[i];
  fft::inverse(a);
  std::vector<cplx> out(n_out);
  const double scale = 1.0 / static_cast<double>(len);
  for (std::size_t m = 0; m < n_out; ++m) {
    double mm = static_cast<double>(m);
    out[m] = a[m] * scale * expi(kPi * std::fmod(lambda * x0 * (v0 + hv * mm), 2.0)) * quad(mm);
  }
  return out;
}

}  // namespace

std::vector<cplx> oscillatory_ft(std::span<const cplx> f, const Grid1D& xg, double lambda,
                                 const Grid1D& vg, FtMethod method) {
  if (f.size() != xg.count) throw ConfigError("oscillatory_ft: sample count mismatch");
  require_finite(f, "oscillatory_ft");
  if (!std::isfinite(lambda)) throw NumericalError("oscillatory_ft: non-finite lambda");
  return method == FtMethod::chirp ? ft_chirp(f, xg, lambda, vg) : ft_direct(f, xg, lambda, vg);
}

void set_threads(int n) {
  static const int initial = omp_get_max_threads();
  omp_set_num_threads(n > 0 ? n : initial);
}

int threads() { return omp_get_max_threads(); }

}  // namespace hwave
