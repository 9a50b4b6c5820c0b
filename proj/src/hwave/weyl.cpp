#include "hwave/weyl.hpp"

#include <algorithm>
#include <cmath>

#include "hwave/errors.hpp"
#include "hwave/fft.hpp"
#include "hwave/heisenberg.hpp"
#include "hwave/resample.hpp"

namespace hwave {
namespace {

cplx expi(double a) { return {std::cos(a), std::sin(a)}; }

// Columns exp(2 pi i alpha x_n a dxi) for a < na, built by recurrence with
// exact re-anchoring every 64 steps.
Eigen::MatrixXcd phase_columns(const Grid1D& xg, double alpha, double dxi, std::size_t a_begin,
                               std::size_t na) {
  const auto nx = static_cast<Eigen::Index>(xg.count);
  Eigen::MatrixXcd e(nx, static_cast<Eigen::Index>(na));
  for (Eigen::Index n = 0; n < nx; ++n) {
    const double x = xg.point(static_cast<std::size_t>(n));
    const double base = 2.0 * kPi * alpha * x * dxi;
    const cplx step = expi(base);
    cplx cur;
    for (std::size_t a = 0; a < na; ++a) {
      if (a % 64 == 0)
        cur = expi(base * static_cast<double>(a_begin + a));
      else
        cur *= step;
      e(n, static_cast<Eigen::Index>(a)) = cur;
    }
  }
  return e;
}

template <class Shift>
void gemm_sheet(const Field2D& f, const SheetSpec& spec, Shift row_shift, Eigen::MatrixXcd& out) {
  const auto ny = static_cast<Eigen::Index>(f.ny());
  const auto nx = static_cast<Eigen::Index>(f.nx());
  Eigen::MatrixXcd m(ny, nx);
  for (Eigen::Index d = 0; d < ny; ++d) {
    const auto du = static_cast<std::size_t>(d);
    const double shift = row_shift(du);
    for (Eigen::Index n = 0; n < nx; ++n) {
      const auto nu = static_cast<std::size_t>(n);
      double x = f.gx.point(nu);
      m(d, n) = f.at(nu, du) * f.gx.weight(nu) * expi(2.0 * kPi * x * shift);
    }
  }
  // Column chunks keep the phase block near 4M entries.
  const std::size_t chunk = std::max<std::size_t>(64, (std::size_t{1} << 22) / std::max<std::size_t>(1, f.nx()));
  for (std::size_t a0 = 0; a0 < spec.na; a0 += chunk) {
    std::size_t len_a = std::min(chunk, spec.na - a0);
    Eigen::MatrixXcd e = phase_columns(f.gx, spec.alpha, spec.dxi, a0, len_a);
    out.middleCols(static_cast<Eigen::Index>(a0), static_cast<Eigen::Index>(len_a)).noalias() = m * e;
  }
}

}  // namespace

void LambdaGrid::validate() const {
  if (cells < 1) throw ConfigError("lambda grid needs at least one cell");
  if (r_range < 0) throw ConfigError("lambda grid r_range must be non-negative");
}

Grid1D default_kernel_grid() { return symmetric_grid(8.0, 1.0 / 16.0); }

Grid1D default_kernel_grid(const Field2D& f, double lambda) {
  Grid1D g = default_kernel_grid();
  if (lambda == 0.0) return g;
  const double limit = 0.5 / (std::abs(lambda) * f.gx.step);
  if (limit >= g.last()) return g;
  const double half = std::floor(limit / g.step + 1e-9) * g.step;
  if (half < g.step) throw ConfigError("kernel_of: field x-step too coarse for lambda");
  return symmetric_grid(half, g.step);
}

Eigen::MatrixXcd oscillatory_sheet(const Field2D& f, const SheetSpec& spec) {
  const auto ny = static_cast<Eigen::Index>(f.ny());
  if (spec.beta.size() != f.ny()) throw ConfigError("oscillatory_sheet: beta size mismatch");
  if (!spec.row_offset.empty() && spec.row_offset.size() != f.ny())
    throw ConfigError("oscillatory_sheet: row offset size mismatch");
  auto row_shift = [&](std::size_t d) {
    double off = spec.row_offset.empty() ? 0.0 : static_cast<double>(spec.row_offset[d]);
    return spec.beta[d] + spec.alpha * (spec.xi0 + off * spec.dxi);
  };
  Eigen::MatrixXcd out(ny, static_cast<Eigen::Index>(spec.na));
  if (spec.na == 0 || ny == 0) return out;

  // Rough flop counts: complex GEMM against Bluestein with three FFTs per row.
  const double len = static_cast<double>(fft::good_size(f.nx() + spec.na - 1));
  const bool chirp = 8.0 * static_cast<double>(f.nx()) * static_cast<double>(spec.na) > 60.0 * len * std::log2(len);
  if (chirp) {
    std::vector<cplx> row(f.nx());
    for (Eigen::Index d = 0; d < ny; ++d) {
      const auto du = static_cast<std::size_t>(d);
      for (std::size_t n = 0; n < f.nx(); ++n) row[n] = f.at(n, du);
      Grid1D vg{row_shift(du), spec.alpha * spec.dxi, spec.na, Boundary::zero};
      auto g = oscillatory_ft(row, f.gx, 2.0, vg, FtMethod::chirp);
      for (std::size_t a = 0; a < spec.na; ++a) out(d, static_cast<Eigen::Index>(a)) = g[a];
    }
  } else {
    gemm_sheet(f, spec, row_shift, out);
  }
  // Beyond the x-Nyquist frequency the trapezoid sum repeats periodically;
  // a field resolved on its x-grid has no content there.
  const double nyq = 0.5 / f.gx.step;
  for (Eigen::Index d = 0; d < ny; ++d) {
    const double f0 = row_shift(static_cast<std::size_t>(d));
    const double df = spec.alpha * spec.dxi;
    for (std::size_t a = 0; a < spec.na; ++a)
      if (std::abs(f0 + df * static_cast<double>(a)) > nyq) out(d, static_cast<Eigen::Index>(a)) = 0.0;
  }
  return out;
}

KernelSheet kernel_sheet(const Field2D& f, double mu, double xi0, double dxi, std::size_t na) {
  SheetSpec spec;
  spec.alpha = mu;
  spec.xi0 = xi0;
  spec.dxi = dxi;
  spec.na = na;
  spec.beta.resize(f.ny());
  for (std::size_t d = 0; d < f.ny(); ++d) spec.beta[d] = 0.5 * mu * f.gy.point(d);
  return KernelSheet{mu, xi0, dxi, f.gy, oscillatory_sheet(f, spec)};
}

WeylKernel kernel_of(const Field2D& f, double lambda) {
  Grid1D g = default_kernel_grid(f, lambda);
  return kernel_of(f, lambda, g, g);
}

WeylKernel kernel_of(const Field2D& f, double lambda, const Grid1D& gxi, const Grid1D& geta) {
  require_finite(f.data, "kernel_of");
  if (!std::isfinite(lambda)) throw NumericalError("kernel_of: non-finite lambda");
  if (std::abs(gxi.step - geta.step) > 1e-12 * gxi.step)
    throw ConfigError("kernel_of: xi and eta grids must share one step");
  const double h = gxi.step;
  const std::size_t nxi = gxi.count, neta = geta.count;
  const std::size_t nu = nxi + neta - 1;
  // Row u_d = eta_b - xi_a with d = b - a + nxi - 1.
  const double u0 = geta.start - gxi.start - static_cast<double>(nxi - 1) * h;
  Field2D fu(f.gx, make_grid(u0, h, static_cast<long long>(nu)));
  double first = (u0 - f.gy.start) / f.gy.step;
  double stride = h / f.gy.step;
  std::vector<cplx> line(f.ny()), res(nu);
  for (std::size_t i = 0; i < f.nx(); ++i) {
    for (std::size_t j = 0; j < f.ny(); ++j) line[j] = f.at(i, j);
    resample_line(line, f.gy.boundary, first, stride, res);
    for (std::size_t d = 0; d < nu; ++d) fu.at(i, d) = res[d];
  }
  KernelSheet sheet = kernel_sheet(fu, lambda, gxi.start, h, nxi);
  WeylKernel k{lambda, Field2D(gxi, geta)};
  for (std::size_t a = 0; a < nxi; ++a)
    for (std::size_t b = 0; b < neta; ++b)
      k.values.at(a, b) = sheet.v(static_cast<Eigen::Index>(b + nxi - 1 - a), static_cast<Eigen::Index>(a));
  return k;
}

Field2D kernel_inverse(const WeylKernel& k) {
  const double lambda = k.lambda;
  if (lambda == 0.0 || !std::isfinite(lambda)) throw ConfigError("kernel_inverse: lambda must be nonzero");
  const Grid1D& gxi = k.values.gx;
  const Grid1D& geta = k.values.gy;
  if (std::abs(gxi.step - geta.step) > 1e-12 * gxi.step)
    throw ConfigError("kernel_inverse: xi and eta grids must share one step");
  require_finite(k.values.data, "kernel_inverse");
  const double h = gxi.step;
  const double alam = std::abs(lambda);
  const std::size_t nxi = gxi.count, neta = geta.count;
  const std::size_t nu = nxi + neta - 1;
  const double u0 = geta.start - gxi.start - static_cast<double>(nxi - 1) * h;

  // One full period of the discrete transform in x.
  const double period = 1.0 / (alam * h);
  auto nper = static_cast<long long>(std::max<double>(static_cast<double>(std::min(nxi, neta)),
                                                      std::ceil(period / h - 1e-9)));
  if (nper % 2 != 0) ++nper;
  Grid1D gx = make_grid(-0.5 * period, period / static_cast<double>(nper), nper + 1);
  Grid1D gy = make_grid(u0, h, static_cast<long long>(nu));

  // c(d, a) = K[a][a + off], off = d - (nxi - 1).
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(nu), static_cast<Eigen::Index>(nxi));
  for (std::size_t d = 0; d < nu; ++d) {
    auto off = static_cast<std::ptrdiff_t>(d) - static_cast<std::ptrdiff_t>(nxi - 1);
    for (std::size_t a = 0; a < nxi; ++a) {
      std::ptrdiff_t b = static_cast<std::ptrdiff_t>(a) + off;
      if (b < 0 || b >= static_cast<std::ptrdiff_t>(neta)) continue;
      c(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(a)) = k.values.at(a, static_cast<std::size_t>(b));
    }
  }
  // e(a, n) = exp(-2 pi i lambda x_n xi_a)
  Eigen::MatrixXcd e(static_cast<Eigen::Index>(nxi), static_cast<Eigen::Index>(gx.count));
  for (std::size_t a = 0; a < nxi; ++a)
    for (std::size_t n = 0; n < gx.count; ++n)
      e(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(n)) =
          expi(-2.0 * kPi * lambda * gx.point(n) * gxi.point(a));
  Eigen::MatrixXcd s = c * e;
  Field2D out(gx, gy);
  for (std::size_t n = 0; n < gx.count; ++n)
    for (std::size_t d = 0; d < nu; ++d)
      out.at(n, d) = alam * h * s(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n)) *
                     expi(-kPi * lambda * gx.point(n) * gy.point(d));
  return out;
}

int s_window(const TruncationPolicy& pol, double mu) {
  if (!pol.scale_s || pol.s_range == 0) return pol.s_range;
  double w = static_cast<double>(pol.s_range) / std::abs(mu);
  if (!std::isfinite(w)) return pol.s_cap;
  return std::clamp(static_cast<int>(std::ceil(w - 1e-12)), 1, pol.s_cap);
}

PairResult pair_via_kernels(const Field3D& f, const Field3D& g, const LambdaGrid& lgrid) {
  TruncationPolicy pol;
  pol.r_range = lgrid.r_range;
  return pair_via_kernels(f, g, lgrid, pol);
}

PairResult pair_via_kernels(const Field3D& f, const Field3D& g, const LambdaGrid& lgrid,
                            const TruncationPolicy& pol) {
  lgrid.validate();
  pol.validate();
  if (!(f.gx == g.gx) || !(f.gy == g.gy) || !(f.gt == g.gt))
    throw ConfigError("pair_via_kernels: grid mismatch");
  const int cells = lgrid.cells;
  const double dxi = 1.0 / cells;
  const auto wy = axis_weights(f.gy);
  bool converged = true;
  std::vector<cplx> per_r;
  for (int r = -pol.r_range; r <= pol.r_range; ++r) {
    std::vector<double> mus(static_cast<std::size_t>(cells));
    for (int i = 0; i < cells; ++i) mus[static_cast<std::size_t>(i)] = lgrid.point(i) + r;
    auto fm = t_transform(f, mus);
    auto gm = t_transform(g, mus);
    std::vector<cplx> per_cell(static_cast<std::size_t>(cells));
    std::vector<char> cell_ok(static_cast<std::size_t>(cells), 1);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < cells; ++i) {
      const auto iu = static_cast<std::size_t>(i);
      const double mu = mus[iu];
      const int s = s_window(pol, mu);
      const std::size_t na = static_cast<std::size_t>(2 * s + 1) * static_cast<std::size_t>(cells);
      const double xi0 = -s + 0.5 * dxi;
      KernelSheet kf = kernel_sheet(fm[iu], mu, xi0, dxi, na);
      KernelSheet kg = kernel_sheet(gm[iu], mu, xi0, dxi, na);
      CompensatedSum total, edge;
      for (Eigen::Index a = 0; a < static_cast<Eigen::Index>(na); ++a) {
        CompensatedSum col;
        for (Eigen::Index d = 0; d < kf.v.rows(); ++d)
          col += kf.v(d, a) * std::conj(kg.v(d, a)) * wy[static_cast<std::size_t>(d)];
        cplx c = col.value() * dxi;
        total += c;
        if (a < cells || a >= static_cast<Eigen::Index>(na) - cells) edge += c;
      }
      per_cell[iu] = total.value() * std::abs(mu) * dxi;
      if (s > 0 && std::abs(edge.value()) > pol.tail_eps * std::abs(total.value())) cell_ok[iu] = 0;
    }
    CompensatedSum sr;
    for (int i = 0; i < cells; ++i) {
      sr += per_cell[static_cast<std::size_t>(i)];
      if (!cell_ok[static_cast<std::size_t>(i)]) converged = false;
    }
    per_r.push_back(sr.value());
  }
  auto sum = periodize_sum([&](int r) { return per_r[static_cast<std::size_t>(r + pol.r_range)]; },
                           pol.r_range, pol.tail_eps);
  return {sum.value, converged && sum.converged};
}

}  // namespace hwave
