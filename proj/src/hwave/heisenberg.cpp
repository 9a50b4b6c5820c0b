#include "hwave/heisenberg.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>

#include "hwave/errors.hpp"
#include "hwave/resample.hpp"

namespace hwave {
namespace {

using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Source position, in source index units, of output node i along one axis.
struct AxisMap {
  double first = 0.0;
  double stride = 1.0;
};

AxisMap axis_map(const Grid1D& src, const Grid1D& out, double a, double b) {
  return {(a * out.start + b - src.start) / src.step, a * out.step / src.step};
}

bool integral(const AxisMap& m) {
  return std::abs(m.first - std::nearbyint(m.first)) < 1e-9 &&
         std::abs(m.stride - std::nearbyint(m.stride)) < 1e-9;
}

// Resample along the x (axis 0) or y (axis 1) direction of a 3D block.
Field3D resample_spatial(const Field3D& in, int axis, const Grid1D& out_grid, const AxisMap& m) {
  Field3D out = axis == 0 ? Field3D(out_grid, in.gy, in.gt) : Field3D(in.gx, out_grid, in.gt);
  const std::size_t nt = in.nt();
  const std::size_t n_lines = axis == 0 ? in.ny() * nt : in.nx() * nt;
  const std::size_t n_in = axis == 0 ? in.nx() : in.ny();
  const std::size_t n_out = out_grid.count;
  const Boundary b = axis == 0 ? in.gx.boundary : in.gy.boundary;
#pragma omp parallel
  {
    std::vector<cplx> line(n_in), res(n_out);
#pragma omp for schedule(static)
    for (std::ptrdiff_t li = 0; li < static_cast<std::ptrdiff_t>(n_lines); ++li) {
      auto l = static_cast<std::size_t>(li);
      std::size_t k = l % nt, other = l / nt;
      for (std::size_t p = 0; p < n_in; ++p)
        line[p] = axis == 0 ? in.at(p, other, k) : in.at(other, p, k);
      resample_line(line, b, m.first, m.stride, res);
      for (std::size_t p = 0; p < n_out; ++p) {
        if (axis == 0)
          out.at(p, other, k) = res[p];
        else
          out.at(other, p, k) = res[p];
      }
    }
  }
  return out;
}

void coverage_check(double before, double after, double jacobian, const ResampleOptions& opts,
                    const char* what) {
  if (!opts.check_coverage || before == 0.0) return;
  double expected = before * jacobian;
  if (std::abs(after - expected) > opts.coverage_tol * expected)
    throw DomainCoverageError(std::string(what) + ": squared norm changed from " +
                              std::to_string(expected) + " to " + std::to_string(after));
}

}  // namespace

HPoint group_mul(const HPoint& p, const HPoint& q) {
  return {p.x + q.x, p.y + q.y, p.t + q.t + 0.5 * (q.x * p.y - q.y * p.x)};
}

HPoint group_inv(const HPoint& p) { return {-p.x, -p.y, -p.t}; }

void check_scale(int j) {
  if (j < -kMaxScale || j > kMaxScale)
    throw ConfigError("scale index out of range: " + std::to_string(j));
}

Field3D affine_sample(const Field3D& psi, const AffineMap3& map, const Grid1D& ox,
                      const Grid1D& oy, const Grid1D& ot, const ResampleOptions& opts) {
  require_finite(psi.data, "affine_sample");
  if (map.ax == 0.0 || map.ay == 0.0 || map.at == 0.0)
    throw ConfigError("affine_sample: degenerate map");
  AxisMap mx = axis_map(psi.gx, ox, map.ax, map.bx);
  AxisMap my = axis_map(psi.gy, oy, map.ay, map.by);

  // Column lookup: exact index maps when possible, otherwise a resampled block.
  std::optional<Field3D> block;
  std::vector<std::ptrdiff_t> src_x(ox.count), src_y(oy.count);
  const Field3D* src = &psi;
  if (!integral(mx)) {
    block = resample_spatial(psi, 0, ox, mx);
    src = &*block;
    mx = {0.0, 1.0};
  }
  if (!integral(my)) {
    Field3D tmp = resample_spatial(*src, 1, oy, my);
    block = std::move(tmp);
    src = &*block;
    my = {0.0, 1.0};
  }
  for (std::size_t i = 0; i < ox.count; ++i)
    src_x[i] = static_cast<std::ptrdiff_t>(std::nearbyint(mx.first + static_cast<double>(i) * mx.stride));
  for (std::size_t j = 0; j < oy.count; ++j)
    src_y[j] = static_cast<std::ptrdiff_t>(std::nearbyint(my.first + static_cast<double>(j) * my.stride));

  Field3D out(ox, oy, ot);
  const double t_stride = map.at * ot.step / psi.gt.step;
  const auto nsx = static_cast<std::ptrdiff_t>(src->nx());
  const auto nsy = static_cast<std::ptrdiff_t>(src->ny());
  const std::size_t ncol = ox.count * oy.count;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(ncol); ++c) {
    std::size_t i = static_cast<std::size_t>(c) / oy.count, j = static_cast<std::size_t>(c) % oy.count;
    auto dst = out.column(i, j);
    std::ptrdiff_t si = src_x[i], sj = src_y[j];
    if (si < 0 || si >= nsx || sj < 0 || sj >= nsy) continue;
    double shear = map.ct + map.cx * ox.point(i) + map.cy * oy.point(j);
    double first = (map.at * ot.start + shear - psi.gt.start) / psi.gt.step;
    resample_line(src->column(static_cast<std::size_t>(si), static_cast<std::size_t>(sj)),
                  psi.gt.boundary, first, t_stride, dst);
    for (cplx& v : dst) v *= map.scale;
  }
  if (opts.check_coverage) {
    double jac = map.scale * map.scale / std::abs(map.ax * map.ay * map.at);
    coverage_check(norm2(psi), norm2(out), jac, opts, "affine_sample");
  }
  return out;
}

Field3D left_translate(const Field3D& psi, double u, double v, double s,
                       const ResampleOptions& opts) {
  AffineMap3 m;
  m.bx = -u;
  m.by = -v;
  m.ct = -s;
  m.cx = -0.5 * v;
  m.cy = 0.5 * u;
  return affine_sample(psi, m, psi.gx, psi.gy, psi.gt, opts);
}

Field3D dilate_h(const Field3D& psi, double a, const ResampleOptions& opts) {
  if (a == 0.0 || !std::isfinite(a)) throw ConfigError("dilate_h: dilation factor must be nonzero");
  AffineMap3 m;
  m.ax = m.ay = a;
  m.at = a * a;
  m.scale = a * a;
  return affine_sample(psi, m, psi.gx, psi.gy, psi.gt, opts);
}

AffineMap3 wavelet_map(int j, const LatticeIndex& idx) {
  check_scale(j);
  const double a = std::ldexp(1.0, j);
  AffineMap3 m;
  m.ax = m.ay = a;
  m.bx = -idx.k;
  m.by = -idx.l;
  m.at = a * a;
  m.ct = -idx.m;
  m.cx = -0.5 * a * idx.l;
  m.cy = 0.5 * a * idx.k;
  m.scale = a * a;
  return m;
}

Field3D wavelet_element(const Field3D& psi, int j, const LatticeIndex& idx,
                        const ResampleOptions& opts) {
  return wavelet_element(psi, j, idx, psi.gx, psi.gy, psi.gt, opts);
}

Field3D wavelet_element(const Field3D& psi, int j, const LatticeIndex& idx, const Grid1D& ox,
                        const Grid1D& oy, const Grid1D& ot, const ResampleOptions& opts) {
  return affine_sample(psi, wavelet_map(j, idx), ox, oy, ot, opts);
}

std::vector<Field2D> t_transform(const Field3D& psi, std::span<const double> lambdas) {
  require_finite(psi.data, "t_transform");
  const auto nxy = static_cast<Eigen::Index>(psi.nx() * psi.ny());
  const auto nt = static_cast<Eigen::Index>(psi.nt());
  const auto nl = static_cast<Eigen::Index>(lambdas.size());
  Eigen::Map<const RowMat> a(psi.data.data(), nxy, nt);
  Eigen::MatrixXcd e(nt, nl);
  // Beyond the t-Nyquist frequency the sum aliases; those slices are zero.
  const double nyq = 0.5 / psi.gt.step;
  for (Eigen::Index k = 0; k < nt; ++k) {
    double t = psi.gt.point(static_cast<std::size_t>(k));
    double w = psi.gt.weight(static_cast<std::size_t>(k));
    for (Eigen::Index q = 0; q < nl; ++q) {
      const double lam = lambdas[static_cast<std::size_t>(q)];
      double ph = 2.0 * kPi * lam * t;
      e(k, q) = std::abs(lam) > nyq ? cplx{} : w * cplx(std::cos(ph), std::sin(ph));
    }
  }
  Eigen::MatrixXcd r = a * e;
  std::vector<Field2D> out;
  out.reserve(lambdas.size());
  for (Eigen::Index q = 0; q < nl; ++q) {
    Field2D f(psi.gx, psi.gy);
    for (Eigen::Index p = 0; p < nxy; ++p) f.data[static_cast<std::size_t>(p)] = r(p, q);
    out.push_back(std::move(f));
  }
  return out;
}

Field2D t_transform(const Field3D& psi, double lambda) {
  double l[1] = {lambda};
  return std::move(t_transform(psi, l).front());
}

}  // namespace hwave
