#include "hwave/twisted.hpp"

#include <cmath>

#include "hwave/errors.hpp"
#include "hwave/resample.hpp"

namespace hwave {
namespace {

cplx expi(double a) { return {std::cos(a), std::sin(a)}; }

Grid1D scaled(const Grid1D& g, double a, double b) {
  return Grid1D{a * g.start + b, a * g.step, g.count, g.boundary};
}

void check_norm(double before, double after, const ResampleOptions& opts, const char* what) {
  if (!opts.check_coverage || before == 0.0) return;
  if (std::abs(after - before) > opts.coverage_tol * before)
    throw DomainCoverageError(std::string(what) + ": squared norm changed from " +
                              std::to_string(before) + " to " + std::to_string(after));
}

}  // namespace

Field2D affine_sample_2d(const Field2D& phi, double ax, double bx, double ay, double by,
                         double scale, const Grid1D& ox, const Grid1D& oy) {
  require_finite(phi.data, "affine_sample_2d");
  const double fx = (ax * ox.start + bx - phi.gx.start) / phi.gx.step;
  const double sx = ax * ox.step / phi.gx.step;
  const double fy = (ay * oy.start + by - phi.gy.start) / phi.gy.step;
  const double sy = ay * oy.step / phi.gy.step;

  Field2D mid(ox, phi.gy);
#pragma omp parallel
  {
    std::vector<cplx> line(phi.nx()), res(ox.count);
#pragma omp for schedule(static)
    for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(phi.ny()); ++jj) {
      auto j = static_cast<std::size_t>(jj);
      for (std::size_t i = 0; i < phi.nx(); ++i) line[i] = phi.at(i, j);
      resample_line(line, phi.gx.boundary, fx, sx, res);
      for (std::size_t i = 0; i < ox.count; ++i) mid.at(i, j) = res[i];
    }
  }
  Field2D out(ox, oy);
#pragma omp parallel
  {
    std::vector<cplx> res(oy.count);
#pragma omp for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(ox.count); ++ii) {
      auto i = static_cast<std::size_t>(ii);
      std::span<const cplx> line(mid.data.data() + i * phi.ny(), phi.ny());
      resample_line(line, phi.gy.boundary, fy, sy, res);
      for (std::size_t j = 0; j < oy.count; ++j) out.at(i, j) = scale * res[j];
    }
  }
  return out;
}

Field2D twisted_translate(const Field2D& phi, int k, int l, double lambda,
                          const ResampleOptions& opts) {
  Field2D out = affine_sample_2d(phi, 1.0, -k, 1.0, -l, 1.0, phi.gx, phi.gy);
  for (std::size_t i = 0; i < out.nx(); ++i) {
    const double xl = phi.gx.point(i) * l;
    for (std::size_t j = 0; j < out.ny(); ++j)
      out.at(i, j) *= expi(kPi * lambda * (xl - phi.gy.point(j) * k));
  }
  check_norm(norm2(phi), norm2(out), opts, "twisted_translate");
  return out;
}

Field2D dilate_2d(const Field2D& phi, int j, const ResampleOptions& opts) {
  check_scale(j);
  const double a = std::ldexp(1.0, j);
  Field2D out = affine_sample_2d(phi, a, 0.0, a, 0.0, a, phi.gx, phi.gy);
  check_norm(norm2(phi), norm2(out), opts, "dilate_2d");
  return out;
}

Field2D modulate(const Field2D& phi, const ModulationParams& p) {
  Field2D out = phi;
  for (std::size_t i = 0; i < out.nx(); ++i) {
    const double ax = p.a * phi.gx.point(i);
    for (std::size_t j = 0; j < out.ny(); ++j)
      out.at(i, j) *= expi(2.0 * kPi * (ax + p.b * phi.gy.point(j)));
  }
  return out;
}

WeylKernel kernel_of_dilated(const Field2D& phi, int j, double lambda, const Grid1D& gxi,
                             const Grid1D& geta) {
  check_scale(j);
  const double a = std::ldexp(1.0, j);
  WeylKernel k = kernel_of(phi, lambda / (a * a), scaled(gxi, a, 0.0), scaled(geta, a, 0.0));
  k.lambda = lambda;
  k.values.gx = gxi;
  k.values.gy = geta;
  return k;
}

WeylKernel kernel_of_twisted_translate(const Field2D& phi, int k, int l, int j,
                                       const Grid1D& gxi, const Grid1D& geta) {
  check_scale(j);
  const double mu = std::ldexp(1.0, -2 * j);
  Field2D mod = modulate(phi, {0.5 * (mu - 1.0) * l, 0.0});
  WeylKernel out = kernel_of(mod, 1.0, scaled(gxi, 1.0, l), geta);
  out.values.gx = gxi;
  for (std::size_t a = 0; a < gxi.count; ++a) {
    const double xi = gxi.point(a);
    for (std::size_t b = 0; b < geta.count; ++b) {
      const double eta = geta.point(b);
      out.values.at(a, b) *= expi(kPi * (mu * k * l + k * (1.0 + mu) * xi + k * (1.0 - mu) * eta));
    }
  }
  return out;
}

WeylKernel kernel_of_dilated_twisted(const Field2D& phi, int k, int l, int j, double lambda,
                                     const Grid1D& gxi, const Grid1D& geta) {
  check_scale(j);
  const double a = std::ldexp(1.0, j);
  const double mu = lambda / (a * a);
  WeylKernel out = kernel_of(phi, mu, scaled(gxi, a, l), scaled(geta, a, 0.0));
  out.lambda = lambda;
  out.values.gx = gxi;
  out.values.gy = geta;
  for (std::size_t p = 0; p < gxi.count; ++p) {
    const cplx ph = expi(kPi * mu * k * (2.0 * a * gxi.point(p) + l));
    for (std::size_t b = 0; b < geta.count; ++b) out.values.at(p, b) *= ph;
  }
  return out;
}

double max_abs_diff(const Field2D& a, const Field2D& b) {
  if (a.data.size() != b.data.size()) throw ConfigError("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

double dilation_lemma_gap(const Field2D& phi, int j, double lambda, const Grid1D& gxi,
                          const Grid1D& geta) {
  WeylKernel left = kernel_of(dilate_2d(phi, j), lambda, gxi, geta);
  WeylKernel right = kernel_of_dilated(phi, j, lambda, gxi, geta);
  return max_abs_diff(left.values, right.values);
}

double twisted_translate_lemma_gap(const Field2D& phi, int k, int l, int j, const Grid1D& gxi,
                                   const Grid1D& geta) {
  const double mu = std::ldexp(1.0, -2 * j);
  WeylKernel left = kernel_of(twisted_translate(phi, k, l, mu), 1.0, gxi, geta);
  WeylKernel right = kernel_of_twisted_translate(phi, k, l, j, gxi, geta);
  return max_abs_diff(left.values, right.values);
}

double dilated_twisted_lemma_gap(const Field2D& phi, int k, int l, int j, double lambda,
                                 const Grid1D& gxi, const Grid1D& geta) {
  const double mu = lambda * std::ldexp(1.0, -2 * j);
  WeylKernel left = kernel_of(dilate_2d(twisted_translate(phi, k, l, mu), j), lambda, gxi, geta);
  WeylKernel right = kernel_of_dilated_twisted(phi, k, l, j, lambda, gxi, geta);
  return max_abs_diff(left.values, right.values);
}

Grid1D wavelet_t_grid(const Field3D& psi, int j, const LatticeIndex& idx) {
  check_scale(j);
  const double xr = std::max(std::abs(psi.gx.start), std::abs(psi.gx.last()));
  const double yr = std::max(std::abs(psi.gy.start), std::abs(psi.gy.last()));
  const double tr = std::max(std::abs(psi.gt.start), std::abs(psi.gt.last()));
  const double shear = std::ldexp(1.0, j - 1) * (std::abs(idx.k) * yr + std::abs(idx.l) * xr);
  const double step = psi.gt.step * std::ldexp(1.0, -2 * j);
  const double half = std::ldexp(tr + std::abs(idx.m) + shear, -2 * j);
  return symmetric_grid(std::ceil(half / step - 1e-9) * step, step);
}

std::vector<WaveletLemmaGap> wavelet_lemma_gaps(const Field3D& psi, const std::vector<int>& js,
                                                const std::vector<LatticeIndex>& idx,
                                                std::span<const double> lambdas) {
  // psi^mu at large mu can be pure roundoff, so coverage checks on the right side are off.
  ResampleOptions quiet;
  quiet.check_coverage = false;
  std::vector<WaveletLemmaGap> out;
  for (int j : js) {
    check_scale(j);
    std::vector<double> mus;
    for (double l : lambdas) mus.push_back(l * std::ldexp(1.0, -2 * j));
    const auto psimu = t_transform(psi, mus);
    for (const auto& id : idx) {
      const Field3D w = wavelet_element(psi, j, id, psi.gx, psi.gy, wavelet_t_grid(psi, j, id));
      const auto left = t_transform(w, lambdas);
      double gap = 0.0;
      for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const Field2D right = dilate_2d(twisted_translate(psimu[i], id.k, id.l, mus[i], quiet), j, quiet);
        const cplx factor = std::ldexp(1.0, -j) * expi(2.0 * kPi * mus[i] * id.m);
        for (std::size_t q = 0; q < right.data.size(); ++q)
          gap = std::max(gap, std::abs(left[i].data[q] - factor * right.data[q]));
      }
      out.push_back({j, id, gap});
    }
  }
  return out;
}

}  // namespace hwave
