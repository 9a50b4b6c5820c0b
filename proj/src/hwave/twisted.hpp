#pragma once

#include "hwave/heisenberg.hpp"
#include "hwave/numerics.hpp"
#include "hwave/weyl.hpp"

namespace hwave {

struct TwistIndex {
  int k = 0, l = 0;
};

struct ModulationParams {
  double a = 0.0, b = 0.0;
};

// out(x, y) = scale * phi(ax x + bx, ay y + by) on (ox, oy).
Field2D affine_sample_2d(const Field2D& phi, double ax, double bx, double ay, double by,
                         double scale, const Grid1D& ox, const Grid1D& oy);

// exp(i pi lambda (x l - y k)) phi(x - k, y - l)
Field2D twisted_translate(const Field2D& phi, int k, int l, double lambda,
                          const ResampleOptions& opts = {});
// 2^j phi(2^j x, 2^j y)
Field2D dilate_2d(const Field2D& phi, int j, const ResampleOptions& opts = {});
// exp(2 pi i (a x + b y)) phi(x, y)
Field2D modulate(const Field2D& phi, const ModulationParams& p);

// Right-hand sides of the kernel identities, each sampled on (gxi, geta).
//   K^lambda_{D phi}(xi, eta) = K^{lambda 4^-j}_phi(2^j xi, 2^j eta)
WeylKernel kernel_of_dilated(const Field2D& phi, int j, double lambda, const Grid1D& gxi,
                             const Grid1D& geta);
//   K_{T^{4^-j}_{k,l} phi}(xi, eta) = exp(i pi mu k l) exp(i pi k (1 + mu) xi)
//       exp(i pi k (1 - mu) eta) K_{e((mu - 1) l / 2, 0) phi}(xi + l, eta),  mu = 4^-j
WeylKernel kernel_of_twisted_translate(const Field2D& phi, int k, int l, int j,
                                       const Grid1D& gxi, const Grid1D& geta);
//   K^lambda_{D_{2^j} T^{mu}_{k,l} phi}(xi, eta) = exp(i pi mu k (2^{j+1} xi + l))
//       K^mu_phi(2^j xi + l, 2^j eta),  mu = lambda 4^-j
WeylKernel kernel_of_dilated_twisted(const Field2D& phi, int k, int l, int j, double lambda,
                                     const Grid1D& gxi, const Grid1D& geta);

// Two-path checks: max |left - right| over the kernel grid, where the left
// side transforms phi first and then takes its kernel.
double dilation_lemma_gap(const Field2D& phi, int j, double lambda, const Grid1D& gxi,
                          const Grid1D& geta);
double twisted_translate_lemma_gap(const Field2D& phi, int k, int l, int j, const Grid1D& gxi,
                                   const Grid1D& geta);
double dilated_twisted_lemma_gap(const Field2D& phi, int k, int l, int j, double lambda,
                                 const Grid1D& gxi, const Grid1D& geta);

// (d_{2^j} L_{k,l,m} psi)^lambda = 2^{-j} exp(2 pi i mu m) D_{2^j} T^{mu}_{k,l} psi^{mu},
// mu = lambda 4^-j. The left side samples the element on (psi.gx, psi.gy,
// wavelet_t_grid(psi, j, idx)) and takes its t-transform.
struct WaveletLemmaGap {
  int j = 0;
  LatticeIndex idx;
  double gap = 0.0;
};
std::vector<WaveletLemmaGap> wavelet_lemma_gaps(const Field3D& psi, const std::vector<int>& js,
                                                const std::vector<LatticeIndex>& idx,
                                                std::span<const double> lambdas);
// t-window holding the image of psi's t-window under the element map over the
// whole (x, y) grid; the step is psi's t-step times 4^-j.
Grid1D wavelet_t_grid(const Field3D& psi, int j, const LatticeIndex& idx);

double max_abs_diff(const Field2D& a, const Field2D& b);

}  // namespace hwave
