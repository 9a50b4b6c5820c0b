#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

#include "hwave/numerics.hpp"

namespace hwave {

// K^lambda_f sampled over (xi, eta): values.gx is the xi grid, values.gy the eta grid.
struct WeylKernel {
  double lambda = 1.0;
  Field2D values;
};

struct LambdaGrid {
  int cells = 64;
  int r_range = 4;

  double point(int i) const { return (i + 0.5) / cells; }
  void validate() const;
};

// Kernel grid [-8, 8]^2 with step 1/16.
Grid1D default_kernel_grid();
// Default grid narrowed to half-width 1 / (2 |lambda| h_x) when the x-step of
// f cannot resolve the oscillation exp(i pi lambda x (xi + eta)) on [-8, 8].
Grid1D default_kernel_grid(const Field2D& f, double lambda);

WeylKernel kernel_of(const Field2D& f, double lambda);
// xi and eta grids must share one step.
WeylKernel kernel_of(const Field2D& f, double lambda, const Grid1D& gxi, const Grid1D& geta);

// Inverse of kernel_of on the node lattice v = xi_a + eta_b. The result lives on
// x in [-P/2, P/2], P = 1 / (|lambda| h), and y = eta - xi differences.
Field2D kernel_inverse(const WeylKernel& k);

// Oscillatory sums over the rows of f:
//   value(d, a) = sum_x w_x f(x, y_d) exp(2 pi i x (alpha xi_{a0(d) + a} + beta_d))
// with xi_a = xi0 + a dxi. row_offset holds a0(d) (empty means 0 for all rows).
// Entries whose frequency alpha xi + beta_d exceeds the x-Nyquist frequency are
// zero. Wide sheets go through the chirp transform instead of a GEMM.
struct SheetSpec {
  double alpha = 1.0;
  double xi0 = 0.0;
  double dxi = 1.0;
  std::size_t na = 0;
  std::vector<double> beta;
  std::vector<std::ptrdiff_t> row_offset;
};

Eigen::MatrixXcd oscillatory_sheet(const Field2D& f, const SheetSpec& spec);

// K^mu_f(xi_a, xi_a + y_d) for every row y_d of f and xi_a = xi0 + a dxi.
struct KernelSheet {
  double mu = 1.0;
  double xi0 = 0.0;
  double dxi = 1.0;
  Grid1D rows;
  Eigen::MatrixXcd v;  // (row, a)

  cplx at(std::ptrdiff_t d, std::ptrdiff_t a) const {
    if (d < 0 || a < 0 || d >= v.rows() || a >= v.cols()) return {};
    return v(d, a);
  }
};

KernelSheet kernel_sheet(const Field2D& f, double mu, double xi0, double dxi, std::size_t na);

// Plancherel pairing of two fields through their kernels over lambda + r.
struct PairResult {
  cplx value;
  bool converged = true;
};

PairResult pair_via_kernels(const Field3D& f, const Field3D& g, const LambdaGrid& lgrid);
PairResult pair_via_kernels(const Field3D& f, const Field3D& g, const LambdaGrid& lgrid,
                            const TruncationPolicy& pol);

// Half-width, in xi units, of the s window for effective kernel parameter mu.
int s_window(const TruncationPolicy& pol, double mu);

}  // namespace hwave
