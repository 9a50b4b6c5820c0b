#pragma once

#include <span>
#include <vector>

#include "hwave/numerics.hpp"

namespace hwave {

struct HPoint {
  double x = 0.0, y = 0.0, t = 0.0;
};

struct LatticeIndex {
  int k = 0, l = 0, m = 0;
  bool operator==(const LatticeIndex&) const = default;
};

inline constexpr int kMaxScale = 8;

HPoint group_mul(const HPoint& p, const HPoint& q);
HPoint group_inv(const HPoint& p);

struct ResampleOptions {
  // Allowed relative change of the squared norm before a resampled field is
  // reported as escaping its grid.
  double coverage_tol = 1e-5;
  bool check_coverage = true;
};

// out(x,y,t) = scale * psi(ax x + bx, ay y + by, at t + ct + cx x + cy y),
// sampled on (ox, oy, ot). Off-grid positions use band-limited resampling.
struct AffineMap3 {
  double ax = 1.0, bx = 0.0;
  double ay = 1.0, by = 0.0;
  double at = 1.0, ct = 0.0, cx = 0.0, cy = 0.0;
  double scale = 1.0;
};

Field3D affine_sample(const Field3D& psi, const AffineMap3& map, const Grid1D& ox,
                      const Grid1D& oy, const Grid1D& ot, const ResampleOptions& opts = {});

Field3D left_translate(const Field3D& psi, double u, double v, double s,
                       const ResampleOptions& opts = {});
Field3D dilate_h(const Field3D& psi, double a, const ResampleOptions& opts = {});

// 2^{2j} psi(2^j x - k, 2^j y - l, 2^{2j} t - m + 2^{j-1}(y k - x l)).
Field3D wavelet_element(const Field3D& psi, int j, const LatticeIndex& idx,
                        const ResampleOptions& opts = {});
Field3D wavelet_element(const Field3D& psi, int j, const LatticeIndex& idx, const Grid1D& ox,
                        const Grid1D& oy, const Grid1D& ot, const ResampleOptions& opts = {});
AffineMap3 wavelet_map(int j, const LatticeIndex& idx);

// psi^lambda(x, y) = integral of psi(x, y, t) exp(2 pi i lambda t) dt; zero for
// |lambda| beyond the t-Nyquist frequency 1 / (2 h_t).
Field2D t_transform(const Field3D& psi, double lambda);
std::vector<Field2D> t_transform(const Field3D& psi, std::span<const double> lambdas);

void check_scale(int j);

}  // namespace hwave
