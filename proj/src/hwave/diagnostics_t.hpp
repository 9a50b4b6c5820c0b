#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "hwave/diagnostics_h.hpp"

namespace hwave {

struct XiGrid {
  int cells = 64;

  double point(int i) const { return (i + 0.5) / cells; }
  void validate() const;
};

// S_{j,l}(xi, m, y) by direct quadrature of the kernel of the modulated phi.
// Off-grid rows are interpolated band-limitedly along y. j = 0 is singular.
cplx compute_S(const Field2D& phi, int j, int l, double xi, int m, double y);

struct LPair {
  int l1 = 0, l2 = 0;
};

DiagnosticCurve compute_P(const Field2D& phi, int j1, int j2, int l1, int l2, const XiGrid& xg,
                          const TruncationPolicy& pol, const std::optional<SupportHint>& hint = {});
std::vector<DiagnosticCurve> compute_P(const Field2D& phi, int j1, int j2, const std::vector<LPair>& ls,
                                       const XiGrid& xg, const TruncationPolicy& pol,
                                       const std::optional<SupportHint>& hint = {});

// Q_{j,l,l} and R_{j,l} share one code path and agree bit for bit.
DiagnosticCurve compute_Q(const Field2D& phi, int j, int l1, int l2, const XiGrid& xg, const TruncationPolicy& pol);
DiagnosticCurve compute_R(const Field2D& phi, int j, int l, const XiGrid& xg, const TruncationPolicy& pol);

// |1 - 2^{-4j}| / 4, the value R_{j,l} takes for orthonormal twisted wavelets
// and the mean of R_{j,l} for unit-norm phi.
double r_target(int j);

std::vector<ConditionReport> check_twisted_translates(const Field2D& phi, const std::vector<int>& ls,
                                                      const XiGrid& xg, const TruncationPolicy& pol,
                                                      const CheckOptions& opt);
// Conditions (i)-(v); win.k is unused.
std::vector<ConditionReport> check_twisted_wavelet(const Field2D& phi, const IndexWindow& win, const XiGrid& xg,
                                                   const TruncationPolicy& pol, const CheckOptions& opt);

}  // namespace hwave
