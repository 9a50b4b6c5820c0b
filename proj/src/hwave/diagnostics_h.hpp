#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hwave/heisenberg.hpp"
#include "hwave/numerics.hpp"
#include "hwave/signals.hpp"
#include "hwave/weyl.hpp"

namespace hwave {

enum class CurveAxis { lambda, xi };

// Values of a diagnostic on the midpoint grid (i + 1/2) / cells of (0, 1).
struct DiagnosticCurve {
  std::string name;
  CurveAxis axis = CurveAxis::lambda;
  int cells = 64;
  std::vector<std::pair<std::string, int>> indices;
  std::vector<cplx> values;
  bool converged = true;
  // Achieved truncation: outer sum half-width (r for lambda curves, 0 for xi
  // curves) and the widest inner window in integer units (s or m).
  int outer_range = 0;
  int inner_range = 0;

  double point(int i) const { return (i + 0.5) / cells; }
  std::string label() const;
};

enum class Verdict { pass, fail, unconverged };
std::string to_string(Verdict v);

struct ConditionReport {
  std::string id;
  double max_dev = 0.0;
  double mean_dev = 0.0;
  double tol = 0.0;
  Verdict verdict = Verdict::pass;
  int points = 0;
  // Per-curve maximum deviation, keyed by curve label.
  std::vector<std::pair<std::string, double>> details;
};

// Deviation of curves from a constant target over their grid points. Points
// with point(i) < floor are skipped. A report passes when the maximum
// deviation is below tol and every curve converged; a converged failure is
// fail, a sub-tolerance result with an unconverged curve is unconverged.
ConditionReport condition_report(const std::string& id, const std::vector<DiagnosticCurve>& curves,
                                 cplx target, double tol, double floor = 0.0);

bool all_pass(const std::vector<ConditionReport>& reports);

// Known support of the kernels K^lambda_{psi^lambda} (lambda in (0, 1)); psi^lambda
// vanishes for lambda outside (0, 1). Tightens the r and s windows.
struct SupportHint {
  KernelBox box;
};

std::optional<SupportHint> support_from(const SignalMeta& meta);

struct KL {
  int k = 0, l = 0;
};

DiagnosticCurve compute_G(const Field3D& psi, int k, int l, const LambdaGrid& lgrid,
                          const TruncationPolicy& pol, const std::optional<SupportHint>& hint = {});
std::vector<DiagnosticCurve> compute_G(const Field3D& psi, const std::vector<KL>& pairs,
                                       const LambdaGrid& lgrid, const TruncationPolicy& pol,
                                       const std::optional<SupportHint>& hint = {});

struct FIndex {
  int k1 = 0, k2 = 0, l1 = 0, l2 = 0;
};

DiagnosticCurve compute_F(const Field3D& psi, int j1, int j2, const FIndex& idx, const LambdaGrid& lgrid,
                          const TruncationPolicy& pol, const std::optional<SupportHint>& hint = {});
std::vector<DiagnosticCurve> compute_F(const Field3D& psi, int j1, int j2, const std::vector<FIndex>& idx,
                                       const LambdaGrid& lgrid, const TruncationPolicy& pol,
                                       const std::optional<SupportHint>& hint = {});

struct IndexWindow {
  std::vector<int> k = {-1, 0, 1};
  std::vector<int> l = {-1, 0, 1};
  std::vector<int> m = {-1, 0, 1};
  std::vector<int> j = {-1, 0, 1};
  std::vector<int> dj = {1, 2};  // j2 - j1 for cross-scale conditions
};

struct CheckOptions {
  double tol = 1e-2;
  // lambda (or xi) cells below this point are left out of condition (i).
  double floor = 0.0;
  std::optional<SupportHint> hint;
  // Receives every curve the check evaluated, when set.
  std::vector<DiagnosticCurve>* curves = nullptr;
};

void keep_curves(const CheckOptions& opt, const std::vector<DiagnosticCurve>& cs);

std::vector<ConditionReport> check_translates_h(const Field3D& psi, const IndexWindow& win,
                                                const LambdaGrid& lgrid, const TruncationPolicy& pol,
                                                const CheckOptions& opt);
std::vector<ConditionReport> check_wavelet_h(const Field3D& psi, const IndexWindow& win,
                                             const LambdaGrid& lgrid, const TruncationPolicy& pol,
                                             const CheckOptions& opt);

// Orthonormality conditions for wavelets on R from samples of psi-hat.
// Every point (i + 1/2)/cells + k and its dyadic multiples must be a node of
// the frequency grid; psi-hat is zero off the grid.
std::vector<ConditionReport> classical_check(std::span<const cplx> psi_hat, const Grid1D& freq, int jmax,
                                             double tol, int cells = 64,
                                             std::vector<DiagnosticCurve>* curves = nullptr);

// <L_{(k,l,m)} psi, psi> reconstructed from G_{k,l}.
cplx g_bridge(const DiagnosticCurve& g, int m);
// <d_{2^j1} L_1 psi, d_{2^j2} L_2 psi> reconstructed from F (j2 >= j1).
cplx f_bridge(const DiagnosticCurve& f, int j1, int j2, int m1, int m2);

}  // namespace hwave
