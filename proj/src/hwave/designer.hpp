#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"

#include "hwave/diagnostics_t.hpp"

namespace hwave {

// Search for phi = sum theta_i h_i over tensor Hermite functions that comes
// close to the twisted orthonormality conditions (i)-(v).
struct DesignProblem {
  int basis_size = 6;
  Grid1D gx = symmetric_grid(4.0, 0.125);
  Grid1D gy = symmetric_grid(4.0, 0.125);
  // An empty window.j restricts the objective to conditions (i) and (ii).
  IndexWindow window{.k = {}, .l = {-1, 0, 1}, .m = {}, .j = {}, .dj = {1}};
  std::array<double, 5> weights = {1.0, 1.0, 1.0, 1.0, 1.0};
  int budget = 500;
  std::uint64_t seed = 0;
  XiGrid xi;
  TruncationPolicy truncation;

  bool dilations() const { return !window.j.empty(); }
  void validate() const;
};

// Evaluates the objective against a basis built once.
class DesignObjective {
 public:
  explicit DesignObjective(DesignProblem p);

  const DesignProblem& problem() const { return p_; }
  const std::vector<Field2D>& basis() const { return basis_; }
  // Unit-norm phi(theta). Throws DegenerateCandidateError for theta = 0.
  Field2D candidate(const std::vector<double>& theta) const;
  // Weighted sum over conditions of squared deviations, summed over the xi
  // grid points of every curve in the window.
  double operator()(const std::vector<double>& theta) const;
  // Per-condition unweighted sums, (i) to (v).
  std::array<double, 5> terms(const std::vector<double>& theta) const;

 private:
  DesignProblem p_;
  std::vector<Field2D> basis_;
};

double residual(const std::vector<double>& theta, const DesignProblem& problem);

// Real coefficients <f, h_i> of f against the problem's basis.
std::vector<double> project(const Field2D& f, const DesignObjective& obj);

struct TraceEntry {
  double value = 0.0;
  double best = 0.0;
};

struct DesignResult {
  std::vector<double> theta;
  double residual = 0.0;
  double initial_residual = 0.0;
  std::vector<TraceEntry> trace;
  int evaluations = 0;
  bool budget_exhausted = false;
};

// Nelder-Mead with reflection 1, expansion 2, contraction 1/2, shrink 1/2.
// The best point changes only on a relative improvement above 1e-12.
// Without init the start point is drawn from a normal distribution seeded by
// problem.seed.
DesignResult optimize(const DesignProblem& problem, const std::optional<std::vector<double>>& init = {});
DesignResult optimize(const DesignObjective& obj, const std::optional<std::vector<double>>& init = {});

nlohmann::ordered_json to_json(const DesignProblem& p);
nlohmann::ordered_json to_json(const DesignResult& r);

}  // namespace hwave
