#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hwave/diagnostics_h.hpp"
#include "hwave/numerics.hpp"
#include "json.hpp"

namespace hwave {

// (j, k, l, m) for Heisenberg systems, (j, k, l) for planar ones.
struct GramLabel {
  int j = 0, k = 0, l = 0;
  std::optional<int> m;

  std::string str() const;
  bool operator==(const GramLabel&) const = default;
};

struct GramWindow {
  std::vector<int> j = {-1, 0, 1};
  std::vector<int> k = {-1, 0, 1};
  std::vector<int> l = {-1, 0, 1};
  std::vector<int> m = {-1, 0, 1};  // unused by gram_2d
};

struct GramOptions {
  double tol = 1e-3;
  // Recompute at half resolution and flag entries that move by more than 10 tol.
  bool recheck = true;
  // Relative squared-norm loss beyond which an element counts as escaping the grid.
  double coverage_tol = 1e-5;
  // Memory budget for the elements held per x-slab (gram_3d).
  std::size_t slab_bytes = std::size_t{512} << 20;
};

struct GramMatrix {
  std::vector<GramLabel> labels;
  Eigen::MatrixXcd entries;  // entries(a, b) = <e_a, e_b>
  double tol = 1e-3;
  std::vector<GramLabel> excluded;
  std::vector<std::string> warnings;
  // Index pairs whose half-resolution value differs by more than 10 tol.
  std::vector<std::pair<int, int>> quadrature_limited;
  double resolution_gap = 0.0;  // max entry change under halving, -1 when not rechecked

  std::size_t size() const { return labels.size(); }
};

// Gram of {delta_{2^j} L_{(k,l,m)} psi} by direct quadrature on psi's grid.
GramMatrix gram_3d(const Field3D& psi, const GramWindow& win, const GramOptions& opt = {});
// Gram of {D_{2^j} T_{(k,l)} phi}; with twisted the translation carries the
// phase of parameter 4^{-j}, otherwise plain translates. phi's grid must have
// integer 1/step and contain the integer lattice.
GramMatrix gram_2d(const Field2D& phi, const GramWindow& win, bool twisted, const GramOptions& opt = {});

ConditionReport orthonormality_verdict(const GramMatrix& g);

nlohmann::ordered_json to_json(const GramMatrix& g);
// Label header row and column, cells written as re+imi.
std::string to_csv(const GramMatrix& g);
void write_csv(const GramMatrix& g, const std::filesystem::path& path);

}  // namespace hwave
