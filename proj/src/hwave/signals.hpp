#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hwave/hwg_io.hpp"
#include "hwave/numerics.hpp"
#include "json.hpp"

namespace hwave {

struct SignalSpec {
  std::string builder;  // empty when file is set
  nlohmann::json params = nlohmann::json::object();
  std::optional<bool> normalize;  // builder default when absent
  std::optional<std::uint64_t> seed;
  std::string file;
};

SignalSpec signal_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const SignalSpec& s);

struct SignalGrids {
  std::optional<Grid1D> x, y, t;
};

// Rectangle [xi0, xi1] x [eta0, eta1] carrying the kernels K^lambda_{f^lambda}.
struct KernelBox {
  double xi0 = 0.0, xi1 = 1.0, eta0 = 0.0, eta1 = 1.0;
};

struct SignalMeta {
  std::string builder;
  bool normalized = false;
  // Set for kernel-prescribed builders: every kernel of the signal at its own
  // parameter vanishes outside this box.
  std::optional<KernelBox> kernel_box;
  // lambda-profile signals carry t-spectrum only in [lambda_min, 1).
  std::optional<double> lambda_min;
  SignalGrids hint;
  // y-window wide enough for Gram pairings of translates (l in {-1, 0, 1}).
  std::optional<Grid1D> gram_y;
};

struct Signal {
  AnyField field;
  SignalMeta meta;

  bool is3d() const { return std::holds_alternative<Field3D>(field); }
  const Field2D& f2() const { return std::get<Field2D>(field); }
  const Field3D& f3() const { return std::get<Field3D>(field); }
};

Signal build_signal(const SignalSpec& spec, const SignalGrids& grids = {});
std::vector<std::string> builder_names();
// Grid hints of a builder with the given params (empty axes when unknown).
SignalGrids builder_hints(const SignalSpec& spec);

// Hermite function h_n(x) = 2^{1/4} / sqrt(2^n n!) H_n(sqrt(2 pi) x) exp(-pi x^2).
double hermite_function(int n, double x);
// All h_0..h_nmax at x.
std::vector<double> hermite_functions(int nmax, double x);
// Degree pair of the i-th tensor element in graded order (0,0), (0,1), (1,0), ...
std::pair<int, int> hermite_degrees(int i);
// Tensor Hermite functions h_a(x) h_b(y) in graded order.
std::vector<Field2D> hermite_basis(int count, const Grid1D& gx, const Grid1D& gy);

// phi_box(x, y) = exp(-i pi x) (1 - |y|) sinc(x (1 - |y|)) for |y| <= 1, else 0.
cplx box_kernel_phi(double x, double y);

}  // namespace hwave
