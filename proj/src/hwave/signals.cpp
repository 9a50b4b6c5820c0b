#include "hwave/signals.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>

#include "hwave/errors.hpp"

namespace hwave {
namespace {

using json = nlohmann::json;

constexpr int kMaxHermite = 36;

cplx expi(double a) { return {std::cos(a), std::sin(a)}; }

double sinc(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - (kPi * x) * (kPi * x) / 6.0;
  return std::sin(kPi * x) / (kPi * x);
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double unit_uniform(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t v = splitmix64(seed ^ splitmix64(counter));
  return (static_cast<double>(v >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal pair for stream position `counter` (Box-Muller).
cplx normal_pair(std::uint64_t seed, std::uint64_t counter) {
  double u1 = unit_uniform(seed, 2 * counter), u2 = unit_uniform(seed, 2 * counter + 1);
  double r = std::sqrt(-2.0 * std::log(u1));
  return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
}

double param(const json& p, const char* key, double dflt) {
  if (!p.contains(key)) return dflt;
  if (!p[key].is_number()) throw ConfigError(std::string("parameter '") + key + "' must be a number");
  return p[key].get<double>();
}

int int_param(const json& p, const char* key, int dflt) {
  if (!p.contains(key)) return dflt;
  if (!p[key].is_number_integer()) throw ConfigError(std::string("parameter '") + key + "' must be an integer");
  return p[key].get<int>();
}

void reject_unknown(const json& p, std::initializer_list<const char*> known, const std::string& builder) {
  for (auto it = p.begin(); it != p.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("builder '" + builder + "' has no parameter '" + it.key() + "'");
  }
}

Grid1D pick(const std::optional<Grid1D>& g, const std::optional<Grid1D>& hint) {
  if (g) return *g;
  if (hint) return *hint;
  return symmetric_grid(8.0, 1.0 / 16.0);
}

void normalize_in_place(std::vector<cplx>& data, double n2, const char* what) {
  if (!(n2 > 0.0) || !std::isfinite(n2)) throw NumericalError(std::string(what) + ": cannot normalize a zero field");
  const double s = 1.0 / std::sqrt(n2);
  for (cplx& v : data) v *= s;
}

Field2D sample2d(const Grid1D& gx, const Grid1D& gy, auto fn) {
  Field2D f(gx, gy);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(gx.count); ++ii) {
    auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = 0; j < gy.count; ++j) f.at(i, j) = fn(gx.point(i), gy.point(j));
  }
  return f;
}

// Products a(x) b(y) c(t) of precomputed axis factors.
Field3D separable3d(const Grid1D& gx, const Grid1D& gy, const Grid1D& gt, const std::vector<double>& a,
                    const std::vector<double>& b, const std::vector<double>& c) {
  Field3D f(gx, gy, gt);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(gx.count); ++ii) {
    auto i = static_cast<std::size_t>(ii);
    for (std::size_t j = 0; j < gy.count; ++j)
      for (std::size_t k = 0; k < gt.count; ++k) f.at(i, j, k) = a[i] * b[j] * c[k];
  }
  return f;
}

std::vector<double> hermite_on(const Grid1D& g, int n) {
  std::vector<double> v(g.count);
  for (std::size_t i = 0; i < g.count; ++i) v[i] = hermite_function(n, g.point(i));
  return v;
}

// Degree n is resolvable when its turning point plus a Gaussian margin fits the
// window and the step samples its highest local frequency.
void check_hermite_resolvable(int n, const Grid1D& g, const char* axis) {
  const double turning = std::sqrt((2.0 * n + 1.0) / (2.0 * kPi));
  const double reach = turning + 3.0;
  const double half = std::min(-g.start, g.last());
  if (half < reach || g.step > 0.5 / reach)
    throw ConfigError(std::string("Hermite degree ") + std::to_string(n) + " is not resolvable on the " + axis +
                      " grid");
}

SignalGrids hints_for(const std::string& builder, const json& params) {
  SignalGrids h;
  if (builder == "box_kernel_phi") {
    h.x = symmetric_grid(2016.0, 0.125);
    h.y = symmetric_grid(3.0, 1.0 / 16.0);
  } else if (builder == "lambda_profile_psi") {
    const int cells = int_param(params, "cells", 64);
    h.x = symmetric_grid(2048.0, 0.5);
    h.y = symmetric_grid(1.0, 1.0 / 16.0);
    h.t = make_grid(-0.5 * cells, 0.5, 2LL * cells, Boundary::antiperiodic);
  } else {
    h.x = h.y = symmetric_grid(8.0, 1.0 / 16.0);
    if (builder == "gaussian3d" || builder == "random_bandlimited") h.t = symmetric_grid(8.0, 1.0 / 16.0);
  }
  return h;
}

Signal build_gaussian2d(const SignalSpec& spec, const SignalGrids& grids, bool normalize) {
  reject_unknown(spec.params, {}, spec.builder);
  SignalGrids h = hints_for(spec.builder, spec.params);
  Grid1D gx = pick(grids.x, h.x), gy = pick(grids.y, h.y);
  const double c = normalize ? std::sqrt(2.0) : 1.0;
  Field2D f = sample2d(gx, gy, [c](double x, double y) { return cplx(c * std::exp(-kPi * (x * x + y * y))); });
  return {std::move(f), {spec.builder, normalize, std::nullopt, std::nullopt, h, std::nullopt}};
}

Signal build_gaussian3d(const SignalSpec& spec, const SignalGrids& grids, bool normalize) {
  reject_unknown(spec.params, {"x_order", "y_order", "t_order"}, spec.builder);
  SignalGrids h = hints_for(spec.builder, spec.params);
  Grid1D gx = pick(grids.x, h.x), gy = pick(grids.y, h.y), gt = pick(grids.t, h.t);
  int nx = int_param(spec.params, "x_order", 0), ny = int_param(spec.params, "y_order", 0);
  int nt = int_param(spec.params, "t_order", 0);
  for (int n : {nx, ny, nt})
    if (n < 0 || n > 16) throw ConfigError("gaussian3d orders must lie in [0, 16]");
  // Unnormalized output drops the 2^{1/4} factor of each axis.
  const double c = normalize ? 1.0 : std::pow(2.0, -0.75);
  auto ax = hermite_on(gx, nx), ay = hermite_on(gy, ny), at = hermite_on(gt, nt);
  for (double& v : ax) v *= c;
  Field3D f = separable3d(gx, gy, gt, ax, ay, at);
  if (normalize) normalize_in_place(f.data, norm2(f), "gaussian3d");
  return {std::move(f), {spec.builder, normalize, std::nullopt, std::nullopt, h, std::nullopt}};
}

Signal build_hermite2d(const SignalSpec& spec, const SignalGrids& grids, bool normalize) {
  reject_unknown(spec.params, {"n", "m"}, spec.builder);
  SignalGrids h = hints_for(spec.builder, spec.params);
  Grid1D gx = pick(grids.x, h.x), gy = pick(grids.y, h.y);
  int n = int_param(spec.params, "n", 0), m = int_param(spec.params, "m", 0);
  if (n < 0 || m < 0) throw ConfigError("hermite2d degrees must be non-negative");
  check_hermite_resolvable(n, gx, "x");
  check_hermite_resolvable(m, gy, "y");
  auto ax = hermite_on(gx, n), ay = hermite_on(gy, m);
  Field2D f(gx, gy);
  for (std::size_t i = 0; i < gx.count; ++i)
    for (std::size_t j = 0; j < gy.count; ++j) f.at(i, j) = ax[i] * ay[j];
  if (normalize) normalize_in_place(f.data, norm2(f), "hermite2d");
  return {std::move(f), {spec.builder, normalize, std::nullopt, std::nullopt, h, std::nullopt}};
}

Signal build_box_phi(const SignalSpec& spec, const SignalGrids& grids, bool normalize) {
  reject_unknown(spec.params, {}, spec.builder);
  SignalGrids h = hints_for(spec.builder, spec.params);
  Grid1D gx = pick(grids.x, h.x), gy = pick(grids.y, h.y);
  Field2D f = sample2d(gx, gy, box_kernel_phi);
  if (normalize) normalize_in_place(f.data, norm2(f), "box_kernel_phi");
  return {std::move(f), {spec.builder, normalize, KernelBox{}, std::nullopt, h, std::nullopt}};
}

Signal build_lambda_profile(const SignalSpec& spec, const SignalGrids& grids, bool normalize) {
  reject_unknown(spec.params, {"lambda_min", "cells"}, spec.builder);
  const int cells = int_param(spec.params, "cells", 64);
  const double lambda_min = param(spec.params, "lambda_min", 1.0 / 64.0);
  if (cells < 1) throw ConfigError("lambda_profile_psi needs at least one cell");
  if (!(lambda_min > 0.0) || lambda_min >= 1.0) throw ConfigError("lambda_profile_psi: lambda_min must lie in (0, 1)");
  SignalGrids h = hints_for(spec.builder, spec.params);
  Grid1D gx = pick(grids.x, h.x), gy = pick(grids.y, h.y), gt = pick(grids.t, h.t);

  std::vector<double> lambdas;
  for (int i = 0; i < cells; ++i) {
    double l = (i + 0.5) / cells;
    if (l >= lambda_min) lambdas.push_back(l);
  }
  if (lambdas.empty()) throw ConfigError("lambda_profile_psi: no cell lies above lambda_min");
  const auto nxy = static_cast<Eigen::Index>(gx.count * gy.count);
  const auto nl = static_cast<Eigen::Index>(lambdas.size());
  const auto nt = static_cast<Eigen::Index>(gt.count);

  // psi^lambda(x, y) = lambda^{1/2} exp(-i pi lambda x) (1 - |y|) sinc(lambda x (1 - |y|)),
  // the inverse of lambda^{-1/2} times the unit-square indicator kernel.
  Eigen::MatrixXcd slices(nxy, nl);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(gx.count); ++ii) {
    auto i = static_cast<std::size_t>(ii);
    const double x = gx.point(i);
    for (std::size_t j = 0; j < gy.count; ++j) {
      const double w = 1.0 - std::abs(gy.point(j));
      const auto row = static_cast<Eigen::Index>(i * gy.count + j);
      for (Eigen::Index q = 0; q < nl; ++q) {
        const double l = lambdas[static_cast<std::size_t>(q)];
        slices(row, q) = w < 0.0 ? cplx{} : std::sqrt(l) * w * sinc(l * x * w) * expi(-kPi * l * x);
      }
    }
  }
  Eigen::MatrixXcd waves(nl, nt);
  for (Eigen::Index q = 0; q < nl; ++q)
    for (Eigen::Index k = 0; k < nt; ++k)
      waves(q, k) = expi(-2.0 * kPi * lambdas[static_cast<std::size_t>(q)] * gt.point(static_cast<std::size_t>(k))) /
                    static_cast<double>(cells);
  Field3D f(gx, gy, gt);
  using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<RowMat> out(f.data.data(), nxy, nt);
  out.noalias() = slices * waves;
  if (normalize) normalize_in_place(f.data, norm2(f), "lambda_profile_psi");
  SignalMeta meta{spec.builder, normalize, KernelBox{}, lambda_min, h, symmetric_grid(2.0, gy.step)};
  return {std::move(f), meta};
}

Signal build_random(const SignalSpec& spec, const SignalGrids& grids, bool normalize) {
  reject_unknown(spec.params, {"rank", "terms", "max_degree"}, spec.builder);
  const int rank = int_param(spec.params, "rank", 2);
  const int terms = int_param(spec.params, "terms", 8);
  const int maxdeg = int_param(spec.params, "max_degree", 4);
  if (rank != 2 && rank != 3) throw ConfigError("random_bandlimited: rank must be 2 or 3");
  if (terms < 1 || maxdeg < 0 || maxdeg > 12) throw ConfigError("random_bandlimited: invalid terms or max_degree");
  const std::uint64_t seed = spec.seed.value_or(0);
  SignalGrids h = hints_for(spec.builder, spec.params);
  Grid1D gx = pick(grids.x, h.x), gy = pick(grids.y, h.y);
  check_hermite_resolvable(maxdeg, gx, "x");
  check_hermite_resolvable(maxdeg, gy, "y");
  std::vector<std::vector<double>> hx, hy, ht;
  for (int n = 0; n <= maxdeg; ++n) {
    hx.push_back(hermite_on(gx, n));
    hy.push_back(hermite_on(gy, n));
  }
  // Term q draws degrees and a complex coefficient from its own counter block.
  auto degree = [&](int q, int axis) {
    double u = unit_uniform(seed, 1000003ULL * static_cast<std::uint64_t>(q) + static_cast<std::uint64_t>(axis) + 7);
    return std::min(maxdeg, static_cast<int>(u * (maxdeg + 1)));
  };
  auto coeff = [&](int q) { return normal_pair(seed, 1000003ULL * static_cast<std::uint64_t>(q)); };
  SignalMeta meta{spec.builder, normalize, std::nullopt, std::nullopt, h, std::nullopt};
  if (rank == 2) {
    Field2D f(gx, gy);
    for (int q = 0; q < terms; ++q) {
      const auto& a = hx[static_cast<std::size_t>(degree(q, 0))];
      const auto& b = hy[static_cast<std::size_t>(degree(q, 1))];
      cplx c = coeff(q);
      for (std::size_t i = 0; i < gx.count; ++i)
        for (std::size_t j = 0; j < gy.count; ++j) f.at(i, j) += c * a[i] * b[j];
    }
    if (normalize) normalize_in_place(f.data, norm2(f), "random_bandlimited");
    return {std::move(f), meta};
  }
  Grid1D gt = pick(grids.t, h.t);
  check_hermite_resolvable(maxdeg, gt, "t");
  for (int n = 0; n <= maxdeg; ++n) ht.push_back(hermite_on(gt, n));
  Field3D f(gx, gy, gt);
  for (int q = 0; q < terms; ++q) {
    const auto& a = hx[static_cast<std::size_t>(degree(q, 0))];
    const auto& b = hy[static_cast<std::size_t>(degree(q, 1))];
    const auto& c3 = ht[static_cast<std::size_t>(degree(q, 2))];
    cplx c = coeff(q);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(gx.count); ++ii) {
      auto i = static_cast<std::size_t>(ii);
      for (std::size_t j = 0; j < gy.count; ++j)
        for (std::size_t k = 0; k < gt.count; ++k) f.at(i, j, k) += c * (a[i] * b[j] * c3[k]);
    }
  }
  if (normalize) normalize_in_place(f.data, norm2(f), "random_bandlimited");
  return {std::move(f), meta};
}

}  // namespace

SignalSpec signal_spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("signal must be a JSON object");
  SignalSpec s;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    if (k != "builder" && k != "params" && k != "normalize" && k != "seed" && k != "file")
      throw ConfigError("unknown signal field '" + k + "'");
  }
  if (j.contains("file")) {
    if (!j["file"].is_string()) throw ConfigError("signal.file must be a string");
    s.file = j["file"].get<std::string>();
    if (j.contains("builder")) throw ConfigError("signal takes either builder or file, not both");
  } else {
    if (!j.contains("builder") || !j["builder"].is_string()) throw ConfigError("signal.builder must be a string");
    s.builder = j["builder"].get<std::string>();
  }
  if (j.contains("params")) {
    if (!j["params"].is_object()) throw ConfigError("signal.params must be an object");
    s.params = j["params"];
  }
  if (j.contains("normalize")) {
    if (!j["normalize"].is_boolean()) throw ConfigError("signal.normalize must be a boolean");
    s.normalize = j["normalize"].get<bool>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) throw ConfigError("signal.seed must be an integer");
    if (j["seed"].is_number_integer() && j["seed"].get<long long>() < 0) throw ConfigError("signal.seed must be non-negative");
    s.seed = j["seed"].get<std::uint64_t>();
  }
  return s;
}

nlohmann::ordered_json to_json(const SignalSpec& s) {
  nlohmann::ordered_json j;
  if (!s.file.empty()) {
    j["file"] = s.file;
    return j;
  }
  j["builder"] = s.builder;
  j["params"] = nlohmann::ordered_json::parse(s.params.dump());
  if (s.normalize) j["normalize"] = *s.normalize;
  if (s.seed) j["seed"] = *s.seed;
  return j;
}

std::vector<std::string> builder_names() {
  return {"gaussian2d", "gaussian3d", "hermite2d", "box_kernel_phi", "lambda_profile_psi", "random_bandlimited"};
}

SignalGrids builder_hints(const SignalSpec& spec) {
  if (!spec.file.empty()) return {};
  return hints_for(spec.builder, spec.params);
}

Signal build_signal(const SignalSpec& spec, const SignalGrids& grids) {
  if (!spec.file.empty()) {
    Signal s{read_hwg(spec.file), {}};
    s.meta.builder = "file";
    s.meta.normalized = spec.normalize.value_or(false);
    if (s.meta.normalized) {
      if (s.is3d())
        normalize_in_place(std::get<Field3D>(s.field).data, norm2(s.f3()), "file");
      else
        normalize_in_place(std::get<Field2D>(s.field).data, norm2(s.f2()), "file");
    }
    return s;
  }
  const std::string& b = spec.builder;
  // Kernel-prescribed builders are exact constructions and default to raw output.
  const bool kernel_built = b == "box_kernel_phi" || b == "lambda_profile_psi";
  const bool normalize = spec.normalize.value_or(!kernel_built);
  if (b == "gaussian2d") return build_gaussian2d(spec, grids, normalize);
  if (b == "gaussian3d") return build_gaussian3d(spec, grids, normalize);
  if (b == "hermite2d") return build_hermite2d(spec, grids, normalize);
  if (b == "box_kernel_phi") return build_box_phi(spec, grids, normalize);
  if (b == "lambda_profile_psi") return build_lambda_profile(spec, grids, normalize);
  if (b == "random_bandlimited") return build_random(spec, grids, normalize);
  throw ConfigError("unknown builder '" + b + "'");
}

std::vector<double> hermite_functions(int nmax, double x) {
  std::vector<double> h(static_cast<std::size_t>(std::max(nmax, 0)) + 1);
  const double z = std::sqrt(2.0 * kPi) * x;
  h[0] = std::pow(2.0, 0.25) * std::exp(-kPi * x * x);
  if (nmax >= 1) h[1] = std::sqrt(2.0) * z * h[0];
  for (int n = 1; n < nmax; ++n) {
    auto nu = static_cast<std::size_t>(n);
    h[nu + 1] = std::sqrt(2.0 / (n + 1)) * z * h[nu] - std::sqrt(static_cast<double>(n) / (n + 1)) * h[nu - 1];
  }
  return h;
}

double hermite_function(int n, double x) {
  if (n < 0) throw ConfigError("Hermite degree must be non-negative");
  return hermite_functions(n, x)[static_cast<std::size_t>(n)];
}

std::pair<int, int> hermite_degrees(int i) {
  if (i < 0) throw ConfigError("negative Hermite index");
  int d = 0;
  while (i > d) {
    i -= d + 1;
    ++d;
  }
  return {i, d - i};
}

std::vector<Field2D> hermite_basis(int count, const Grid1D& gx, const Grid1D& gy) {
  if (count < 0 || count > kMaxHermite) throw ConfigError("hermite_basis count must lie in [0, 36]");
  std::vector<Field2D> out;
  if (count == 0) return out;
  int maxdeg = 0;
  for (int i = 0; i < count; ++i) {
    auto [a, b] = hermite_degrees(i);
    maxdeg = std::max({maxdeg, a, b});
  }
  check_hermite_resolvable(maxdeg, gx, "x");
  check_hermite_resolvable(maxdeg, gy, "y");
  std::vector<std::vector<double>> hx(static_cast<std::size_t>(maxdeg) + 1), hy(hx.size());
  for (int n = 0; n <= maxdeg; ++n) {
    hx[static_cast<std::size_t>(n)] = hermite_on(gx, n);
    hy[static_cast<std::size_t>(n)] = hermite_on(gy, n);
  }
  for (int i = 0; i < count; ++i) {
    auto [a, b] = hermite_degrees(i);
    Field2D f(gx, gy);
    const auto& ax = hx[static_cast<std::size_t>(a)];
    const auto& by = hy[static_cast<std::size_t>(b)];
    for (std::size_t p = 0; p < gx.count; ++p)
      for (std::size_t q = 0; q < gy.count; ++q) f.at(p, q) = ax[p] * by[q];
    out.push_back(std::move(f));
  }
  return out;
}

cplx box_kernel_phi(double x, double y) {
  const double w = 1.0 - std::abs(y);
  if (w < 0.0) return {};
  return w * sinc(x * w) * expi(-kPi * x);
}

}  // namespace hwave
