#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hwave {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

// Closed axes integrate with the trapezoid rule and treat the function as
// zero outside. Periodic and antiperiodic axes are half-open windows of one
// period (antiperiodic: f(t + P) = -f(t)) with uniform weights.
enum class Boundary { zero, periodic, antiperiodic };

std::string to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

struct Grid1D {
  double start = 0.0;
  double step = 1.0;
  std::size_t count = 2;
  Boundary boundary = Boundary::zero;

  double point(std::size_t i) const { return start + static_cast<double>(i) * step; }
  double last() const { return point(count - 1); }
  double weight(std::size_t i) const;
  double period() const { return static_cast<double>(count) * step; }
  // Node index of x when x sits on the grid (within tol steps).
  std::optional<std::ptrdiff_t> node(double x, double tol = 1e-9) const;

  bool operator==(const Grid1D&) const = default;
};

Grid1D make_grid(double start, double step, long long count, Boundary b = Boundary::zero);
// Closed grid [-half_width, half_width]; half_width must be a multiple of step.
Grid1D symmetric_grid(double half_width, double step);

struct Field2D {
  Grid1D gx, gy;
  std::vector<cplx> data;

  Field2D() = default;
  Field2D(Grid1D x, Grid1D y) : gx(x), gy(y), data(x.count * y.count) {}

  std::size_t nx() const { return gx.count; }
  std::size_t ny() const { return gy.count; }
  cplx& at(std::size_t i, std::size_t j) { return data[i * gy.count + j]; }
  const cplx& at(std::size_t i, std::size_t j) const { return data[i * gy.count + j]; }
};

struct Field3D {
  Grid1D gx, gy, gt;
  std::vector<cplx> data;

  Field3D() = default;
  Field3D(Grid1D x, Grid1D y, Grid1D t)
      : gx(x), gy(y), gt(t), data(x.count * y.count * t.count) {}

  std::size_t nx() const { return gx.count; }
  std::size_t ny() const { return gy.count; }
  std::size_t nt() const { return gt.count; }
  cplx& at(std::size_t i, std::size_t j, std::size_t k) {
    return data[(i * gy.count + j) * gt.count + k];
  }
  const cplx& at(std::size_t i, std::size_t j, std::size_t k) const {
    return data[(i * gy.count + j) * gt.count + k];
  }
  std::span<cplx> column(std::size_t i, std::size_t j) {
    return {data.data() + (i * gy.count + j) * gt.count, gt.count};
  }
  std::span<const cplx> column(std::size_t i, std::size_t j) const {
    return {data.data() + (i * gy.count + j) * gt.count, gt.count};
  }
};

// Neumaier-compensated complex accumulator.
class CompensatedSum {
 public:
  void add(cplx v) {
    add_part(re_, cre_, v.real());
    add_part(im_, cim_, v.imag());
  }
  CompensatedSum& operator+=(cplx v) {
    add(v);
    return *this;
  }
  cplx value() const { return {re_ + cre_, im_ + cim_}; }

 private:
  static void add_part(double& s, double& c, double v) {
    double t = s + v;
    if (std::abs(s) >= std::abs(v))
      c += (s - t) + v;
    else
      c += (v - t) + s;
    s = t;
  }
  double re_ = 0.0, cre_ = 0.0, im_ = 0.0, cim_ = 0.0;
};

struct TruncationPolicy {
  int r_range = 4;
  int s_range = 8;
  int m_range = 8;
  double tail_eps = 1e-8;
  // s_range applies at unit effective kernel parameter; the window widens
  // as 1/|mu| below it (kernels spread like 1/|mu| in xi + eta).
  bool scale_s = true;
  int s_cap = 4096;

  void validate() const;
};

enum class SumIndex { r, s, m };

struct PeriodizedSum {
  cplx value;
  bool converged = true;
  int range = 0;
};

PeriodizedSum periodize_sum(const std::function<cplx(int)>& term, const TruncationPolicy& pol,
                            SumIndex which);
// Same contract with an explicit half-width.
PeriodizedSum periodize_sum(const std::function<cplx(int)>& term, int range, double tail_eps);

void require_finite(std::span<const cplx> v, const char* what);

cplx integrate(const Field2D& f);
cplx integrate(const Field3D& f);
cplx inner_product(const Field2D& f, const Field2D& g);
cplx inner_product(const Field3D& f, const Field3D& g);
double norm2(const Field2D& f);
double norm2(const Field3D& f);

enum class FtMethod { direct, chirp };

// g(v) = integral of f(x) exp(i pi lambda x v) dx, trapezoid in x.
std::vector<cplx> oscillatory_ft(std::span<const cplx> f, const Grid1D& xg, double lambda,
                                 const Grid1D& vg, FtMethod method = FtMethod::direct);

// Worker count for parallel loops (<= 0 restores the runtime default).
void set_threads(int n);
int threads();

// Quadrature weight of every node.
std::vector<double> axis_weights(const Grid1D& g);

}  // namespace hwave
