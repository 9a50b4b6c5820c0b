#pragma once

#include <span>
#include <vector>

#include "hwave/numerics.hpp"

namespace hwave {

// Trigonometric (band-limited) interpolant of samples taken at integer
// positions 0..n-1. Zero boundary pads the line and returns 0 outside
// [0, n-1]; periodic and antiperiodic lines wrap with period n.
class LineSpectrum {
 public:
  LineSpectrum(std::span<const cplx> samples, Boundary b);

  // out[i] = interpolant(first + i * stride). The stride must be a dyadic
  // rational p / 2^e with e <= 10.
  void sample(double first, double stride, std::span<cplx> out) const;

  std::size_t size() const { return n_; }

 private:
  std::vector<cplx> samples_;
  std::vector<cplx> spectrum_;
  Boundary boundary_;
  std::size_t n_ = 0;
  std::size_t m_ = 0;
};

void resample_line(std::span<const cplx> samples, Boundary b, double first, double stride,
                   std::span<cplx> out);

// Dyadic denominator of x (1, 2, 4, ...), or 0 when x is not dyadic up to 2^10.
std::size_t dyadic_denominator(double x);

}  // namespace hwave
