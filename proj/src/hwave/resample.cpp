#include "hwave/resample.hpp"

#include <algorithm>
#include <cmath>

#include "hwave/errors.hpp"
#include "hwave/fft.hpp"

namespace hwave {
namespace {

constexpr double kIndexTol = 1e-9;

bool is_integer(double x) { return std::abs(x - std::nearbyint(x)) <= kIndexTol; }

cplx expi(double a) { return {std::cos(a), std::sin(a)}; }

// out[k] = exp(i (a0 + k da)) by recurrence, re-anchored every 32 steps.
void phase_ramp(double a0, double da, std::size_t n, cplx* out) {
  const cplx step = expi(da);
  cplx ph;
  for (std::size_t k = 0; k < n; ++k) {
    ph = (k % 32 == 0) ? expi(a0 + static_cast<double>(k) * da) : ph * step;
    out[k] = ph;
  }
}

std::ptrdiff_t wrap(std::ptrdiff_t i, std::ptrdiff_t n) {
  std::ptrdiff_t r = i % n;
  return r < 0 ? r + n : r;
}

// Exact lookup for integer positions.
void gather(std::span<const cplx> samples, Boundary b, double first, double stride,
            std::span<cplx> out) {
  const auto n = static_cast<std::ptrdiff_t>(samples.size());
  auto f = static_cast<std::ptrdiff_t>(std::nearbyint(first));
  auto s = static_cast<std::ptrdiff_t>(std::nearbyint(stride));
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::ptrdiff_t p = f + static_cast<std::ptrdiff_t>(i) * s;
    if (b == Boundary::zero) {
      out[i] = (p >= 0 && p < n) ? samples[static_cast<std::size_t>(p)] : cplx{};
    } else {
      std::ptrdiff_t w = wrap(p, n);
      cplx v = samples[static_cast<std::size_t>(w)];
      if (b == Boundary::antiperiodic && ((p - w) / n) % 2 != 0) v = -v;
      out[i] = v;
    }
  }
}

}  // namespace

std::size_t dyadic_denominator(double x) {
  for (std::size_t q = 1; q <= 1024; q *= 2)
    if (is_integer(x * static_cast<double>(q))) return q;
  return 0;
}

LineSpectrum::LineSpectrum(std::span<const cplx> samples, Boundary b)
    : samples_(samples.begin(), samples.end()), boundary_(b), n_(samples.size()) {
  m_ = boundary_ == Boundary::zero ? fft::good_size(n_ + 8) : n_;
  spectrum_.assign(m_, cplx{});
  std::copy(samples_.begin(), samples_.end(), spectrum_.begin());
  if (boundary_ == Boundary::antiperiodic) {
    std::vector<cplx> ph(n_);
    phase_ramp(0.0, kPi / static_cast<double>(n_), n_, ph.data());
    for (std::size_t k = 0; k < n_; ++k) spectrum_[k] *= ph[k];
  }
  fft::forward(spectrum_);
}

void LineSpectrum::sample(double first, double stride, std::span<cplx> out) const {
  const auto n = static_cast<std::ptrdiff_t>(n_);
  if (is_integer(first) && is_integer(stride)) {
    gather(samples_, boundary_, first, stride, out);
    return;
  }

  std::size_t q = dyadic_denominator(stride);
  if (q == 0) throw ConfigError("resampling stride must be a dyadic rational");
  const double qd = static_cast<double>(q);
  const std::size_t big = q * m_;
  const double scaled = first * qd;
  const double base = std::floor(scaled + kIndexTol);
  const double delta = std::max(0.0, scaled - base);
  const auto step_up = static_cast<std::ptrdiff_t>(std::nearbyint(stride * qd));

  std::vector<cplx> z(big, cplx{});
  const auto m = static_cast<std::ptrdiff_t>(m_);
  const double bigd = static_cast<double>(big);
  // pw[k] = exp(2 pi i k delta / big); negative frequencies use the conjugate.
  std::vector<cplx> pw(static_cast<std::size_t>(m / 2 + 1));
  phase_ramp(0.0, 2.0 * kPi * delta / bigd, pw.size(), pw.data());
  for (std::ptrdiff_t k = 0; k < m; ++k) {
    std::ptrdiff_t ks = k <= m / 2 ? k : k - m;
    if (m % 2 == 0 && k == m / 2) {
      cplx half = 0.5 * spectrum_[static_cast<std::size_t>(k)];
      const cplx p = pw[static_cast<std::size_t>(m / 2)];
      z[static_cast<std::size_t>(m / 2)] += half * p;
      z[static_cast<std::size_t>(wrap(-m / 2, static_cast<std::ptrdiff_t>(big)))] += half * std::conj(p);
      continue;
    }
    const cplx p = ks >= 0 ? pw[static_cast<std::size_t>(ks)] : std::conj(pw[static_cast<std::size_t>(-ks)]);
    z[static_cast<std::size_t>(wrap(ks, static_cast<std::ptrdiff_t>(big)))] +=
        spectrum_[static_cast<std::size_t>(k)] * p;
  }
  fft::inverse(z);
  const double norm = 1.0 / static_cast<double>(m_);
  const auto bigp = static_cast<std::ptrdiff_t>(big);
  const auto b0 = static_cast<std::ptrdiff_t>(base);
  std::vector<cplx> post;
  if (boundary_ == Boundary::antiperiodic) {
    post.resize(out.size());
    phase_ramp(-kPi * first / static_cast<double>(n), -kPi * stride / static_cast<double>(n), out.size(),
               post.data());
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    double p = first + static_cast<double>(i) * stride;
    std::ptrdiff_t idx = b0 + static_cast<std::ptrdiff_t>(i) * step_up;
    if (boundary_ == Boundary::zero) {
      if (p < -kIndexTol || p > static_cast<double>(n - 1) + kIndexTol) {
        out[i] = cplx{};
        continue;
      }
      out[i] = z[static_cast<std::size_t>(wrap(idx, bigp))] * norm;
    } else {
      cplx v = z[static_cast<std::size_t>(wrap(idx, bigp))] * norm;
      if (boundary_ == Boundary::antiperiodic) v *= post[i];
      out[i] = v;
    }
  }
}

void resample_line(std::span<const cplx> samples, Boundary b, double first, double stride,
                   std::span<cplx> out) {
  if (is_integer(first) && is_integer(stride)) {
    gather(samples, b, first, stride, out);
    return;
  }
  LineSpectrum(samples, b).sample(first, stride, out);
}

}  // namespace hwave
