#pragma once

#include <cstddef>
#include <span>

#include "hwave/numerics.hpp"

namespace hwave::fft {

// Unnormalized in-place transforms; forward uses exp(-2 pi i k n / N).
void forward(std::span<cplx> data);
void inverse(std::span<cplx> data);

// Smallest size >= n whose only prime factors are 2, 3 and 5.
std::size_t good_size(std::size_t n);

}  // namespace hwave::fft
