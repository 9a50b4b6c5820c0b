#pragma once

#include <filesystem>
#include <variant>

#include "hwave/numerics.hpp"
#include "hwave/weyl.hpp"

namespace hwave {

// HWG1: magic "HWG1", u32 version (1), u8 rank (2 or 3), per axis
// {f64 start, f64 step, u64 count}, then row-major samples (last axis
// fastest) as little-endian f64 (re, im) pairs. Axis boundaries are not
// stored; loaded axes are closed.
using AnyField = std::variant<Field2D, Field3D>;

void write_hwg(const std::filesystem::path& path, const Field2D& f);
void write_hwg(const std::filesystem::path& path, const Field3D& f);
AnyField read_hwg(const std::filesystem::path& path);

// Kernel as a rank-2 HWG1 file plus "<path>.json" holding {"lambda": ...}.
void write_kernel(const std::filesystem::path& path, const WeylKernel& k);
WeylKernel read_kernel(const std::filesystem::path& path);

}  // namespace hwave
