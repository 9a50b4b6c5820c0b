#include "hwave/hwg_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "hwave/errors.hpp"
#include "json.hpp"

namespace hwave {
namespace {

static_assert(std::endian::native == std::endian::little, "HWG1 I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic = {'H', 'W', 'G', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
    throw IoError("truncated HWG1 header in " + path.string());
  return v;
}

void write_axes(std::ofstream& out, std::initializer_list<const Grid1D*> axes) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(axes.size()));
  for (const Grid1D* g : axes) {
    put<double>(out, g->start);
    put<double>(out, g->step);
    put<std::uint64_t>(out, g->count);
  }
}

void write_samples(std::ofstream& out, const std::vector<cplx>& data,
                   const std::filesystem::path& path) {
  // std::complex<double> is layout-compatible with double[2].
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(cplx)));
  if (!out) throw IoError("failed writing " + path.string());
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

void write_hwg(const std::filesystem::path& path, const Field2D& f) {
  auto out = open_out(path);
  write_axes(out, {&f.gx, &f.gy});
  write_samples(out, f.data, path);
}

void write_hwg(const std::filesystem::path& path, const Field3D& f) {
  auto out = open_out(path);
  write_axes(out, {&f.gx, &f.gy, &f.gt});
  write_samples(out, f.data, path);
}

AnyField read_hwg(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic)
    throw IoError(path.string() + " is not an HWG1 file");
  auto version = get<std::uint32_t>(in, path);
  if (version != kVersion) throw IoError("unsupported HWG1 version " + std::to_string(version));
  auto rank = get<std::uint8_t>(in, path);
  if (rank != 2 && rank != 3) throw IoError("HWG1 rank must be 2 or 3");
  std::vector<Grid1D> axes;
  std::uint64_t total = 1;
  for (int a = 0; a < rank; ++a) {
    double start = get<double>(in, path);
    double step = get<double>(in, path);
    auto count = get<std::uint64_t>(in, path);
    if (count > (std::uint64_t{1} << 34)) throw IoError("HWG1 axis count out of range");
    try {
      axes.push_back(make_grid(start, step, static_cast<long long>(count)));
    } catch (const ConfigError& e) {
      throw IoError(std::string("invalid HWG1 axis: ") + e.what());
    }
    total *= count;
  }
  std::vector<cplx> data(total);
  if (!in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(total * sizeof(cplx))))
    throw IoError("truncated HWG1 samples in " + path.string());
  if (in.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes in " + path.string());
  if (rank == 2) {
    Field2D f(axes[0], axes[1]);
    f.data = std::move(data);
    return f;
  }
  Field3D f(axes[0], axes[1], axes[2]);
  f.data = std::move(data);
  return f;
}

void write_kernel(const std::filesystem::path& path, const WeylKernel& k) {
  write_hwg(path, k.values);
  std::ofstream meta(path.string() + ".json", std::ios::trunc);
  if (!meta) throw IoError("cannot write kernel metadata for " + path.string());
  nlohmann::ordered_json j;
  j["lambda"] = k.lambda;
  meta << j.dump() << '\n';
}

WeylKernel read_kernel(const std::filesystem::path& path) {
  auto any = read_hwg(path);
  if (!std::holds_alternative<Field2D>(any)) throw IoError("kernel file must have rank 2");
  std::ifstream meta(path.string() + ".json");
  if (!meta) throw IoError("missing kernel metadata " + path.string() + ".json");
  nlohmann::json j;
  try {
    meta >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad kernel metadata: ") + e.what());
  }
  if (!j.contains("lambda") || !j["lambda"].is_number()) throw IoError("kernel metadata lacks lambda");
  return WeylKernel{j["lambda"].get<double>(), std::get<Field2D>(std::move(any))};
}

}  // namespace hwave
