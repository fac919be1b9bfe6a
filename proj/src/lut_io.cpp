#include "skylut/lut_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "skylut/errors.hpp"

namespace skylut {
namespace {

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

template <typename T>
void put(std::string& out, T v) {
  v = to_little(v);
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(const std::string& in, std::size_t offset) {
  T v;
  std::memcpy(&v, in.data() + offset, sizeof(T));
  return to_little(v);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string hex(std::uint64_t v) {
  std::ostringstream ss;
  ss << "0x" << std::hex << v;
  return ss.str();
}

}  // namespace

std::size_t lut_file_size(const TableDims& d) {
  return kHeaderBytes +
         3 * sizeof(float) * (d.transmittance_texels() + d.irradiance_texels() + d.inscatter_texels());
}

void write_float_file(const std::filesystem::path& path, const FloatFileHeader& header,
                      std::span<const std::span<const float>> grids) {
  std::string out;
  std::size_t total = 0;
  for (const auto& g : grids) total += g.size();
  out.reserve(kHeaderBytes + total * sizeof(float));
  out.append(header.magic.data(), 4);
  put<std::uint32_t>(out, header.version);
  for (auto d : header.dims) put<std::uint32_t>(out, d);
  put<std::uint64_t>(out, header.hash);
  for (const auto& g : grids) {
    for (float v : g) put<float>(out, v);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError("cannot open '" + path.string() + "' for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw FormatError("short write to '" + path.string() + "'");
}

namespace {

FloatFileHeader parse_header(const std::string& in, const char* expected_magic,
                             const std::filesystem::path& path) {
  if (in.size() < kHeaderBytes) {
    throw FormatError("'" + path.string() + "' is truncated: expected at least " +
                      std::to_string(kHeaderBytes) + " header bytes, got " +
                      std::to_string(in.size()));
  }
  FloatFileHeader h;
  std::memcpy(h.magic.data(), in.data(), 4);
  if (std::memcmp(h.magic.data(), expected_magic, 4) != 0) {
    throw FormatError("'" + path.string() + "' has bad magic '" + std::string(h.magic.data(), 4) +
                      "', expected '" + std::string(expected_magic, 4) + "'");
  }
  h.version = get<std::uint32_t>(in, 4);
  if (h.version != kFileVersion) {
    throw FormatError("'" + path.string() + "' has unsupported version " +
                      std::to_string(h.version));
  }
  for (std::size_t i = 0; i < 8; ++i) h.dims[i] = get<std::uint32_t>(in, 8 + 4 * i);
  h.hash = get<std::uint64_t>(in, 40);
  return h;
}

std::vector<float> payload_floats(const std::string& in, const std::filesystem::path& path) {
  const std::size_t payload = in.size() - kHeaderBytes;
  if (payload % sizeof(float) != 0) {
    throw FormatError("'" + path.string() + "' payload of " + std::to_string(payload) +
                      " bytes is not a whole number of floats");
  }
  std::vector<float> out(payload / sizeof(float));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = get<float>(in, kHeaderBytes + i * sizeof(float));
  }
  return out;
}

}  // namespace

std::vector<float> read_float_file(const std::filesystem::path& path, const char* expected_magic,
                                   FloatFileHeader* header) {
  const std::string in = slurp(path);
  const FloatFileHeader h = parse_header(in, expected_magic, path);
  std::vector<float> out = payload_floats(in, path);
  if (header) *header = h;
  return out;
}

void save_tables(const ScatteringTables& t, const std::filesystem::path& path) {
  const auto& d = t.dims;
  d.validate();
  if (t.transmittance.size() != 3 * d.transmittance_texels() ||
      t.irradiance.size() != 3 * d.irradiance_texels() ||
      t.inscatter.size() != 3 * d.inscatter_texels()) {
    throw FormatError("save_tables: grid sizes do not match dims");
  }
  FloatFileHeader h;
  std::memcpy(h.magic.data(), "SKYL", 4);
  h.dims = {std::uint32_t(d.transmittance_w), std::uint32_t(d.transmittance_h),
            std::uint32_t(d.irradiance_w),    std::uint32_t(d.irradiance_h),
            std::uint32_t(d.r),               std::uint32_t(d.mu),
            std::uint32_t(d.mu_s),            std::uint32_t(d.nu)};
  h.hash = t.model_hash;
  const std::span<const float> grids[] = {t.transmittance, t.irradiance, t.inscatter};
  write_float_file(path, h, grids);
}

ScatteringTables load_tables(const std::filesystem::path& path, const LoadOptions& options,
                             std::string* warning) {
  const std::string in = slurp(path);
  const FloatFileHeader h = parse_header(in, "SKYL", path);
  ScatteringTables t;
  auto& d = t.dims;
  d.transmittance_w = static_cast<int>(h.dims[0]);
  d.transmittance_h = static_cast<int>(h.dims[1]);
  d.irradiance_w = static_cast<int>(h.dims[2]);
  d.irradiance_h = static_cast<int>(h.dims[3]);
  d.r = static_cast<int>(h.dims[4]);
  d.mu = static_cast<int>(h.dims[5]);
  d.mu_s = static_cast<int>(h.dims[6]);
  d.nu = static_cast<int>(h.dims[7]);
  for (auto v : h.dims) {
    if (v > (1u << 16)) throw FormatError("'" + path.string() + "' has implausible dims");
  }
  try {
    d.validate();
  } catch (const DomainError& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
  const std::size_t expected = lut_file_size(d);
  const std::size_t actual = in.size();
  if (actual != expected) {
    throw FormatError("'" + path.string() + "' is " + std::string(actual < expected ? "truncated" : "oversized") +
                      ": expected " + std::to_string(expected) + " bytes, got " +
                      std::to_string(actual));
  }
  const std::vector<float> all = payload_floats(in, path);
  t.model_hash = h.hash;
  if (options.expected_hash && *options.expected_hash != h.hash) {
    const std::string msg = "'" + path.string() + "' was built for model hash " + hex(h.hash) +
                            ", expected " + hex(*options.expected_hash);
    if (!options.allow_hash_mismatch) throw FormatError(msg);
    if (warning) *warning = msg;
  }
  const std::size_t nt = 3 * d.transmittance_texels();
  const std::size_t ne = 3 * d.irradiance_texels();
  t.transmittance.assign(all.begin(), all.begin() + nt);
  t.irradiance.assign(all.begin() + nt, all.begin() + nt + ne);
  t.inscatter.assign(all.begin() + nt + ne, all.end());
  return t;
}

}  // namespace skylut
