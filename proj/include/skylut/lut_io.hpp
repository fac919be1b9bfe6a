#pragma once

// Binary table files. Layout (little-endian):
//   char[4] magic, u32 version = 1, u32 dims[8], u64 model_hash,
//   then float32 grids, 3 floats per texel.
// For LUTs ("SKYL") dims are transmittance w h, irradiance w h, inscatter
// r mu mu_s nu, followed by the transmittance, irradiance and inscatter
// grids. HDR images ("SKYI") use dims {width, height, 0, ...}.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "skylut/tables.hpp"

namespace skylut {

inline constexpr std::uint32_t kFileVersion = 1;
inline constexpr std::size_t kHeaderBytes = 4 + 4 + 8 * 4 + 8;

std::size_t lut_file_size(const TableDims& dims);

void save_tables(const ScatteringTables& tables, const std::filesystem::path& path);

struct LoadOptions {
  std::optional<std::uint64_t> expected_hash;
  bool allow_hash_mismatch = false;
};

// Throws FormatError on bad magic/version/dims/size. A hash mismatch throws
// unless allowed, in which case `warning` receives the message.
ScatteringTables load_tables(const std::filesystem::path& path, const LoadOptions& options = {},
                             std::string* warning = nullptr);

struct FloatFileHeader {
  std::array<char, 4> magic{};
  std::uint32_t version = kFileVersion;
  std::array<std::uint32_t, 8> dims{};
  std::uint64_t hash = 0;
};

void write_float_file(const std::filesystem::path& path, const FloatFileHeader& header,
                      std::span<const std::span<const float>> grids);
// Reads the header and every float after it; `expected_magic` is checked.
std::vector<float> read_float_file(const std::filesystem::path& path, const char* expected_magic,
                                   FloatFileHeader* header);

}  // namespace skylut
