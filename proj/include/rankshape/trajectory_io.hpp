#pragma once

// Trajectory files.
//
// HSTB layout (all integers little-endian u32):
//   "HSTB" | version = 1 | T | d | T*d float32 LE, row-major
//   [ | metadata byte length | metadata JSON bytes ]
//
// Values are stored as float32, so a write/read round trip is bit-exact for
// float32-representable matrices. Files ending in ".csv" are read as
// headerless comma-separated rows instead.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "rankshape/spectral_core.hpp"

namespace rankshape {

inline constexpr std::uint32_t kHstbVersion = 1;

struct TrajectoryFile {
  Trajectory matrix;
  std::optional<std::string> metadata;  // raw JSON text
};

std::string encode_hstb(const Trajectory& h, const std::optional<std::string>& metadata = {});
TrajectoryFile decode_hstb(std::span<const std::byte> bytes);

Trajectory parse_csv_trajectory(std::string_view text);

void write_trajectory(const std::filesystem::path& path, const Trajectory& h,
                      const std::optional<std::string>& metadata = {});

/// Reads HSTB, or CSV when the extension is ".csv".
TrajectoryFile read_trajectory_file(const std::filesystem::path& path);
Trajectory read_trajectory(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace rankshape
