#pragma once

#include <filesystem>

#include "wildocc/core/grid.hpp"
#include "wildocc/io/binary.hpp"

namespace wildocc::io {

inline constexpr std::uint16_t kGridVersion = 1;
inline constexpr std::size_t kGridHeaderBytes = 34;

/// WOCC layout, little-endian: "WOCC", u16 version, 3 x u32 dims, f32 voxel
/// size, 3 x f32 origin, then one label byte per voxel with i slowest.
Bytes encode_grid(const OccupancyGrid& grid);
OccupancyGrid decode_grid(const Bytes& bytes);

void write_grid(const std::filesystem::path& path, const OccupancyGrid& grid);
OccupancyGrid read_grid(const std::filesystem::path& path);

}  // namespace wildocc::io
