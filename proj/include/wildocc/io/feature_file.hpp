#pragma once

#include <filesystem>

#include "wildocc/core/feature_volume.hpp"
#include "wildocc/io/binary.hpp"

namespace wildocc::io {

/// WFVL layout, little-endian: "WFVL", u16 version (1), u32 channels,
/// 3 x u32 dims, f32 voxel size, 3 x f32 origin, then float32 values,
/// channel-major then i, j, k.
Bytes encode_feature_volume(const FeatureVolume& v);
FeatureVolume decode_feature_volume(const Bytes& bytes);

void write_feature_volume(const std::filesystem::path& path, const FeatureVolume& v);
FeatureVolume read_feature_volume(const std::filesystem::path& path);

}  // namespace wildocc::io
