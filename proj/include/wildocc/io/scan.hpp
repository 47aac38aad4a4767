#pragma once

#include <filesystem>
#include <vector>

#include "wildocc/core/label_map.hpp"
#include "wildocc/core/types.hpp"

namespace wildocc::io {

/// KITTI/RELLIS velodyne scan: float32 x, y, z, intensity per point.
SemanticPointCloud read_point_bin(const std::filesystem::path& path);
void write_point_bin(const std::filesystem::path& path, const SemanticPointCloud& cloud);

/// Raw uint32 label records.
std::vector<std::uint32_t> read_raw_labels(const std::filesystem::path& path);
void write_raw_labels(const std::filesystem::path& path, const std::vector<std::uint32_t>& raw);

/// Semantic id is the low 16 bits of each record, remapped through `map`;
/// ids the map does not know become noise.
std::vector<ClassId> read_labels(const std::filesystem::path& path, const LabelMap& map);

/// Scan plus labels; throws kPairing when the counts differ.
SemanticPointCloud read_labeled_scan(const std::filesystem::path& bin,
                                     const std::filesystem::path& label, const LabelMap& map);

/// Text label map:
///   class <id> <name> [ground]
///   remap <raw-id> <class-id>
/// Blank lines and `#` comments are ignored.
LabelMap read_label_map(const std::filesystem::path& path);
void write_label_map(const std::filesystem::path& path, const LabelMap& map);

}  // namespace wildocc::io
