#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "wildocc/core/pose.hpp"

namespace wildocc::io {

/// Parses KITTI pose text (12 reals per line, row-major 3x4). Rotations
/// off by more than the pose tolerance but within 1e-3 are projected back
/// onto SO(3) with a warning appended to `warnings`; larger errors throw
/// kInvalidPose. Wrong token counts throw kParse naming the line.
std::vector<RigidPose> parse_poses(const std::string& text, std::vector<std::string>* warnings = nullptr);
std::vector<RigidPose> read_poses(const std::filesystem::path& path,
                                  std::vector<std::string>* warnings = nullptr);
std::string format_poses(const std::vector<RigidPose>& poses);

/// One timestamp (seconds) per line.
std::vector<double> read_timestamps(const std::filesystem::path& path);

}  // namespace wildocc::io
