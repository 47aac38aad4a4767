#pragma once

#include <map>
#include <vector>

#include "wildocc/core/pose.hpp"
#include "wildocc/core/types.hpp"

namespace wildocc {

/// One LiDAR sweep in ego coordinates with its ego-to-world pose.
struct PosedFrame {
  SemanticPointCloud cloud;
  RigidPose pose_world;
  double timestamp = 0.0;
  int frame_index = 0;
};

/// Where a window sits relative to the keyframe.
enum class WindowPlacement { kCentered, kTrailing };

/// Ego cloud mapped through the frame's world pose. Frame ids are set to
/// `frame.frame_index` when the input carries none.
SemanticPointCloud frame_to_world(const PosedFrame& frame);

/// Concatenates `frames` in world coordinates and maps the result through
/// `world_to_current`. Output order is frame order, then point order.
/// `window` must satisfy 1 <= window <= frames.size(); only the first
/// `window` frames are used.
SemanticPointCloud aggregate_window(const std::vector<PosedFrame>& frames,
                                    const RigidPose& world_to_current, int window);

/// Index range [first, last) of the window for `keyframe` in a sequence of
/// `count` frames, or throws kRange if it does not fit.
std::pair<int, int> window_range(int count, int keyframe, int window, WindowPlacement placement,
                                 int offset = 0);

/// Sensor origin of each frame expressed in current coordinates, keyed by
/// frame index.
std::map<int, Point3> sensor_origins(const std::vector<PosedFrame>& frames,
                                     const RigidPose& world_to_current);

}  // namespace wildocc
