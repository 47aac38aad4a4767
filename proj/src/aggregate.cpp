#include "wildocc/aggregate.hpp"

#include <string>

namespace wildocc {

SemanticPointCloud frame_to_world(const PosedFrame& frame) {
  frame.cloud.validate();
  SemanticPointCloud out = frame.cloud;
  for (auto& p : out.points) p = frame.pose_world.apply(p);
  if (!out.has_frame_ids()) out.frame_ids.assign(out.size(), frame.frame_index);
  return out;
}

SemanticPointCloud aggregate_window(const std::vector<PosedFrame>& frames,
                                    const RigidPose& world_to_current, int window) {
  if (frames.empty() || window < 1) {
    throw Error(ErrorKind::kEmptyInput, "aggregation window is empty");
  }
  if (window > static_cast<int>(frames.size())) {
    throw Error(ErrorKind::kPrecondition, "window " + std::to_string(window) + " exceeds " +
                                              std::to_string(frames.size()) + " frames");
  }
  std::size_t total = 0;
  for (int f = 0; f < window; ++f) total += frames[f].cloud.size();

  SemanticPointCloud out;
  out.reserve(total);
  out.frame_ids.reserve(total);
  bool keep_intensity = true;
  for (int f = 0; f < window; ++f) keep_intensity &= frames[f].cloud.has_intensity();
  for (int f = 0; f < window; ++f) {
    const PosedFrame& frame = frames[f];
    frame.cloud.validate();
    // Compose once so each point is transformed by a single matrix.
    const RigidPose ego_to_current = world_to_current * frame.pose_world;
    for (std::size_t i = 0; i < frame.cloud.size(); ++i) {
      out.points.push_back(ego_to_current.apply(frame.cloud.points[i]));
      out.labels.push_back(frame.cloud.labels[i]);
      out.frame_ids.push_back(frame.cloud.has_frame_ids() ? frame.cloud.frame_ids[i]
                                                          : frame.frame_index);
      if (keep_intensity) out.intensity.push_back(frame.cloud.intensity[i]);
    }
  }
  if (total == 0) out.frame_ids.clear();
  return out;
}

std::pair<int, int> window_range(int count, int keyframe, int window, WindowPlacement placement,
                                 int offset) {
  if (window < 1) throw Error(ErrorKind::kEmptyInput, "aggregation window is empty");
  int first = placement == WindowPlacement::kCentered ? keyframe - window / 2
                                                      : keyframe - window + 1;
  first += offset;
  const int last = first + window;
  if (first < 0 || last > count || keyframe < first || keyframe >= last) {
    throw Error(ErrorKind::kRange, "window of " + std::to_string(window) + " frames around frame " +
                                       std::to_string(keyframe) + " does not fit " +
                                       std::to_string(count) + " frames");
  }
  return {first, last};
}

std::map<int, Point3> sensor_origins(const std::vector<PosedFrame>& frames,
                                     const RigidPose& world_to_current) {
  std::map<int, Point3> out;
  for (const auto& f : frames) {
    out[f.frame_index] = world_to_current.apply(f.pose_world.translation());
  }
  return out;
}

}  // namespace wildocc
