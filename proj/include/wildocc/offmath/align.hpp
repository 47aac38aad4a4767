#pragma once

#include <span>
#include <vector>

#include "wildocc/core/feature_volume.hpp"
#include "wildocc/core/pose.hpp"

namespace wildocc::offmath {

struct TemporalWindowConfig {
  /// Frames including the current one.
  int frames = 4;
  /// Spacing between selected frames, seconds.
  double interval = 0.5;

  void validate() const {
    if (frames < 1) throw Error(ErrorKind::kConfig, "temporal window needs >= 1 frame");
    if (!(interval > 0.0)) throw Error(ErrorKind::kConfig, "temporal interval must be positive");
  }
};

/// Re-expresses `src` (observed with ego pose `pose_src`) in the ego frame of
/// `pose_tgt`. Each target voxel center c maps to pose_src^-1 * pose_tgt * c
/// and copies the feature of the source voxel owning that point (its nearest
/// center); points outside the source grid give a zero vector.
template <typename Scalar>
FeatureVolumeT<Scalar> align_volume(const FeatureVolumeT<Scalar>& src, const RigidPose& pose_src,
                                    const RigidPose& pose_tgt) {
  const GridSpec& spec = src.spec();
  const RigidPose tgt_to_src = pose_src.inverse() * pose_tgt;
  FeatureVolumeT<Scalar> out(spec, src.channels());
  const std::size_t n = spec.voxel_count();
  for (std::size_t v = 0; v < n; ++v) {
    const Point3 mapped = tgt_to_src.apply(voxel_center(spec, spec.unlinear(v)));
    const auto owner = voxel_index(spec, mapped);
    if (!owner) continue;
    const std::size_t from = spec.linear(*owner);
    for (int c = 0; c < src.channels(); ++c) out(c, v) = src(c, from);
  }
  return out;
}

/// As above, checking that the target lattice matches the source lattice.
template <typename Scalar>
FeatureVolumeT<Scalar> align_volume(const FeatureVolumeT<Scalar>& src, const RigidPose& pose_src,
                                    const RigidPose& pose_tgt, const GridSpec& target) {
  if (!(src.spec() == target)) {
    throw Error(ErrorKind::kIncompatibleGrid, "alignment source and target lattices differ");
  }
  return align_volume(src, pose_src, pose_tgt);
}

/// Channel-wise concatenation, oldest volume first.
template <typename Scalar>
FeatureVolumeT<Scalar> temporal_concat(std::span<const FeatureVolumeT<Scalar>> volumes) {
  if (volumes.empty()) throw Error(ErrorKind::kEmptyInput, "nothing to concatenate");
  const auto& first = volumes.front();
  for (const auto& v : volumes) {
    if (!(v.spec() == first.spec()) || v.channels() != first.channels()) {
      throw Error(ErrorKind::kIncompatibleGrid, "temporal volumes differ in lattice or channels");
    }
  }
  FeatureVolumeT<Scalar> out(first.spec(), first.channels() * static_cast<int>(volumes.size()));
  const std::size_t block = first.size();
  for (std::size_t t = 0; t < volumes.size(); ++t) {
    std::copy(volumes[t].data(), volumes[t].data() + block, out.data() + t * block);
  }
  return out;
}

/// Aligns every earlier volume to the pose of the last (current) one and
/// concatenates them, oldest first. `volumes` and `poses` are parallel.
template <typename Scalar>
FeatureVolumeT<Scalar> align_and_concat(std::span<const FeatureVolumeT<Scalar>> volumes,
                                        std::span<const RigidPose> poses) {
  if (volumes.size() != poses.size()) {
    throw Error(ErrorKind::kIncompatibleShape, "one pose per volume is required");
  }
  if (volumes.empty()) throw Error(ErrorKind::kEmptyInput, "nothing to align");
  const RigidPose& current = poses.back();
  std::vector<FeatureVolumeT<Scalar>> aligned;
  aligned.reserve(volumes.size());
  for (std::size_t t = 0; t + 1 < volumes.size(); ++t) {
    aligned.push_back(align_volume(volumes[t], poses[t], current, volumes.back().spec()));
  }
  aligned.push_back(volumes.back());
  return temporal_concat<Scalar>(aligned);
}

/// Frame indices for the temporal window ending at `current`, oldest first:
/// for each step i the latest frame with timestamp <= t_current - i*interval
/// (clamped to the first frame).
std::vector<int> select_history(std::span<const double> timestamps, int current,
                                const TemporalWindowConfig& cfg);

}  // namespace wildocc::offmath
