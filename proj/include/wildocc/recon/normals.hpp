#pragma once

#include <map>
#include <vector>

#include "wildocc/core/types.hpp"

namespace wildocc::recon {

/// Points with unit normals, the input to surface reconstruction.
struct OrientedPointSet {
  std::vector<Point3> points;
  std::vector<Eigen::Vector3d> normals;

  std::size_t size() const { return points.size(); }
  /// Throws kPrecondition unless lengths match and every normal is unit
  /// length within 1e-6.
  void validate() const;
};

/// PCA normals from the `k_n` nearest neighbours (the point itself
/// included), flipped to face the sensor that observed each point. Points
/// without a frame id, or whose frame is missing from `sensor_origins`, are
/// oriented toward the current-frame origin.
OrientedPointSet estimate_normals(const SemanticPointCloud& cloud, int k_n,
                                  const std::map<int, Point3>& sensor_origins);

}  // namespace wildocc::recon
