#pragma once

#include <optional>
#include <span>

#include "wildocc/core/grid.hpp"
#include "wildocc/core/label_map.hpp"
#include "wildocc/label/kdtree.hpp"

namespace wildocc {

struct KnnConfig {
  int k = 15;
  /// Neighbours farther than this do not vote; a voxel with none left is
  /// labeled noise.
  std::optional<double> max_radius;

  void validate() const;
};

/// Modal class among `neighbors`, where `labels[n.index]` is each
/// neighbour's class. Ties go to the class with the smaller summed
/// Euclidean distance, then to the smaller class id. Returns kNoiseClass
/// for an empty set.
ClassId majority_vote(std::span<const Neighbor> neighbors, std::span<const ClassId> labels);

/// Labels each occupied voxel of a boolean grid (labels 0/1) by a k-NN vote
/// over the non-noise points of `cloud`, queried at the voxel center.
/// Equidistant candidates for the last neighbour slot are taken in
/// (x, y, z, label) order, which makes the result independent of point order.
OccupancyGrid knn_label(const OccupancyGrid& occupancy, const SemanticPointCloud& cloud,
                        const KnnConfig& cfg, const LabelMap& labels);

}  // namespace wildocc
