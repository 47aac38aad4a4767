#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wildocc/core/label_map.hpp"
#include "wildocc/core/types.hpp"
#include "wildocc/recon/poisson.hpp"

namespace wildocc::recon {

/// (ground, non-ground). Noise points are in neither.
std::pair<SemanticPointCloud, SemanticPointCloud> split_ground(const SemanticPointCloud& cloud,
                                                               const LabelMap& labels);

struct CoarseToFineResult {
  TriangleMesh mesh;
  TriangleMesh ground;
  TriangleMesh non_ground;
  std::vector<std::string> warnings;
};

/// Ground points reconstructed with `coarse`, non-ground with `fine`, meshes
/// concatenated without stitching. Unless a config sets its own domain,
/// both lattices span the bounding cube of all non-noise points. A
/// partition under 100 points yields an empty mesh and a warning; both
/// partitions empty is kInsufficientPoints.
CoarseToFineResult coarse_to_fine_reconstruct(const SemanticPointCloud& cloud,
                                              const LabelMap& labels,
                                              const PoissonConfig& coarse,
                                              const PoissonConfig& fine, int k_n,
                                              const std::map<int, Point3>& sensor_origins);

}  // namespace wildocc::recon
