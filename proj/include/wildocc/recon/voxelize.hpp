#pragma once

#include "wildocc/core/grid.hpp"
#include "wildocc/core/types.hpp"

namespace wildocc::recon {

/// Label written for occupied voxels of a geometry-only grid.
inline constexpr ClassId kOccupiedPlaceholder = 1;

struct VoxelizeOptions {
  /// Also mark every voxel below the lowest occupied voxel of each column.
  bool fill_below_ground = false;
};

/// Surface voxelization: a voxel is occupied iff some triangle touches its
/// closed box. Labels are 0 or kOccupiedPlaceholder.
OccupancyGrid voxelize_mesh(const TriangleMesh& mesh, const GridSpec& spec,
                            const VoxelizeOptions& options = {});

}  // namespace wildocc::recon
