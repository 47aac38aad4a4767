#include "wildocc/recon/voxelize.hpp"

#include <algorithm>
#include <cmath>

#include "wildocc/recon/tri_box.hpp"

namespace wildocc::recon {

OccupancyGrid voxelize_mesh(const TriangleMesh& mesh, const GridSpec& spec,
                            const VoxelizeOptions& options) {
  spec.validate();
  mesh.validate();
  OccupancyGrid grid(spec);
  const double s = spec.voxel_size;
  const Eigen::Vector3d half = Eigen::Vector3d::Constant(0.5 * s);

  for (const auto& tri : mesh.triangles) {
    const Point3& a = mesh.vertices[tri[0]];
    const Point3& b = mesh.vertices[tri[1]];
    const Point3& c = mesh.vertices[tri[2]];
    const Eigen::Vector3d lo = (a.cwiseMin(b).cwiseMin(c) - spec.origin) / s;
    const Eigen::Vector3d hi = (a.cwiseMax(b).cwiseMax(c) - spec.origin) / s;
    // Closed boxes: a vertex on a cell face also touches the lower cell.
    Index3 first{}, last{};
    bool outside = false;
    for (int ax = 0; ax < 3; ++ax) {
      first[ax] = std::max(0, static_cast<int>(std::ceil(lo[ax])) - 1);
      last[ax] = std::min(spec.dims[ax] - 1, static_cast<int>(std::floor(hi[ax])));
      outside |= first[ax] > last[ax];
    }
    if (outside) continue;
    for (int i = first[0]; i <= last[0]; ++i) {
      for (int j = first[1]; j <= last[1]; ++j) {
        for (int k = first[2]; k <= last[2]; ++k) {
          ClassId& cell = grid.at({i, j, k});
          if (cell != kEmptyClass) continue;
          const Eigen::Vector3d center = voxel_center(spec, {i, j, k});
          if (triangle_box_overlap<double>(center, half, a, b, c)) cell = kOccupiedPlaceholder;
        }
      }
    }
  }

  if (options.fill_below_ground) {
    for (int i = 0; i < spec.dims[0]; ++i) {
      for (int j = 0; j < spec.dims[1]; ++j) {
        int lowest = -1;
        for (int k = 0; k < spec.dims[2] && lowest < 0; ++k) {
          if (grid.at({i, j, k}) != kEmptyClass) lowest = k;
        }
        for (int k = 0; k < lowest; ++k) grid.at({i, j, k}) = kOccupiedPlaceholder;
      }
    }
  }
  return grid;
}

}  // namespace wildocc::recon
