#pragma once

#include <optional>
#include <vector>

#include "wildocc/core/types.hpp"

namespace wildocc {

/// Voxel lattice geometry. Axis order is X=i, Y=j, Z=k; cell (i,j,k) owns the
/// half-open box [origin + idx*s, origin + (idx+1)*s).
struct GridSpec {
  Point3 origin{0.0, -10.0, -2.0};
  Index3 dims{100, 100, 40};
  double voxel_size = 0.2;

  static GridSpec default_spec() { return {}; }

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  Point3 max_corner() const {
    return origin + voxel_size * Point3(dims[0], dims[1], dims[2]);
  }
  bool contains(const Index3& idx) const {
    return idx[0] >= 0 && idx[1] >= 0 && idx[2] >= 0 && idx[0] < dims[0] &&
           idx[1] < dims[1] && idx[2] < dims[2];
  }
  /// Linear offset, i slowest and k fastest.
  std::size_t linear(const Index3& idx) const {
    return (static_cast<std::size_t>(idx[0]) * dims[1] + idx[1]) * dims[2] + idx[2];
  }
  Index3 unlinear(std::size_t n) const {
    const int k = static_cast<int>(n % dims[2]);
    n /= dims[2];
    const int j = static_cast<int>(n % dims[1]);
    return {static_cast<int>(n / dims[1]), j, k};
  }

  void validate() const;

  bool operator==(const GridSpec& o) const {
    return origin == o.origin && dims == o.dims && voxel_size == o.voxel_size;
  }
};

/// Center of voxel `idx`; throws kRange when out of the lattice.
Point3 voxel_center(const GridSpec& spec, const Index3& idx);

/// Unbounded cell index containing `p` (may lie outside the lattice).
Index3 cell_of(const GridSpec& spec, const Point3& p);

/// Owning voxel of `p`, or nullopt when outside the grid.
std::optional<Index3> voxel_index(const GridSpec& spec, const Point3& p);

/// Dense per-voxel class ids, 0 = empty and 255 = noise/ignore.
struct OccupancyGrid {
  GridSpec spec;
  std::vector<ClassId> labels;

  OccupancyGrid() = default;
  explicit OccupancyGrid(const GridSpec& s, ClassId fill = kEmptyClass)
      : spec(s), labels(s.voxel_count(), fill) {}

  ClassId& at(const Index3& idx) { return labels[spec.linear(idx)]; }
  ClassId at(const Index3& idx) const { return labels[spec.linear(idx)]; }

  std::size_t count_if_label(ClassId c) const;
  std::size_t occupied_count() const;

  bool operator==(const OccupancyGrid& o) const {
    return spec == o.spec && labels == o.labels;
  }
};

}  // namespace wildocc
