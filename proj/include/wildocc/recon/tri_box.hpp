#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>

namespace wildocc::recon {

/// Separating-axis test between a triangle and a closed axis-aligned box
/// given by its center and half extents. Tested axes: the three box face
/// normals, the triangle normal and the nine edge cross products. Touching
/// counts as intersecting.
template <typename Scalar>
bool triangle_box_overlap(const Eigen::Matrix<Scalar, 3, 1>& box_center,
                          const Eigen::Matrix<Scalar, 3, 1>& half,
                          const Eigen::Matrix<Scalar, 3, 1>& a,
                          const Eigen::Matrix<Scalar, 3, 1>& b,
                          const Eigen::Matrix<Scalar, 3, 1>& c) {
  using Vec = Eigen::Matrix<Scalar, 3, 1>;
  const Vec v0 = a - box_center, v1 = b - box_center, v2 = c - box_center;

  // Box face normals: compare the triangle's bounds with the box slab.
  for (int i = 0; i < 3; ++i) {
    const Scalar lo = std::min({v0[i], v1[i], v2[i]});
    const Scalar hi = std::max({v0[i], v1[i], v2[i]});
    if (lo > half[i] || hi < -half[i]) return false;
  }

  const Vec edges[3] = {v1 - v0, v2 - v1, v0 - v2};
  // Edge cross products with the box axes.
  for (const Vec& e : edges) {
    for (int i = 0; i < 3; ++i) {
      Vec axis = Vec::Zero();
      axis[(i + 1) % 3] = -e[(i + 2) % 3];
      axis[(i + 2) % 3] = e[(i + 1) % 3];
      if (axis.squaredNorm() == Scalar(0)) continue;
      const Scalar p0 = axis.dot(v0), p1 = axis.dot(v1), p2 = axis.dot(v2);
      const Scalar r = half.cwiseProduct(axis.cwiseAbs()).sum();
      if (std::min({p0, p1, p2}) > r || std::max({p0, p1, p2}) < -r) return false;
    }
  }

  // Triangle plane.
  const Vec n = edges[0].cross(edges[1]);
  if (n.squaredNorm() > Scalar(0)) {
    const Scalar d = n.dot(v0);
    const Scalar r = half.cwiseProduct(n.cwiseAbs()).sum();
    if (d > r || d < -r) return false;
  }
  return true;
}

}  // namespace wildocc::recon
