#include "wildocc/recon/normals.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

#include "wildocc/label/kdtree.hpp"

namespace wildocc::recon {

void OrientedPointSet::validate() const {
  if (normals.size() != points.size()) {
    throw Error(ErrorKind::kPrecondition, "normal count differs from point count");
  }
  for (std::size_t i = 0; i < normals.size(); ++i) {
    if (!points[i].allFinite() || !(std::abs(normals[i].norm() - 1.0) <= 1e-6)) {
      throw Error(ErrorKind::kPrecondition,
                  "oriented point " + std::to_string(i) + " has a non-unit normal");
    }
  }
}

OrientedPointSet estimate_normals(const SemanticPointCloud& cloud, int k_n,
                                  const std::map<int, Point3>& sensor_origins) {
  if (k_n < 3) throw Error(ErrorKind::kPrecondition, "normal estimation needs k_n >= 3");
  if (static_cast<int>(cloud.size()) < k_n) {
    throw Error(ErrorKind::kInsufficientPoints,
                "normal estimation needs at least " + std::to_string(k_n) + " points, got " +
                    std::to_string(cloud.size()));
  }
  const KdTree tree(cloud.points);
  OrientedPointSet out;
  out.points = cloud.points;
  out.normals.resize(cloud.size());

  std::vector<Neighbor> nbrs;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    tree.knn(cloud.points[i], k_n, nbrs);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& nb : nbrs) mean += tree.point(nb.index);
    mean /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& nb : nbrs) {
      const Eigen::Vector3d d = tree.point(nb.index) - mean;
      cov.noalias() += d * d.transpose();
    }
    eig.compute(cov);
    // Eigenvalues come back in ascending order.
    Eigen::Vector3d n = eig.eigenvectors().col(0).normalized();
    if (!n.allFinite()) n = Eigen::Vector3d::UnitZ();

    Point3 sensor = Point3::Zero();
    if (cloud.has_frame_ids()) {
      if (auto it = sensor_origins.find(cloud.frame_ids[i]); it != sensor_origins.end()) {
        sensor = it->second;
      }
    }
    if (n.dot(sensor - cloud.points[i]) < 0.0) n = -n;
    out.normals[i] = n;
  }
  return out;
}

}  // namespace wildocc::recon
