#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "wildocc/core/types.hpp"

namespace wildocc {

/// Rigid transform stored as a 4x4 homogeneous matrix. Construction
/// validates the bottom row and the rotation block.
class RigidPose {
 public:
  static constexpr double kOrthoTol = 1e-6;

  RigidPose() : m_(Eigen::Matrix4d::Identity()) {}
  /// Throws kInvalidPose unless the bottom row is [0 0 0 1] and the
  /// rotation block is orthonormal with det +1 within `tol`.
  explicit RigidPose(const Eigen::Matrix4d& m, double tol = kOrthoTol);

  static RigidPose identity() { return {}; }
  static RigidPose from_rt(const Eigen::Matrix3d& r, const Eigen::Vector3d& t);
  static RigidPose translation(const Eigen::Vector3d& t);
  /// Rotation about +Z by `yaw` radians followed by translation `t`.
  static RigidPose yaw(double yaw, const Eigen::Vector3d& t = Eigen::Vector3d::Zero());

  const Eigen::Matrix4d& matrix() const { return m_; }
  Eigen::Matrix3d rotation() const { return m_.topLeftCorner<3, 3>(); }
  Eigen::Vector3d translation() const { return m_.topRightCorner<3, 1>(); }

  Point3 apply(const Point3& p) const {
    return m_.topLeftCorner<3, 3>() * p + m_.topRightCorner<3, 1>();
  }
  Point3 operator*(const Point3& p) const { return apply(p); }
  RigidPose operator*(const RigidPose& other) const;
  RigidPose inverse() const;

 private:
  struct Unchecked {};
  RigidPose(const Eigen::Matrix4d& m, Unchecked) : m_(m) {}

  Eigen::Matrix4d m_;
};

inline Point3 pose_apply(const RigidPose& pose, const Point3& p) { return pose.apply(p); }
inline RigidPose pose_compose(const RigidPose& a, const RigidPose& b) { return a * b; }
inline RigidPose pose_invert(const RigidPose& a) { return a.inverse(); }

/// Nearest rotation in the Frobenius sense (polar factor via SVD), with the
/// determinant forced to +1.
Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& r);

}  // namespace wildocc
