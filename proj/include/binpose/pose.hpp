#pragma once

#include <Eigen/Dense>

#include "binpose/error.hpp"

namespace binpose {

inline constexpr double kRotationTolerance = 1e-6;

/// True if R is orthonormal with determinant +1, element-wise within tol.
inline bool is_rotation_matrix(const Eigen::Matrix3d& R,
                               double tol = kRotationTolerance) {
  const Eigen::Matrix3d gram = R.transpose() * R;
  if (((gram - Eigen::Matrix3d::Identity()).array().abs() > tol).any()) {
    return false;
  }
  return std::abs(R.determinant() - 1.0) <= tol;
}

/// Rigid transform mapping bin-space coordinates into scanner-space,
/// translation in millimeters.
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }

  Pose inverse() const {
    Pose inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
  }

  /// Composition: (a * b).apply(p) == a.apply(b.apply(p)).
  friend Pose operator*(const Pose& a, const Pose& b) {
    Pose out;
    out.rotation = a.rotation * b.rotation;
    out.translation = a.rotation * b.translation + a.translation;
    return out;
  }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  /// Builds a pose from a 4x4 homogeneous matrix, validating the rotation
  /// block and the (0 0 0 1) bottom row.
  static Pose from_matrix(const Eigen::Matrix4d& m) {
    const Eigen::RowVector4d bottom = m.row(3);
    if ((bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() >
        1e-9) {
      raise(ErrorCode::invalid_pose, "homogeneous matrix bottom row is not 0 0 0 1");
    }
    Pose pose;
    pose.rotation = m.topLeftCorner<3, 3>();
    pose.translation = m.topRightCorner<3, 1>();
    if (!is_rotation_matrix(pose.rotation)) {
      raise(ErrorCode::invalid_pose,
            "rotation block is not orthonormal with determinant +1");
    }
    return pose;
  }
};

}  // namespace binpose
