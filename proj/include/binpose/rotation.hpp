#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "binpose/error.hpp"

namespace binpose {

/// Two unnormalized vectors giving the orientation of the bin z and y axes
/// in scanner coordinates. Any linearly independent pair determines a unique
/// rotation; degenerate pairs are rejected with an error.
struct RotationVectors {
  Eigen::Vector3d v_z = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d v_y = Eigen::Vector3d::UnitY();
};

inline constexpr double kParallelAngleThreshold = 1e-6;  // radians

/// The 180-degree symmetry rotation of a rectangular bin about its z-axis.
inline Eigen::Matrix3d symmetry_rotation() {
  Eigen::Matrix3d s = Eigen::Matrix3d::Identity();
  s(0, 0) = -1.0;
  s(1, 1) = -1.0;
  return s;
}

namespace detail {

/// R_s * R, computed as an exact sign flip of the first two rows.
inline Eigen::Matrix3d flip_left(const Eigen::Matrix3d& r) {
  Eigen::Matrix3d out = r;
  out.row(0) = -out.row(0);
  out.row(1) = -out.row(1);
  return out;
}

/// R * R_s, computed as an exact sign flip of the first two columns.
inline Eigen::Matrix3d flip_right(const Eigen::Matrix3d& r) {
  Eigen::Matrix3d out = r;
  out.col(0) = -out.col(0);
  out.col(1) = -out.col(1);
  return out;
}

/// Sign rule on the second column: first decisive element of
/// (R(0,1), R(1,1), R(2,1)). Returns +1/-1, or 0 when all three are zero
/// (impossible for a rotation).
inline int column_sign(const Eigen::Matrix3d& r) {
  for (int row = 0; row < 3; ++row) {
    if (r(row, 1) > 0.0) return 1;
    if (r(row, 1) < 0.0) return -1;
  }
  return 0;
}

}  // namespace detail

/// Gram–Schmidt orthogonalization of (v_z, v_y) into a rotation matrix with
/// columns (u_x, u_y, u_z): u_z = v_z/|v_z|, u_y is v_y orthogonalized
/// against u_z and normalized, u_x = u_y × u_z.
inline Eigen::Matrix3d rotation_from_vectors(const RotationVectors& rv) {
  const double nz = rv.v_z.norm();
  const double ny = rv.v_y.norm();
  if (nz == 0.0) {
    raise(ErrorCode::degenerate_parameterization, "v_z is the zero vector");
  }
  if (ny == 0.0) {
    raise(ErrorCode::degenerate_parameterization, "v_y is the zero vector");
  }
  const Eigen::Vector3d uz = rv.v_z / nz;
  const Eigen::Vector3d yhat = rv.v_y / ny;
  // Angle folded to [0, pi/2]; rejects parallel and antiparallel pairs.
  const double angle = std::atan2(uz.cross(yhat).norm(), std::abs(uz.dot(yhat)));
  if (!(angle > kParallelAngleThreshold)) {
    raise(ErrorCode::degenerate_parameterization,
          "v_z and v_y are (nearly) linearly dependent");
  }
  const Eigen::Vector3d wy = rv.v_y - rv.v_y.dot(uz) * uz;
  const Eigen::Vector3d uy = wy.normalized();
  const Eigen::Vector3d ux = uy.cross(uz);
  Eigen::Matrix3d r;
  r.col(0) = ux;
  r.col(1) = uy;
  r.col(2) = uz;
  return r;
}

/// Inverse of rotation_from_vectors up to scale: the third and second
/// columns of R already parameterize it.
inline RotationVectors vectors_from_rotation(const Eigen::Matrix3d& r) {
  RotationVectors rv;
  rv.v_z = r.col(2);
  rv.v_y = r.col(1);
  return rv;
}

/// Selects the canonical member of {R, R_s·R}: the one whose first decisive
/// element of the second column — (0,1), then (1,1), then (2,1) — is
/// positive. Idempotent; exact (the flip is a sign change of two rows).
/// When the second column is (0,0,±1) the two candidates tie on every chain
/// element and R is returned unchanged.
inline Eigen::Matrix3d canonicalize_symmetry(const Eigen::Matrix3d& r) {
  if (r(0, 1) != 0.0 || r(1, 1) != 0.0) {
    return detail::column_sign(r) >= 0 ? r : detail::flip_left(r);
  }
  return r;
}

/// Resolves the physical two-fold frame ambiguity of a freshly constructed
/// bin rotation: a rectangular bin looks identical under R and R·R_s, and a
/// fitter's x-axis sign choice is arbitrary. Picks the member of {R, R·R_s}
/// satisfying the same sign rule as canonicalize_symmetry, so the result is
/// a fixed point of it. Use when producing poses from geometry (synthetic
/// ground truth, wall fitting); use canonicalize_symmetry for the loss /
/// metric contract.
inline Eigen::Matrix3d orient_bin_frame(const Eigen::Matrix3d& r) {
  return detail::column_sign(r) >= 0 ? r : detail::flip_right(r);
}

}  // namespace binpose
