#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "binpose/error.hpp"

namespace binpose {

/// Weights and guards of the joint pose loss.
struct LossConfig {
  double lambda = 1.0;   // weight on the translation L1 term
  double epsilon = 1e-8; // denominator guard of the angular term

  void validate() const {
    if (!(lambda > 0)) {
      raise(ErrorCode::invalid_config, "loss lambda must be positive");
    }
    if (!(epsilon > 0) || epsilon > 1e-6) {
      raise(ErrorCode::invalid_config, "loss epsilon must be in (0, 1e-6]");
    }
  }
};

/// A predicted or ground-truth pose in vector form: unnormalized z and y
/// direction vectors plus translation (mm).
struct PoseVectors {
  Eigen::Vector3d v_z = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d v_y = Eigen::Vector3d::UnitY();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
};

/// Angle between two vectors in radians:
/// acos(<u|v> / (|u||v| + eps)), the acos argument clamped to [-1, 1].
inline double angular_loss(const Eigen::Vector3d& u, const Eigen::Vector3d& v,
                           double epsilon) {
  const double ratio = u.dot(v) / (u.norm() * v.norm() + epsilon);
  return std::acos(std::clamp(ratio, -1.0, 1.0));
}

struct JointLossBreakdown {
  double rot_z = 0;  // angular term on the z directions
  double rot_y = 0;  // angular term on the y directions
  double l1 = 0;     // unweighted translation L1 term
  double total = 0;
};

/// L = L_r(u_z, v_z) + L_r(u_y, v_y) + lambda * L1(t_gt, t_pred).
/// Ground truth directions are expected to come from a canonicalized
/// rotation (canonicalize_symmetry applied before column extraction).
inline JointLossBreakdown joint_loss_breakdown(const PoseVectors& pred,
                                               const PoseVectors& gt,
                                               const LossConfig& cfg) {
  JointLossBreakdown out;
  out.rot_z = angular_loss(gt.v_z, pred.v_z, cfg.epsilon);
  out.rot_y = angular_loss(gt.v_y, pred.v_y, cfg.epsilon);
  out.l1 = (gt.t - pred.t).cwiseAbs().sum();
  out.total = out.rot_z + out.rot_y + cfg.lambda * out.l1;
  return out;
}

inline double joint_loss(const PoseVectors& pred, const PoseVectors& gt,
                         const LossConfig& cfg) {
  return joint_loss_breakdown(pred, gt, cfg).total;
}

struct JointLossGradient {
  /// d L / d (v_z, v_y, t) of the prediction, in that order.
  Eigen::Matrix<double, 9, 1> gradient = Eigen::Matrix<double, 9, 1>::Zero();
  /// Set when any term sits at a non-differentiable point (directions
  /// aligned or antiparallel, or a translation coordinate exactly equal);
  /// the returned values are then subgradients.
  bool nondifferentiable = false;
};

namespace detail {

// Aligned/antiparallel directions make acos' singular; treat anything this
// close to |ratio| = 1 as non-differentiable.
inline constexpr double kAcosSingularTolerance = 1e-6;

/// Gradient of angular_loss(u, v, eps) with respect to v.
inline Eigen::Vector3d angular_loss_gradient(const Eigen::Vector3d& u,
                                             const Eigen::Vector3d& v,
                                             double epsilon,
                                             bool& nondifferentiable) {
  const double nu = u.norm();
  const double nv = v.norm();
  const double q = nu * nv + epsilon;
  const double p = u.dot(v);
  const double ratio = p / q;
  if (1.0 - ratio * ratio < kAcosSingularTolerance) {
    nondifferentiable = true;
    return Eigen::Vector3d::Zero();
  }
  const Eigen::Vector3d dratio = u / q - (p * nu / (q * q)) * (v / nv);
  return -dratio / std::sqrt(1.0 - ratio * ratio);
}

}  // namespace detail

/// Analytic gradient of joint_loss with respect to the 9 predicted scalars.
inline JointLossGradient joint_loss_gradient(const PoseVectors& pred,
                                             const PoseVectors& gt,
                                             const LossConfig& cfg) {
  JointLossGradient out;
  out.gradient.segment<3>(0) = detail::angular_loss_gradient(
      gt.v_z, pred.v_z, cfg.epsilon, out.nondifferentiable);
  out.gradient.segment<3>(3) = detail::angular_loss_gradient(
      gt.v_y, pred.v_y, cfg.epsilon, out.nondifferentiable);
  for (int i = 0; i < 3; ++i) {
    const double d = pred.t[i] - gt.t[i];
    if (d == 0.0) out.nondifferentiable = true;
    out.gradient[6 + i] = cfg.lambda * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0));
  }
  return out;
}

}  // namespace binpose
