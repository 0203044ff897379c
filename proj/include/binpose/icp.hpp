#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "binpose/bin_geometry.hpp"
#include "binpose/error.hpp"
#include "binpose/kdtree.hpp"
#include "binpose/pose.hpp"
#include "binpose/rotation.hpp"
#include "binpose/scan.hpp"

namespace binpose {

struct IcpParams {
  int max_iterations = 50;
  double convergence_delta = 0.01;   // mm, mean pair-distance change
  double rejection_radius = 25.0;    // mm, max accepted pair distance
  double model_sample_spacing = 5.0; // mm
  int min_paired_points = 500;       // confidence gate

  void validate() const {
    if (max_iterations < 1) {
      raise(ErrorCode::invalid_config, "max_iterations must be >= 1");
    }
    if (!(convergence_delta > 0) || !(rejection_radius > 0) ||
        !(model_sample_spacing > 0) || min_paired_points <= 0) {
      raise(ErrorCode::invalid_config, "ICP parameters must be positive");
    }
  }
};

struct IcpIteration {
  std::size_t pairs = 0;
  double mean_before_align = 0;  // over this iteration's pairs, current pose
  double mean_after_align = 0;   // same pairs, after the closed-form step
};

struct IcpResult {
  Pose pose;
  int iterations_used = 0;
  double final_mean_distance = 0;  // mm, over the last pair set
  std::size_t paired_points = 0;
  bool confident = false;  // paired_points >= min_paired_points
  std::vector<IcpIteration> trace;
};

/// Regular grid over the five exterior faces of the open-top cuboid plus the
/// four rim strips, bin space. Grid includes both rectangle ends, so a face
/// of extent E carries floor(E/spacing)+1 samples per axis.
inline std::vector<Eigen::Vector3d> sample_bin_model(const BinSpec& spec,
                                                     double spacing) {
  spec.validate();
  if (!(spacing > 0)) {
    raise(ErrorCode::degenerate_sampling, "sample spacing must be positive");
  }
  const double min_dim =
      std::min({spec.inner_length, spec.inner_width, spec.inner_depth});
  if (spacing > min_dim) {
    raise(ErrorCode::degenerate_sampling,
          "sample spacing exceeds the smallest bin dimension");
  }

  const BinSolid solid(spec);
  std::vector<Eigen::Vector3d> points;
  for (const BinSolid::FaceRect& rect : solid.exterior_rects()) {
    const double len_u = rect.edge_u.norm();
    const double len_v = rect.edge_v.norm();
    const int nu = static_cast<int>(std::floor(len_u / spacing)) + 1;
    const int nv = static_cast<int>(std::floor(len_v / spacing)) + 1;
    for (int iu = 0; iu < nu; ++iu) {
      const double fu = nu == 1 ? 0.0 : static_cast<double>(iu) / (nu - 1);
      for (int iv = 0; iv < nv; ++iv) {
        const double fv = nv == 1 ? 0.0 : static_cast<double>(iv) / (nv - 1);
        points.push_back(rect.corner + fu * rect.edge_u + fv * rect.edge_v);
      }
    }
  }
  return points;
}

/// Closed-form least-squares rigid alignment (SVD of the cross-covariance),
/// determinant-corrected so the result is always a proper rotation, even for
/// planar or otherwise degenerate point sets.
inline Pose align_rigid(const std::vector<Eigen::Vector3d>& source,
                        const std::vector<Eigen::Vector3d>& target) {
  const std::size_t n = source.size();
  Eigen::Vector3d centroid_src = Eigen::Vector3d::Zero();
  Eigen::Vector3d centroid_dst = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    centroid_src += source[i];
    centroid_dst += target[i];
  }
  centroid_src /= static_cast<double>(n);
  centroid_dst /= static_cast<double>(n);

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    cov += (source[i] - centroid_src) * (target[i] - centroid_dst).transpose();
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0) {
    d(2, 2) = -1;
  }
  Pose out;
  out.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  out.translation = centroid_dst - out.rotation * centroid_src;
  return out;
}

/// Point-to-point ICP of the sampled bin model against the scan's valid
/// points. Pairs each transformed model sample with its nearest scan point,
/// rejects pairs beyond rejection_radius, solves the closed-form alignment,
/// and stops when the mean pair distance settles or iterations run out.
inline IcpResult refine_icp(const StructuredScan& scan, const Pose& initial,
                            const BinSpec& bin, const IcpParams& params) {
  params.validate();
  if (!is_rotation_matrix(initial.rotation)) {
    raise(ErrorCode::invalid_pose, "initial pose rotation is invalid");
  }

  const std::vector<Eigen::Vector3d> model =
      sample_bin_model(bin, params.model_sample_spacing);
  const KdTree3 index(scan.valid_points());
  if (index.size() == 0) {
    raise(ErrorCode::no_correspondence, "scan has no valid points");
  }
  const double reject_sq = params.rejection_radius * params.rejection_radius;

  IcpResult result;
  result.pose = initial;
  double previous_mean = -1;
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    std::vector<Eigen::Vector3d> paired_model, paired_scan;
    paired_model.reserve(model.size());
    paired_scan.reserve(model.size());
    double sum_dist = 0;
    for (const Eigen::Vector3d& m : model) {
      const Eigen::Vector3d p = result.pose.apply(m);
      const KdTree3::Nearest nn = index.nearest(p);
      if (nn.squared_distance > reject_sq) continue;
      paired_model.push_back(m);
      paired_scan.push_back(index.point(nn.index));
      sum_dist += std::sqrt(nn.squared_distance);
    }
    if (paired_model.empty()) {
      raise(ErrorCode::no_correspondence,
            "no model-to-scan pairs within the rejection radius");
    }
    const double mean = sum_dist / paired_model.size();
    result.paired_points = paired_model.size();
    result.final_mean_distance = mean;
    result.iterations_used = iter + 1;

    if (previous_mean >= 0 &&
        std::abs(mean - previous_mean) < params.convergence_delta) {
      break;
    }
    previous_mean = mean;

    const Pose aligned = align_rigid(paired_model, paired_scan);
    double sum_after = 0;
    for (std::size_t i = 0; i < paired_model.size(); ++i) {
      sum_after += (aligned.apply(paired_model[i]) - paired_scan[i]).norm();
    }
    result.trace.push_back(
        {paired_model.size(), mean, sum_after / paired_model.size()});
    result.pose = aligned;
  }

  result.pose.rotation = canonicalize_symmetry(result.pose.rotation);
  result.confident =
      result.paired_points >= static_cast<std::size_t>(params.min_paired_points);
  return result;
}

}  // namespace binpose
