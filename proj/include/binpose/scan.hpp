#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "binpose/error.hpp"

namespace binpose {

/// Organized single-view grid of 3D points in scanner space, millimeters.
/// Points are stored at the precision of the on-disk format (32-bit floats);
/// pixels without a valid return carry valid=false and are excluded from all
/// geometry. Immutable by convention once filled.
struct StructuredScan {
  int width = 0;
  int height = 0;
  std::vector<Eigen::Vector3f> points;  // row-major, width*height entries
  std::vector<std::uint8_t> valid;      // same layout, 0/1

  StructuredScan() = default;
  StructuredScan(int w, int h)
      : width(w),
        height(h),
        points(static_cast<std::size_t>(w) * h, Eigen::Vector3f::Zero()),
        valid(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t index(int row, int col) const {
    return static_cast<std::size_t>(row) * width + col;
  }

  bool is_valid(int row, int col) const { return valid[index(row, col)] != 0; }

  Eigen::Vector3d point(int row, int col) const {
    return points[index(row, col)].cast<double>();
  }

  void set_point(int row, int col, const Eigen::Vector3f& p) {
    const std::size_t i = index(row, col);
    points[i] = p;
    valid[i] = p.allFinite() ? 1 : 0;
  }

  void set_invalid(int row, int col) { valid[index(row, col)] = 0; }

  std::size_t valid_count() const {
    std::size_t n = 0;
    for (std::uint8_t v : valid) n += v;
    return n;
  }

  /// All valid points as doubles, row-major order.
  std::vector<Eigen::Vector3d> valid_points() const {
    std::vector<Eigen::Vector3d> out;
    out.reserve(valid_count());
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (valid[i]) out.push_back(points[i].cast<double>());
    }
    return out;
  }
};

/// Cuboid bin description, millimeters. The longer inner dimension runs along
/// the bin x-axis, depth along z (positive z out of the opening).
struct BinSpec {
  double inner_length = 0;  // bin x extent
  double inner_width = 0;   // bin y extent
  double inner_depth = 0;   // bin z extent, floor to rim
  double wall_thickness = 0;

  void validate() const {
    if (!(inner_width > 0) || !(inner_length >= inner_width)) {
      raise(ErrorCode::invalid_bin_spec,
            "bin requires inner_length >= inner_width > 0");
    }
    if (!(inner_depth > 0) || !(wall_thickness > 0)) {
      raise(ErrorCode::invalid_bin_spec,
            "bin requires positive inner_depth and wall_thickness");
    }
  }

  double outer_length() const { return inner_length + 2 * wall_thickness; }
  double outer_width() const { return inner_width + 2 * wall_thickness; }
  double outer_height() const { return inner_depth + wall_thickness; }
};

}  // namespace binpose
