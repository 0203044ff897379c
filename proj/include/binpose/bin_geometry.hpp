#pragma once

#include <array>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "binpose/scan.hpp"

namespace binpose {

struct Ray {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();  // unit length
};

enum class BinFace {
  outer_top,  // rim annulus at z = +depth/2
  outer_x_pos,
  outer_x_neg,
  outer_y_pos,
  outer_y_neg,
  outer_bottom,
  inner_x_pos,  // cavity wall at x = +length/2
  inner_x_neg,
  inner_y_pos,
  inner_y_neg,
  inner_floor,
};

struct BinHit {
  double t = 0;  // distance along the ray, mm
  BinFace face = BinFace::outer_top;
};

/// Open-top cuboid bin solid in bin space: inner cavity
/// [-L/2,L/2]x[-W/2,W/2]x[-D/2,D/2] open at z=+D/2, walls and floor of
/// uniform thickness around it. Origin at the cavity centroid, z up through
/// the opening.
class BinSolid {
 public:
  explicit BinSolid(const BinSpec& spec)
      : hx_(spec.inner_length / 2),
        hy_(spec.inner_width / 2),
        hz_(spec.inner_depth / 2),
        t_(spec.wall_thickness) {}

  double inner_half_x() const { return hx_; }
  double inner_half_y() const { return hy_; }
  double inner_half_z() const { return hz_; }
  double thickness() const { return t_; }

  bool contains(const Eigen::Vector3d& p) const {
    const bool in_outer = std::abs(p.x()) <= hx_ + t_ &&
                          std::abs(p.y()) <= hy_ + t_ &&
                          p.z() >= -hz_ - t_ && p.z() <= hz_;
    if (!in_outer) return false;
    const bool in_cavity =
        std::abs(p.x()) < hx_ && std::abs(p.y()) < hy_ && p.z() > -hz_;
    return !in_cavity;
  }

  /// First intersection of a ray (in bin space) with the solid's boundary,
  /// as interval arithmetic on outer box minus cavity. Grazing hits at
  /// t <= eps are ignored.
  std::optional<BinHit> intersect(const Ray& ray, double eps = 1e-9) const {
    int outer_axis = -1;
    double o0, o1;
    if (!box_interval(ray, -hx_ - t_, hx_ + t_, -hy_ - t_, hy_ + t_,
                      -hz_ - t_, hz_, o0, o1, outer_axis)) {
      return std::nullopt;
    }
    // Cavity extends upward past the opening so the top stays open.
    int cavity_axis = -1;
    double c0 = 0, c1 = 0;
    double cavity_exit_axis_dir = 0;
    const bool has_cavity =
        cavity_interval(ray, c0, c1, cavity_axis, cavity_exit_axis_dir);

    // First point of [o0,o1] \ [c0,c1] past eps.
    if (!has_cavity || c1 <= o0 || c0 >= o1) {
      return make_outer_hit(ray, o0, o1, outer_axis, eps);
    }
    if (o0 < c0 && o0 > eps) {
      return BinHit{o0, outer_face(ray, outer_axis)};
    }
    if (o0 < c0 && c0 > eps) {
      // Ray starts inside the leading solid slice.
      return std::nullopt;  // origin inside material; callers check contains()
    }
    if (c1 < o1 && c1 > eps) {
      return BinHit{c1, cavity_face(cavity_axis, cavity_exit_axis_dir)};
    }
    return std::nullopt;
  }

  /// Axis-aligned rectangles covering the five exterior faces and the four
  /// rim strips, for sampling and for mesh construction. Each rectangle is
  /// (corner, edge_u, edge_v, face).
  struct FaceRect {
    Eigen::Vector3d corner;
    Eigen::Vector3d edge_u;
    Eigen::Vector3d edge_v;
    BinFace face;
  };

  std::vector<FaceRect> exterior_rects() const {
    const double ox = hx_ + t_, oy = hy_ + t_, zb = -hz_ - t_, zt = hz_;
    std::vector<FaceRect> rects;
    // Outer walls.
    rects.push_back({{ox, -oy, zb}, {0, 2 * oy, 0}, {0, 0, zt - zb}, BinFace::outer_x_pos});
    rects.push_back({{-ox, -oy, zb}, {0, 2 * oy, 0}, {0, 0, zt - zb}, BinFace::outer_x_neg});
    rects.push_back({{-ox, oy, zb}, {2 * ox, 0, 0}, {0, 0, zt - zb}, BinFace::outer_y_pos});
    rects.push_back({{-ox, -oy, zb}, {2 * ox, 0, 0}, {0, 0, zt - zb}, BinFace::outer_y_neg});
    // Outer bottom.
    rects.push_back({{-ox, -oy, zb}, {2 * ox, 0, 0}, {0, 2 * oy, 0}, BinFace::outer_bottom});
    // Rim strips (annulus at z = zt): two full-length strips along x, two
    // short strips closing the y sides.
    rects.push_back({{-ox, hy_, zt}, {2 * ox, 0, 0}, {0, t_, 0}, BinFace::outer_top});
    rects.push_back({{-ox, -oy, zt}, {2 * ox, 0, 0}, {0, t_, 0}, BinFace::outer_top});
    rects.push_back({{hx_, -hy_, zt}, {t_, 0, 0}, {0, 2 * hy_, 0}, BinFace::outer_top});
    rects.push_back({{-ox, -hy_, zt}, {t_, 0, 0}, {0, 2 * hy_, 0}, BinFace::outer_top});
    return rects;
  }

  std::vector<FaceRect> interior_rects() const {
    std::vector<FaceRect> rects;
    const double zf = -hz_, zt = hz_;
    rects.push_back({{hx_, -hy_, zf}, {0, 2 * hy_, 0}, {0, 0, zt - zf}, BinFace::inner_x_pos});
    rects.push_back({{-hx_, -hy_, zf}, {0, 2 * hy_, 0}, {0, 0, zt - zf}, BinFace::inner_x_neg});
    rects.push_back({{-hx_, hy_, zf}, {2 * hx_, 0, 0}, {0, 0, zt - zf}, BinFace::inner_y_pos});
    rects.push_back({{-hx_, -hy_, zf}, {2 * hx_, 0, 0}, {0, 0, zt - zf}, BinFace::inner_y_neg});
    rects.push_back({{-hx_, -hy_, zf}, {2 * hx_, 0, 0}, {0, 2 * hy_, 0}, BinFace::inner_floor});
    return rects;
  }

 private:
  static bool slab(double origin, double dir, double lo, double hi,
                   double& tmin, double& tmax, int axis, int& min_axis) {
    if (dir == 0.0) return origin >= lo && origin <= hi;
    double t0 = (lo - origin) / dir;
    double t1 = (hi - origin) / dir;
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > tmin) {
      tmin = t0;
      min_axis = axis;
    }
    if (t1 < tmax) tmax = t1;
    return tmin <= tmax;
  }

  static bool box_interval(const Ray& ray, double x0, double x1, double y0,
                           double y1, double z0, double z1, double& tmin,
                           double& tmax, int& min_axis) {
    tmin = -std::numeric_limits<double>::infinity();
    tmax = std::numeric_limits<double>::infinity();
    min_axis = -1;
    if (!slab(ray.origin.x(), ray.direction.x(), x0, x1, tmin, tmax, 0, min_axis))
      return false;
    if (!slab(ray.origin.y(), ray.direction.y(), y0, y1, tmin, tmax, 1, min_axis))
      return false;
    if (!slab(ray.origin.z(), ray.direction.z(), z0, z1, tmin, tmax, 2, min_axis))
      return false;
    return true;
  }

  bool cavity_interval(const Ray& ray, double& tmin, double& tmax,
                       int& exit_axis, double& exit_dir) const {
    tmin = -std::numeric_limits<double>::infinity();
    tmax = std::numeric_limits<double>::infinity();
    exit_axis = -1;
    int unused = -1;
    const double big = 1e12;
    if (!box_interval(ray, -hx_, hx_, -hy_, hy_, -hz_, big, tmin, tmax, unused))
      return false;
    // Identify which cavity plane the ray exits through.
    double best = std::numeric_limits<double>::infinity();
    const auto consider = [&](int axis, double bound, double dir_component) {
      if (dir_component == 0.0) return;
      const double t = (bound - ray.origin[axis]) / dir_component;
      if (t >= tmax - 1e-12 && t <= tmax + 1e-12 && t < best) {
        best = t;
        exit_axis = axis;
        exit_dir = dir_component;
      }
    };
    consider(0, ray.direction.x() > 0 ? hx_ : -hx_, ray.direction.x());
    consider(1, ray.direction.y() > 0 ? hy_ : -hy_, ray.direction.y());
    consider(2, ray.direction.z() > 0 ? big : -hz_, ray.direction.z());
    return true;
  }

  BinFace outer_face(const Ray& ray, int axis) const {
    switch (axis) {
      case 0:
        return ray.direction.x() > 0 ? BinFace::outer_x_neg : BinFace::outer_x_pos;
      case 1:
        return ray.direction.y() > 0 ? BinFace::outer_y_neg : BinFace::outer_y_pos;
      default:
        return ray.direction.z() > 0 ? BinFace::outer_bottom : BinFace::outer_top;
    }
  }

  static BinFace cavity_face(int axis, double dir) {
    switch (axis) {
      case 0:
        return dir > 0 ? BinFace::inner_x_pos : BinFace::inner_x_neg;
      case 1:
        return dir > 0 ? BinFace::inner_y_pos : BinFace::inner_y_neg;
      default:
        return BinFace::inner_floor;  // upward exits leave through the opening
    }
  }

  std::optional<BinHit> make_outer_hit(const Ray& ray, double o0, double o1,
                                       int axis, double eps) const {
    if (o0 > eps) return BinHit{o0, outer_face(ray, axis)};
    (void)o1;
    return std::nullopt;
  }

  double hx_, hy_, hz_, t_;
};

}  // namespace binpose
