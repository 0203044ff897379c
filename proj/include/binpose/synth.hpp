#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "binpose/bin_geometry.hpp"
#include "binpose/error.hpp"
#include "binpose/io.hpp"
#include "binpose/pose.hpp"
#include "binpose/rng.hpp"
#include "binpose/rotation.hpp"
#include "binpose/scan.hpp"

namespace binpose {

/// Pinhole camera, intrinsics in pixels, pose mapping camera to world.
struct CameraModel {
  int width = 516;
  int height = 386;
  double focal_length = 440.0;
  Eigen::Vector2d principal_point = {258.0, 193.0};
  Pose pose;  // camera -> world

  void validate() const {
    if (width <= 0 || height <= 0) {
      raise(ErrorCode::invalid_camera, "camera resolution must be positive");
    }
    if (!(focal_length > 0)) {
      raise(ErrorCode::invalid_camera, "focal length must be positive");
    }
    if (principal_point.x() < 0 || principal_point.x() >= width ||
        principal_point.y() < 0 || principal_point.y() >= height) {
      raise(ErrorCode::invalid_camera, "principal point outside the image");
    }
  }

  /// Ray direction through a pixel center, camera space, unit length.
  Eigen::Vector3d pixel_ray(int row, int col) const {
    const double x = (col + 0.5 - principal_point.x()) / focal_length;
    const double y = (row + 0.5 - principal_point.y()) / focal_length;
    return Eigen::Vector3d(x, y, 1.0).normalized();
  }

  /// Projects a camera-space point to pixel coordinates (col, row).
  /// Returns nullopt behind the camera.
  std::optional<Eigen::Vector2d> project(const Eigen::Vector3d& p_cam) const {
    if (p_cam.z() <= 0) return std::nullopt;
    return Eigen::Vector2d(
        focal_length * p_cam.x() / p_cam.z() + principal_point.x(),
        focal_length * p_cam.y() / p_cam.z() + principal_point.y());
  }
};

/// Primitive solid standing in for an item inside the bin, bin space.
struct Occluder {
  enum class Kind { box, sphere };
  Kind kind = Kind::box;
  Eigen::Vector3d box_min = Eigen::Vector3d::Zero();
  Eigen::Vector3d box_max = Eigen::Vector3d::Zero();
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0;

  bool contains(const Eigen::Vector3d& p) const {
    if (kind == Kind::box) {
      return (p.array() >= box_min.array()).all() &&
             (p.array() <= box_max.array()).all();
    }
    return (p - center).squaredNorm() <= radius * radius;
  }

  /// First positive intersection distance, if any.
  std::optional<double> intersect(const Ray& ray, double eps = 1e-9) const {
    if (kind == Kind::box) {
      double tmin = -std::numeric_limits<double>::infinity();
      double tmax = std::numeric_limits<double>::infinity();
      for (int a = 0; a < 3; ++a) {
        const double d = ray.direction[a];
        if (d == 0.0) {
          if (ray.origin[a] < box_min[a] || ray.origin[a] > box_max[a]) {
            return std::nullopt;
          }
          continue;
        }
        double t0 = (box_min[a] - ray.origin[a]) / d;
        double t1 = (box_max[a] - ray.origin[a]) / d;
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
        if (tmin > tmax) return std::nullopt;
      }
      return tmin > eps ? std::optional<double>(tmin) : std::nullopt;
    }
    const Eigen::Vector3d oc = ray.origin - center;
    const double b = oc.dot(ray.direction);
    const double c = oc.squaredNorm() - radius * radius;
    const double disc = b * b - c;
    if (disc < 0) return std::nullopt;
    const double root = std::sqrt(disc);
    const double t0 = -b - root;
    if (t0 > eps) return t0;
    const double t1 = -b + root;
    if (t1 > eps) return t1;
    return std::nullopt;
  }
};

/// Plane n·x = offset with unit normal, in world coordinates.
struct ScenePlane {
  Eigen::Vector3d normal = -Eigen::Vector3d::UnitZ();
  double offset = 0;
};

/// One synthetic capture: the bin, its ground-truth pose, items, table and
/// sensor imperfections. Deterministic given the seed.
struct SceneSpec {
  BinSpec bin;
  Pose bin_pose;  // bin -> world
  std::vector<Occluder> occluders;
  ScenePlane background_plane;
  double noise_sigma = 0;   // mm, along-ray
  double dropout_rate = 0;  // per-pixel invalidation probability
  std::uint64_t seed = 0;
  std::string tag = "visible-rim";

  void validate() const {
    bin.validate();
    if (!(noise_sigma >= 0)) {
      raise(ErrorCode::invalid_config, "noise_sigma must be >= 0");
    }
    if (!(dropout_rate >= 0) || dropout_rate >= 1) {
      raise(ErrorCode::invalid_config, "dropout_rate must be in [0, 1)");
    }
  }
};

struct RenderResult {
  StructuredScan scan;
  Pose ground_truth;  // bin -> scanner, rotation canonicalized
};

/// Casts one camera-space ray against the bin, occluders and background.
/// Returns the nearest hit distance (no noise applied).
inline std::optional<double> cast_scene_ray(const SceneSpec& scene,
                                            const Pose& bin_to_camera,
                                            const ScenePlane& plane_camera,
                                            const Ray& ray_camera) {
  const Pose camera_to_bin = bin_to_camera.inverse();
  Ray ray_bin;
  ray_bin.origin = camera_to_bin.apply(ray_camera.origin);
  ray_bin.direction = camera_to_bin.rotation * ray_camera.direction;

  std::optional<double> best;
  const BinSolid solid(scene.bin);
  if (auto hit = solid.intersect(ray_bin)) best = hit->t;
  for (const Occluder& occ : scene.occluders) {
    if (auto t = occ.intersect(ray_bin)) {
      if (!best || *t < *best) best = *t;
    }
  }
  const double denom = plane_camera.normal.dot(ray_camera.direction);
  if (denom != 0.0) {
    const double t =
        (plane_camera.offset - plane_camera.normal.dot(ray_camera.origin)) /
        denom;
    if (t > 1e-9 && (!best || t < *best)) best = t;
  }
  return best;
}

/// Renders the scene into an organized scan. Per-pixel ray casting, nearest
/// hit wins; hits perturbed along the ray by N(0, sigma^2); pixels dropped
/// with probability dropout_rate. Points are quantized to the scan's 32-bit
/// storage. The returned ground truth maps bin space into scanner space and
/// is a fixed point of canonicalize_symmetry.
inline RenderResult render_scan(const SceneSpec& scene,
                                const CameraModel& camera) {
  scene.validate();
  camera.validate();

  const Pose bin_to_camera = camera.pose.inverse() * scene.bin_pose;
  const Pose camera_to_bin = bin_to_camera.inverse();

  // Refuse to render from inside a solid.
  const Eigen::Vector3d cam_in_bin = camera_to_bin.translation;
  const BinSolid solid(scene.bin);
  if (solid.contains(cam_in_bin)) {
    raise(ErrorCode::invalid_camera, "camera is inside the bin walls");
  }
  for (const Occluder& occ : scene.occluders) {
    if (occ.contains(cam_in_bin)) {
      raise(ErrorCode::invalid_camera, "camera is inside an occluder");
    }
  }

  // Background plane in camera coordinates.
  ScenePlane plane_camera;
  plane_camera.normal =
      camera.pose.rotation.transpose() * scene.background_plane.normal;
  plane_camera.offset =
      scene.background_plane.offset -
      scene.background_plane.normal.dot(camera.pose.translation);

  RenderResult result;
  result.scan = StructuredScan(camera.width, camera.height);
  for (int row = 0; row < camera.height; ++row) {
    for (int col = 0; col < camera.width; ++col) {
      const std::uint64_t pixel_index =
          static_cast<std::uint64_t>(row) * camera.width + col;
      SplitMix64 rng = pixel_stream(scene.seed, pixel_index);
      const double dropout_draw = rng.next_uniform();
      const double noise_draw = rng.next_normal();

      Ray ray;
      ray.direction = camera.pixel_ray(row, col);
      const auto t = cast_scene_ray(scene, bin_to_camera, plane_camera, ray);
      if (!t || dropout_draw < scene.dropout_rate) {
        result.scan.set_invalid(row, col);
        continue;
      }
      const double depth = *t + scene.noise_sigma * noise_draw;
      const Eigen::Vector3d p = depth * ray.direction;
      result.scan.set_point(row, col, p.cast<float>());
    }
  }

  result.ground_truth.translation = bin_to_camera.translation;
  result.ground_truth.rotation = orient_bin_frame(bin_to_camera.rotation);
  return result;
}

// ----- key=value serialization of scene specs -----

namespace detail {

inline std::string format_vec(const double* v, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) {
    if (i) s += ' ';
    s += format_double(v[i]);
  }
  return s;
}

inline std::vector<double> parse_numbers(const std::string& s, std::size_t n,
                                         const std::string& key) {
  std::istringstream ss(s);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(ss >> out[i])) {
      raise(ErrorCode::parse_error, "scene key " + key + " needs " +
                                        std::to_string(n) + " numbers");
    }
  }
  return out;
}

}  // namespace detail

inline std::string serialize_scene(const SceneSpec& scene) {
  std::ostringstream out;
  out << "tag=" << scene.tag << "\n";
  out << "seed=" << scene.seed << "\n";
  out << "noise_sigma=" << detail::format_double(scene.noise_sigma) << "\n";
  out << "dropout_rate=" << detail::format_double(scene.dropout_rate) << "\n";
  out << "bin.inner_length=" << detail::format_double(scene.bin.inner_length) << "\n";
  out << "bin.inner_width=" << detail::format_double(scene.bin.inner_width) << "\n";
  out << "bin.inner_depth=" << detail::format_double(scene.bin.inner_depth) << "\n";
  out << "bin.wall_thickness=" << detail::format_double(scene.bin.wall_thickness) << "\n";
  const Eigen::Matrix4d m = scene.bin_pose.matrix();
  Eigen::Matrix<double, 16, 1> flat;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) flat[r * 4 + c] = m(r, c);
  out << "bin_pose=" << detail::format_vec(flat.data(), 16) << "\n";
  const double plane[4] = {scene.background_plane.normal.x(),
                           scene.background_plane.normal.y(),
                           scene.background_plane.normal.z(),
                           scene.background_plane.offset};
  out << "background_plane=" << detail::format_vec(plane, 4) << "\n";
  out << "occluder_count=" << scene.occluders.size() << "\n";
  for (std::size_t i = 0; i < scene.occluders.size(); ++i) {
    const Occluder& occ = scene.occluders[i];
    out << "occluder." << i << "=";
    if (occ.kind == Occluder::Kind::box) {
      const double v[6] = {occ.box_min.x(), occ.box_min.y(), occ.box_min.z(),
                           occ.box_max.x(), occ.box_max.y(), occ.box_max.z()};
      out << "box " << detail::format_vec(v, 6) << "\n";
    } else {
      const double v[4] = {occ.center.x(), occ.center.y(), occ.center.z(),
                           occ.radius};
      out << "sphere " << detail::format_vec(v, 4) << "\n";
    }
  }
  return out.str();
}

inline SceneSpec parse_scene(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      raise(ErrorCode::parse_error, "scene line without '=': " + line);
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto need = [&kv](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) {
      raise(ErrorCode::parse_error, "scene file missing key: " + key);
    }
    return it->second;
  };

  SceneSpec scene;
  scene.tag = need("tag");
  scene.seed = std::stoull(need("seed"));
  scene.noise_sigma = detail::parse_numbers(need("noise_sigma"), 1, "noise_sigma")[0];
  scene.dropout_rate = detail::parse_numbers(need("dropout_rate"), 1, "dropout_rate")[0];
  scene.bin.inner_length = detail::parse_numbers(need("bin.inner_length"), 1, "bin.inner_length")[0];
  scene.bin.inner_width = detail::parse_numbers(need("bin.inner_width"), 1, "bin.inner_width")[0];
  scene.bin.inner_depth = detail::parse_numbers(need("bin.inner_depth"), 1, "bin.inner_depth")[0];
  scene.bin.wall_thickness = detail::parse_numbers(need("bin.wall_thickness"), 1, "bin.wall_thickness")[0];
  const auto pose16 = detail::parse_numbers(need("bin_pose"), 16, "bin_pose");
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = pose16[r * 4 + c];
  scene.bin_pose = Pose::from_matrix(m);
  const auto plane = detail::parse_numbers(need("background_plane"), 4, "background_plane");
  scene.background_plane.normal = Eigen::Vector3d(plane[0], plane[1], plane[2]);
  scene.background_plane.offset = plane[3];
  const std::size_t count = std::stoull(need("occluder_count"));
  for (std::size_t i = 0; i < count; ++i) {
    const std::string& value = need("occluder." + std::to_string(i));
    std::istringstream vs(value);
    std::string kind;
    vs >> kind;
    Occluder occ;
    if (kind == "box") {
      occ.kind = Occluder::Kind::box;
      const auto v = detail::parse_numbers(value.substr(4), 6, "occluder");
      occ.box_min = Eigen::Vector3d(v[0], v[1], v[2]);
      occ.box_max = Eigen::Vector3d(v[3], v[4], v[5]);
    } else if (kind == "sphere") {
      occ.kind = Occluder::Kind::sphere;
      const auto v = detail::parse_numbers(value.substr(7), 4, "occluder");
      occ.center = Eigen::Vector3d(v[0], v[1], v[2]);
      occ.radius = v[3];
    } else {
      raise(ErrorCode::parse_error, "unknown occluder kind: " + kind);
    }
    scene.occluders.push_back(occ);
  }
  scene.validate();
  return scene;
}

inline void save_scene(const SceneSpec& scene, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::io_error, "cannot open for writing: " + path);
  out << serialize_scene(scene);
  if (!out) raise(ErrorCode::io_error, "write failed: " + path);
}

inline SceneSpec load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::io_error, "cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str());
}

// ----- suite generation -----

/// Ranges for randomized desk-scale scenes. All lengths in millimeters.
struct SuiteParams {
  int count = 50;
  double length_min = 180, length_max = 300;
  double width_min = 120, width_max = 240;
  double depth_min = 60, depth_max = 120;
  double thickness_min = 2.0, thickness_max = 3.5;
  double tilt_max_deg = 20;
  double offset_max_mm = 50;       // lateral bin-center offset
  double distance_min = 550, distance_max = 750;
  int max_occluders = 4;
  double noise_sigma = 0;
  double dropout_rate = 0;
  bool occluded = false;  // when set, one large item hides the whole rim

  void validate() const {
    if (count < 0) raise(ErrorCode::invalid_config, "suite count must be >= 0");
    const bool ranges_ok =
        length_min > 0 && length_min <= length_max && width_min > 0 &&
        width_min <= width_max && depth_min > 0 && depth_min <= depth_max &&
        thickness_min > 0 && thickness_min <= thickness_max &&
        distance_min > 0 && distance_min <= distance_max &&
        tilt_max_deg >= 0 && tilt_max_deg < 60 && offset_max_mm >= 0;
    if (!ranges_ok) raise(ErrorCode::invalid_config, "empty or invalid suite ranges");
  }
};

namespace detail {

inline Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

inline bool rim_corners_visible(const SceneSpec& scene,
                                const CameraModel& camera, double margin_px) {
  const Pose bin_to_camera = camera.pose.inverse() * scene.bin_pose;
  const double hx = scene.bin.inner_length / 2;
  const double hy = scene.bin.inner_width / 2;
  const double hz = scene.bin.inner_depth / 2;
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      const Eigen::Vector3d corner(sx * hx, sy * hy, hz);
      const auto px = camera.project(bin_to_camera.apply(corner));
      if (!px) return false;
      if (px->x() < margin_px || px->x() >= camera.width - margin_px ||
          px->y() < margin_px || px->y() >= camera.height - margin_px) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace detail

/// Samples a deterministic list of scenes. Visible-rim scenes keep every top
/// edge unobstructed and inside the image; occluded scenes hide the rim
/// entirely under one oversized item.
inline std::vector<SceneSpec> generate_suite(const SuiteParams& params,
                                             std::uint64_t seed,
                                             const CameraModel& camera) {
  params.validate();
  camera.validate();
  SplitMix64 rng(seed ^ 0x5ca1ab1e00000000ULL);
  std::vector<SceneSpec> scenes;
  scenes.reserve(params.count);

  for (int i = 0; i < params.count; ++i) {
    SceneSpec scene;
    scene.seed = SplitMix64(seed + 0x1000 + i).next_u64();
    scene.noise_sigma = params.noise_sigma;
    scene.dropout_rate = params.dropout_rate;
    scene.tag = params.occluded ? "occluded" : "visible-rim";

    scene.bin.inner_length = rng.next_uniform(params.length_min, params.length_max);
    scene.bin.inner_width =
        rng.next_uniform(params.width_min, std::min(params.width_max, scene.bin.inner_length));
    scene.bin.inner_depth = rng.next_uniform(params.depth_min, params.depth_max);
    scene.bin.wall_thickness =
        rng.next_uniform(params.thickness_min, params.thickness_max);

    // Pose: bin opening toward the camera, random spin, bounded tilt.
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      const double spin = rng.next_uniform(0, 2 * M_PI);
      const double tilt = rng.next_uniform(0, params.tilt_max_deg * M_PI / 180.0);
      const double tilt_dir = rng.next_uniform(0, 2 * M_PI);
      const Eigen::Vector3d tilt_axis(std::cos(tilt_dir), std::sin(tilt_dir), 0);
      const Eigen::Matrix3d base =
          detail::axis_angle(Eigen::Vector3d::UnitX(), M_PI);
      scene.bin_pose.rotation =
          detail::axis_angle(tilt_axis, tilt) * base *
          detail::axis_angle(Eigen::Vector3d::UnitZ(), spin);
      scene.bin_pose.translation =
          Eigen::Vector3d(rng.next_uniform(-params.offset_max_mm, params.offset_max_mm),
                          rng.next_uniform(-params.offset_max_mm, params.offset_max_mm),
                          rng.next_uniform(params.distance_min, params.distance_max));
      placed = detail::rim_corners_visible(scene, camera, 10.0);
    }
    if (!placed) {
      raise(ErrorCode::invalid_config,
            "pose ranges cannot keep the rim inside the image");
    }

    // Table behind the deepest bin corner.
    const BinSolid solid(scene.bin);
    double max_z = 0;
    for (double sx : {-1.0, 1.0}) {
      for (double sy : {-1.0, 1.0}) {
        for (double z : {-solid.inner_half_z() - solid.thickness(),
                         solid.inner_half_z()}) {
          const Eigen::Vector3d corner(
              sx * (solid.inner_half_x() + solid.thickness()),
              sy * (solid.inner_half_y() + solid.thickness()), z);
          max_z = std::max(max_z, scene.bin_pose.apply(corner).z());
        }
      }
    }
    scene.background_plane.normal = -Eigen::Vector3d::UnitZ();
    scene.background_plane.offset = -(max_z + 2.0);

    if (params.occluded) {
      const double hx = scene.bin.inner_length / 2;
      const double hy = scene.bin.inner_width / 2;
      const double hz = scene.bin.inner_depth / 2;
      const double t = scene.bin.wall_thickness;
      Occluder lid;
      lid.kind = Occluder::Kind::box;
      lid.box_min = Eigen::Vector3d(-hx - t - 25, -hy - t - 25, hz - 5);
      lid.box_max = Eigen::Vector3d(hx + t + 25, hy + t + 25, hz + 35);
      scene.occluders.push_back(lid);
    } else {
      const int n = static_cast<int>(rng.next_uniform(0, params.max_occluders + 1));
      const double hx = scene.bin.inner_length / 2;
      const double hy = scene.bin.inner_width / 2;
      const double hz = scene.bin.inner_depth / 2;
      const double lateral_margin = 25, top_margin = 20;
      for (int k = 0; k < n; ++k) {
        Occluder occ;
        const double cx = rng.next_uniform(-hx + lateral_margin + 20, hx - lateral_margin - 20);
        const double cy = rng.next_uniform(-hy + lateral_margin + 20, hy - lateral_margin - 20);
        const double top = rng.next_uniform(-hz + 10, hz - top_margin);
        if (rng.next_uniform() < 0.5) {
          occ.kind = Occluder::Kind::box;
          const double rx = rng.next_uniform(8, 20);
          const double ry = rng.next_uniform(8, 20);
          occ.box_min = Eigen::Vector3d(cx - rx, cy - ry, -hz);
          occ.box_max = Eigen::Vector3d(cx + rx, cy + ry, top);
        } else {
          occ.kind = Occluder::Kind::sphere;
          const double rmax = std::min(20.0, (top + hz) / 2);
          occ.radius = rng.next_uniform(0.6 * rmax, rmax);
          occ.center = Eigen::Vector3d(cx, cy, top - occ.radius);
        }
        scene.occluders.push_back(occ);
      }
    }
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

}  // namespace binpose
