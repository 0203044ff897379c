#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "binpose/error.hpp"
#include "binpose/metrics.hpp"
#include "binpose/pose.hpp"
#include "binpose/rotation.hpp"
#include "binpose/scan.hpp"

namespace binpose {

struct AnalyticParams {
  int scanline_stride = 16;           // pixels between sampled rows/columns
  double depth_jump_threshold = 10.0; // mm; run segmentation and pattern prominence
  double direction_bin_width = 5.0;   // degrees, mode estimation
  double plane_inlier_threshold = 8.0;// mm
  int min_wall_cuts_per_wall = 3;

  void validate() const {
    if (scanline_stride <= 0 || !(depth_jump_threshold > 0) ||
        !(direction_bin_width > 0) || !(plane_inlier_threshold > 0) ||
        min_wall_cuts_per_wall <= 0) {
      raise(ErrorCode::invalid_config, "analytic parameters must be positive");
    }
  }
};

enum class CutAxis { horizontal, vertical };

struct PixelInterval {
  int begin = 0;  // inclusive, position along the scan-line
  int end = 0;    // exclusive
};

/// One side of a bin crossing: the segmented run it belongs to and the
/// minimum-depth sample inside it (a top-rim sample).
struct WallCut {
  PixelInterval interval;
  int top_pixel = 0;
  Eigen::Vector3d top_point = Eigen::Vector3d::Zero();
};

/// A scan-line crossing of the bin: two wall-cuts flanking the floor.
struct BinCut {
  CutAxis axis = CutAxis::horizontal;
  int scanline_index = 0;
  WallCut wall_a;  // smaller pixel position
  WallCut wall_b;
  PixelInterval floor_interval;
  Eigen::Vector3d edge_direction = Eigen::Vector3d::Zero();  // a -> b, mm
};

struct PlaneEstimate {
  Eigen::Vector3d normal = -Eigen::Vector3d::UnitZ();  // unit, toward camera
  double offset = 0;                                   // normal . x = offset
};

enum class FitStage { none, cuts, plane, corners, walls };

inline const char* to_string(FitStage stage) {
  switch (stage) {
    case FitStage::none: return "none";
    case FitStage::cuts: return "cuts";
    case FitStage::plane: return "plane";
    case FitStage::corners: return "corners";
    case FitStage::walls: return "walls";
  }
  return "?";
}

struct StageDiagnostics {
  int cuts_extracted = 0;
  int plane_inlier_endpoints = 0;
  int corners_found = 0;
  std::array<double, 4> wall_residual_rms_mm = {0, 0, 0, 0};
  FitStage failed_stage = FitStage::none;
};

struct FitReport {
  std::optional<Pose> pose;
  bool failed = true;
  StageDiagnostics diagnostics;
};

namespace detail {

struct LineSample {
  int position = 0;  // column for horizontal lines, row for vertical
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  double depth = 0;  // camera-space z
};

struct Extremum {
  std::size_t sample = 0;  // index into the line's valid samples
  bool is_min = false;
};

/// Alternating prominent extrema of the depth profile: every swing between
/// reported extrema exceeds the prominence threshold. Minima are the
/// near-camera crossings (rim candidates), maxima the far regions between.
inline std::vector<Extremum> prominent_extrema(
    const std::vector<LineSample>& samples, double prominence) {
  std::vector<Extremum> out;
  if (samples.size() < 2) return out;
  std::size_t cand_min = 0, cand_max = 0;
  int direction = 0;  // +1 after a reported minimum, -1 after a maximum
  for (std::size_t i = 1; i < samples.size(); ++i) {
    const double z = samples[i].depth;
    if (z < samples[cand_min].depth) cand_min = i;
    if (z > samples[cand_max].depth) cand_max = i;
    if (direction >= 0 && samples[cand_max].depth - z > prominence) {
      out.push_back({cand_max, false});
      direction = -1;
      cand_min = i;
    } else if (direction <= 0 && z - samples[cand_min].depth > prominence) {
      out.push_back({cand_min, true});
      direction = 1;
      cand_max = i;
    }
  }
  return out;
}

/// Maximal runs of consecutive valid samples whose depth steps stay under
/// the jump threshold. Returned as [begin, end) index pairs into samples.
inline std::vector<std::pair<std::size_t, std::size_t>> segment_runs(
    const std::vector<LineSample>& samples, double jump_threshold) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= samples.size(); ++i) {
    if (i == samples.size() ||
        std::abs(samples[i].depth - samples[i - 1].depth) >= jump_threshold) {
      runs.emplace_back(begin, i);
      begin = i;
    }
  }
  return runs;
}

inline std::pair<std::size_t, std::size_t> run_containing(
    const std::vector<std::pair<std::size_t, std::size_t>>& runs,
    std::size_t index) {
  for (const auto& run : runs) {
    if (index >= run.first && index < run.second) return run;
  }
  return {index, index + 1};
}

/// Shifts a detected minimum to the floor-facing edge of its exact-tie run,
/// so flat rims sample their inner edge deterministically.
inline std::size_t shift_ties(const std::vector<LineSample>& samples,
                              std::size_t index, int step) {
  const double z = samples[index].depth;
  std::size_t i = index;
  while (true) {
    const std::size_t next = i + step;
    if (step < 0 && i == 0) break;
    if (next >= samples.size()) break;
    if (samples[next].depth != z) break;
    i = next;
  }
  return i;
}

inline void extract_line_cuts(const std::vector<LineSample>& samples,
                              CutAxis axis, int scanline_index,
                              const AnalyticParams& params,
                              std::vector<BinCut>& out) {
  if (samples.empty()) return;
  const auto runs = segment_runs(samples, params.depth_jump_threshold);
  const auto extrema = prominent_extrema(samples, params.depth_jump_threshold);
  for (std::size_t e = 0; e + 2 < extrema.size(); ++e) {
    if (!(extrema[e].is_min && !extrema[e + 1].is_min && extrema[e + 2].is_min)) {
      continue;
    }
    // Wall tops: tie runs resolved toward the enclosed floor.
    const std::size_t ia = shift_ties(samples, extrema[e].sample, +1);
    const std::size_t ib = shift_ties(samples, extrema[e + 2].sample, -1);
    if (ib <= ia) continue;

    BinCut cut;
    cut.axis = axis;
    cut.scanline_index = scanline_index;
    const auto run_a = run_containing(runs, ia);
    const auto run_b = run_containing(runs, ib);
    cut.wall_a.interval = {samples[run_a.first].position,
                           samples[run_a.second - 1].position + 1};
    cut.wall_b.interval = {samples[run_b.first].position,
                           samples[run_b.second - 1].position + 1};
    cut.wall_a.top_pixel = samples[ia].position;
    cut.wall_b.top_pixel = samples[ib].position;
    cut.wall_a.top_point = samples[ia].point;
    cut.wall_b.top_point = samples[ib].point;
    cut.floor_interval = {samples[ia].position + 1, samples[ib].position};
    cut.edge_direction = cut.wall_b.top_point - cut.wall_a.top_point;
    out.push_back(std::move(cut));
  }
}

}  // namespace detail

/// Step 1: sample every scanline_stride-th row and column, segment each
/// scan-line into depth runs, and emit a bin-cut for every near-far-near
/// crossing (two wall intervals nearer the camera than the enclosed floor,
/// by more than the depth threshold). Lines without valid pixels are
/// skipped; an empty result is valid.
inline std::vector<BinCut> extract_bin_cuts(const StructuredScan& scan,
                                            const AnalyticParams& params) {
  params.validate();
  std::vector<BinCut> cuts;
  std::vector<detail::LineSample> samples;
  for (int row = 0; row < scan.height; row += params.scanline_stride) {
    samples.clear();
    for (int col = 0; col < scan.width; ++col) {
      if (!scan.is_valid(row, col)) continue;
      const Eigen::Vector3d p = scan.point(row, col);
      samples.push_back({col, p, p.z()});
    }
    detail::extract_line_cuts(samples, CutAxis::horizontal, row, params, cuts);
  }
  for (int col = 0; col < scan.width; col += params.scanline_stride) {
    samples.clear();
    for (int row = 0; row < scan.height; ++row) {
      if (!scan.is_valid(row, col)) continue;
      const Eigen::Vector3d p = scan.point(row, col);
      samples.push_back({row, p, p.z()});
    }
    detail::extract_line_cuts(samples, CutAxis::vertical, col, params, cuts);
  }
  return cuts;
}

namespace detail {

/// Mode of a set of unit directions: the sample whose angular ball of
/// radius half the bin width captures the most members, refined as the
/// normalized mean of that ball.
inline Eigen::Vector3d mode_direction(const std::vector<Eigen::Vector3d>& dirs,
                                      double bin_width_deg) {
  const double cos_radius = std::cos(bin_width_deg * M_PI / 180.0 / 2.0);
  std::size_t best_count = 0;
  std::size_t best_index = 0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    std::size_t count = 0;
    for (const Eigen::Vector3d& d : dirs) {
      if (dirs[i].dot(d) >= cos_radius) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best_index = i;
    }
  }
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const Eigen::Vector3d& d : dirs) {
    if (dirs[best_index].dot(d) >= cos_radius) mean += d;
  }
  return mean.normalized();
}

}  // namespace detail

/// Step 2: mode edge-directions of the horizontal and vertical cut families,
/// top plane from their cross product (oriented toward the camera) and the
/// median endpoint projection; cuts with any top endpoint farther than
/// plane_inlier_threshold from the plane are dropped.
inline std::pair<PlaneEstimate, std::vector<BinCut>> estimate_top_plane(
    const std::vector<BinCut>& cuts, const AnalyticParams& params) {
  params.validate();
  std::vector<Eigen::Vector3d> dirs_h, dirs_v;
  for (const BinCut& cut : cuts) {
    const double norm = cut.edge_direction.norm();
    if (norm <= 0) continue;
    (cut.axis == CutAxis::horizontal ? dirs_h : dirs_v)
        .push_back(cut.edge_direction / norm);
  }
  if (dirs_h.empty() || dirs_v.empty()) {
    raise(ErrorCode::insufficient_cuts,
          "need at least one horizontal and one vertical bin-cut");
  }
  const Eigen::Vector3d mode_h =
      detail::mode_direction(dirs_h, params.direction_bin_width);
  const Eigen::Vector3d mode_v =
      detail::mode_direction(dirs_v, params.direction_bin_width);

  const double cross_norm = mode_h.cross(mode_v).norm();
  const double angle = std::atan2(cross_norm, std::abs(mode_h.dot(mode_v)));
  if (angle < 5.0 * M_PI / 180.0) {
    raise(ErrorCode::degenerate_plane,
          "mode edge directions are nearly parallel");
  }

  PlaneEstimate plane;
  plane.normal = mode_h.cross(mode_v).normalized();
  if (plane.normal.z() > 0) plane.normal = -plane.normal;

  std::vector<double> projections;
  projections.reserve(cuts.size() * 2);
  for (const BinCut& cut : cuts) {
    projections.push_back(plane.normal.dot(cut.wall_a.top_point));
    projections.push_back(plane.normal.dot(cut.wall_b.top_point));
  }
  std::sort(projections.begin(), projections.end());
  const std::size_t n = projections.size();
  plane.offset = (n % 2 == 1) ? projections[n / 2]
                              : 0.5 * (projections[n / 2 - 1] + projections[n / 2]);

  std::vector<BinCut> filtered;
  filtered.reserve(cuts.size());
  for (const BinCut& cut : cuts) {
    const double da = std::abs(plane.normal.dot(cut.wall_a.top_point) - plane.offset);
    const double db = std::abs(plane.normal.dot(cut.wall_b.top_point) - plane.offset);
    if (da <= params.plane_inlier_threshold && db <= params.plane_inlier_threshold) {
      filtered.push_back(cut);
    }
  }
  return {plane, filtered};
}

namespace detail {

/// Right-handed in-plane basis (e1, e2, normal).
inline std::pair<Eigen::Vector3d, Eigen::Vector3d> plane_basis(
    const Eigen::Vector3d& normal) {
  const Eigen::Vector3d ref = std::abs(normal.x()) < 0.9
                                  ? Eigen::Vector3d::UnitX()
                                  : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d e1 = normal.cross(ref).normalized();
  const Eigen::Vector3d e2 = normal.cross(e1);
  return {e1, e2};
}

inline std::vector<Eigen::Vector3d> collect_wall_tops(
    const std::vector<BinCut>& cuts) {
  std::vector<Eigen::Vector3d> points;
  points.reserve(cuts.size() * 2);
  for (const BinCut& cut : cuts) {
    points.push_back(cut.wall_a.top_point);
    points.push_back(cut.wall_b.top_point);
  }
  return points;
}

struct RimPoint {
  Eigen::Vector2d uv;
  Eigen::Vector3d point;
  double angle = 0;
};

inline std::vector<RimPoint> rim_traversal(
    const std::vector<Eigen::Vector3d>& points, const PlaneEstimate& plane) {
  const auto [e1, e2] = plane_basis(plane.normal);
  std::vector<RimPoint> rim;
  rim.reserve(points.size());
  for (const Eigen::Vector3d& p : points) {
    RimPoint rp;
    rp.uv = Eigen::Vector2d(e1.dot(p), e2.dot(p));
    rp.point = p;
    rim.push_back(rp);
  }
  // Exact duplicates break the turning-angle computation; drop them.
  std::sort(rim.begin(), rim.end(), [](const RimPoint& a, const RimPoint& b) {
    return a.uv.x() != b.uv.x() ? a.uv.x() < b.uv.x() : a.uv.y() < b.uv.y();
  });
  rim.erase(std::unique(rim.begin(), rim.end(),
                        [](const RimPoint& a, const RimPoint& b) {
                          return a.uv == b.uv;
                        }),
            rim.end());

  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const RimPoint& rp : rim) centroid += rp.uv;
  centroid /= static_cast<double>(rim.size());
  for (RimPoint& rp : rim) {
    const Eigen::Vector2d d = rp.uv - centroid;
    rp.angle = std::atan2(d.y(), d.x());
  }
  std::sort(rim.begin(), rim.end(), [](const RimPoint& a, const RimPoint& b) {
    if (a.angle != b.angle) return a.angle < b.angle;
    if (a.uv.x() != b.uv.x()) return a.uv.x() < b.uv.x();
    return a.uv.y() < b.uv.y();
  });
  return rim;
}

inline double turning_angle(const Eigen::Vector2d& prev,
                            const Eigen::Vector2d& at,
                            const Eigen::Vector2d& next) {
  const Eigen::Vector2d a = at - prev;
  const Eigen::Vector2d b = next - at;
  const double cross = a.x() * b.y() - a.y() * b.x();
  const double dot = a.dot(b);
  return std::atan2(std::abs(cross), dot);  // [0, pi]
}

}  // namespace detail

/// Step 3: order the filtered wall-top endpoints around the rim by polar
/// angle in the top plane and return the four endpoints with the largest
/// turning angle. Corners must be strict local maxima of the turning angle
/// separated by at least 3 rim positions; the result is ordered
/// counterclockwise as seen from the camera.
inline std::array<Eigen::Vector3d, 4> detect_corners(
    const std::vector<BinCut>& cuts, const PlaneEstimate& plane) {
  const std::vector<Eigen::Vector3d> points = detail::collect_wall_tops(cuts);
  const std::vector<detail::RimPoint> rim = detail::rim_traversal(points, plane);
  const std::size_t n = rim.size();
  if (n < 12) {
    raise(ErrorCode::corner_detection_failed,
          "too few rim endpoints for corner detection");
  }

  std::vector<double> turning(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& prev = rim[(i + n - 1) % n];
    const auto& next = rim[(i + 1) % n];
    turning[i] = detail::turning_angle(prev.uv, rim[i].uv, next.uv);
  }

  std::vector<std::size_t> maxima;
  for (std::size_t i = 0; i < n; ++i) {
    const double before = turning[(i + n - 1) % n];
    const double after = turning[(i + 1) % n];
    if (turning[i] > before && turning[i] > after) maxima.push_back(i);
  }
  std::sort(maxima.begin(), maxima.end(), [&turning](std::size_t a, std::size_t b) {
    return turning[a] != turning[b] ? turning[a] > turning[b] : a < b;
  });

  std::vector<std::size_t> corners;
  for (std::size_t candidate : maxima) {
    bool separated = true;
    for (std::size_t chosen : corners) {
      const std::size_t diff =
          candidate > chosen ? candidate - chosen : chosen - candidate;
      if (std::min(diff, n - diff) < 3) {
        separated = false;
        break;
      }
    }
    if (separated) corners.push_back(candidate);
    if (corners.size() == 4) break;
  }
  if (corners.size() < 4) {
    raise(ErrorCode::corner_detection_failed,
          "fewer than 4 separated turning-angle maxima");
  }
  std::sort(corners.begin(), corners.end());
  return {rim[corners[0]].point, rim[corners[1]].point, rim[corners[2]].point,
          rim[corners[3]].point};
}

namespace detail {

inline double point_segment_distance(const Eigen::Vector2d& p,
                                     const Eigen::Vector2d& a,
                                     const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

struct FittedLine {
  Eigen::Vector2d point = Eigen::Vector2d::Zero();  // centroid
  Eigen::Vector2d direction = Eigen::Vector2d::UnitX();
  double rms = 0;
};

/// Total least squares in the plane: principal direction of the covariance.
inline FittedLine fit_line_tls(const std::vector<Eigen::Vector2d>& pts) {
  FittedLine line;
  for (const Eigen::Vector2d& p : pts) line.point += p;
  line.point /= static_cast<double>(pts.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const Eigen::Vector2d& p : pts) {
    const Eigen::Vector2d d = p - line.point;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  line.direction = eig.eigenvectors().col(1);  // largest eigenvalue
  double ss = 0;
  for (const Eigen::Vector2d& p : pts) {
    const Eigen::Vector2d d = p - line.point;
    const double off = d.x() * line.direction.y() - d.y() * line.direction.x();
    ss += off * off;
  }
  line.rms = std::sqrt(ss / pts.size());
  return line;
}

inline std::optional<Eigen::Vector2d> intersect_lines(const FittedLine& a,
                                                      const FittedLine& b) {
  const double det =
      a.direction.x() * b.direction.y() - a.direction.y() * b.direction.x();
  if (std::abs(det) < 1e-12) return std::nullopt;
  const Eigen::Vector2d d = b.point - a.point;
  const double t = (d.x() * b.direction.y() - d.y() * b.direction.x()) / det;
  return a.point + t * a.direction;
}

}  // namespace detail

/// Step 4: assign wall-top endpoints to the nearest corner-pair wall, fit a
/// total-least-squares line per wall inside the top plane, and assemble the
/// bin pose: z along the plane normal (toward the camera), x along the
/// longer wall pair, origin at the bin centroid (rim center pushed half the
/// depth away from the camera). Fails when any wall has too few endpoints.
inline FitReport fit_walls_and_pose(const std::vector<BinCut>& cuts,
                                    const std::array<Eigen::Vector3d, 4>& corners,
                                    const PlaneEstimate& plane,
                                    const BinSpec& bin,
                                    const AnalyticParams& params) {
  params.validate();
  bin.validate();
  FitReport report;
  report.diagnostics.cuts_extracted = static_cast<int>(cuts.size());

  const auto [e1, e2] = detail::plane_basis(plane.normal);
  const auto to_uv = [&e1 = e1, &e2 = e2](const Eigen::Vector3d& p) {
    return Eigen::Vector2d(e1.dot(p), e2.dot(p));
  };

  std::array<Eigen::Vector2d, 4> corner_uv;
  for (int i = 0; i < 4; ++i) corner_uv[i] = to_uv(corners[i]);

  std::array<std::vector<Eigen::Vector2d>, 4> wall_points;
  for (const Eigen::Vector3d& p : detail::collect_wall_tops(cuts)) {
    const Eigen::Vector2d uv = to_uv(p);
    int best_wall = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int w = 0; w < 4; ++w) {
      const double dist = detail::point_segment_distance(uv, corner_uv[w],
                                                         corner_uv[(w + 1) % 4]);
      if (dist < best_dist) {
        best_dist = dist;
        best_wall = w;
      }
    }
    wall_points[best_wall].push_back(uv);
  }

  std::array<detail::FittedLine, 4> lines;
  for (int w = 0; w < 4; ++w) {
    if (static_cast<int>(wall_points[w].size()) < params.min_wall_cuts_per_wall) {
      report.diagnostics.failed_stage = FitStage::walls;
      return report;
    }
    lines[w] = detail::fit_line_tls(wall_points[w]);
    report.diagnostics.wall_residual_rms_mm[w] = lines[w].rms;
  }

  // Rim rectangle refined as intersections of adjacent fitted lines.
  std::array<Eigen::Vector2d, 4> refined;
  for (int w = 0; w < 4; ++w) {
    const auto hit = detail::intersect_lines(lines[(w + 3) % 4], lines[w]);
    if (!hit) {
      report.diagnostics.failed_stage = FitStage::walls;
      return report;
    }
    refined[w] = *hit;  // corner between wall w-1 and wall w
  }
  Eigen::Vector2d rim_center_uv = Eigen::Vector2d::Zero();
  for (const Eigen::Vector2d& c : refined) rim_center_uv += c;
  rim_center_uv /= 4.0;

  // Wall w runs between refined corners w and w+1.
  const double len02 = (refined[1] - refined[0]).norm() + (refined[3] - refined[2]).norm();
  const double len13 = (refined[2] - refined[1]).norm() + (refined[0] - refined[3]).norm();
  const int long_wall = len02 >= len13 ? 0 : 1;
  Eigen::Vector2d da = lines[long_wall].direction;
  Eigen::Vector2d db = lines[long_wall + 2].direction;
  if (da.dot(db) < 0) db = -db;
  const Eigen::Vector2d x_uv = (da + db).normalized();

  const Eigen::Vector3d z_axis = plane.normal;
  Eigen::Vector3d x_axis = e1 * x_uv.x() + e2 * x_uv.y();
  x_axis = (x_axis - x_axis.dot(z_axis) * z_axis).normalized();
  const Eigen::Vector3d y_axis = z_axis.cross(x_axis);

  Eigen::Matrix3d rotation;
  rotation.col(0) = x_axis;
  rotation.col(1) = y_axis;
  rotation.col(2) = z_axis;
  rotation = canonicalize_symmetry(orient_bin_frame(rotation));

  const Eigen::Vector3d rim_center = e1 * rim_center_uv.x() +
                                     e2 * rim_center_uv.y() +
                                     plane.normal * plane.offset;
  Pose pose;
  pose.rotation = rotation;
  pose.translation = rim_center - (bin.inner_depth / 2.0) * z_axis;

  report.pose = pose;
  report.failed = false;
  return report;
}

/// The four-step pipeline. Never throws for data reasons: any stage error
/// comes back as failed=true with the failing stage recorded.
inline FitReport estimate_pose_analytic(const StructuredScan& scan,
                                        const BinSpec& bin,
                                        const AnalyticParams& params) {
  params.validate();
  bin.validate();
  FitReport report;
  report.diagnostics.failed_stage = FitStage::cuts;

  const std::vector<BinCut> cuts = extract_bin_cuts(scan, params);
  report.diagnostics.cuts_extracted = static_cast<int>(cuts.size());
  if (cuts.empty()) return report;

  PlaneEstimate plane;
  std::vector<BinCut> filtered;
  try {
    std::tie(plane, filtered) = estimate_top_plane(cuts, params);
  } catch (const Error&) {
    report.diagnostics.failed_stage = FitStage::plane;
    return report;
  }
  report.diagnostics.plane_inlier_endpoints = static_cast<int>(filtered.size()) * 2;
  if (filtered.empty()) {
    report.diagnostics.failed_stage = FitStage::plane;
    return report;
  }

  std::array<Eigen::Vector3d, 4> corners;
  try {
    corners = detect_corners(filtered, plane);
  } catch (const Error&) {
    report.diagnostics.failed_stage = FitStage::corners;
    return report;
  }
  report.diagnostics.corners_found = 4;

  FitReport walls = fit_walls_and_pose(filtered, corners, plane, bin, params);
  walls.diagnostics.cuts_extracted = report.diagnostics.cuts_extracted;
  walls.diagnostics.plane_inlier_endpoints = report.diagnostics.plane_inlier_endpoints;
  walls.diagnostics.corners_found = report.diagnostics.corners_found;
  return walls;
}

}  // namespace binpose
