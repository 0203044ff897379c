#pragma once

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "binpose/pose.hpp"
#include "binpose/scan.hpp"

namespace binpose {

static_assert(std::endian::native == std::endian::little,
              "scan format is little-endian; big-endian hosts unsupported");

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

/// Writes a scan: ASCII header "BINSCAN 1 <width> <height>\n" followed by
/// width*height little-endian float triples (x y z), row-major. Invalid
/// pixels are written as NaN triples.
inline void save_scan(const StructuredScan& scan, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::io_error, "cannot open for writing: " + path);
  out << "BINSCAN 1 " << scan.width << " " << scan.height << "\n";
  const float nanf = std::numeric_limits<float>::quiet_NaN();
  const float nan_triple[3] = {nanf, nanf, nanf};
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    if (scan.valid[i]) {
      out.write(reinterpret_cast<const char*>(scan.points[i].data()),
                3 * sizeof(float));
    } else {
      out.write(reinterpret_cast<const char*>(nan_triple), 3 * sizeof(float));
    }
  }
  if (!out) raise(ErrorCode::io_error, "write failed: " + path);
}

inline StructuredScan load_scan(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::io_error, "cannot open for reading: " + path);

  std::string header;
  if (!std::getline(in, header)) {
    raise(ErrorCode::malformed_header, "missing scan header: " + path);
  }
  std::istringstream hs(header);
  std::string magic;
  long version = 0, width = 0, height = 0;
  if (!(hs >> magic >> version >> width >> height) || magic != "BINSCAN") {
    raise(ErrorCode::malformed_header, "bad scan header: " + path);
  }
  std::string extra;
  if (hs >> extra) {
    raise(ErrorCode::malformed_header, "trailing header tokens: " + path);
  }
  if (version != 1) {
    raise(ErrorCode::malformed_header, "unsupported scan version: " + path);
  }
  if (width <= 0 || height <= 0) {
    raise(ErrorCode::zero_dimensions, "non-positive scan dimensions: " + path);
  }

  StructuredScan scan(static_cast<int>(width), static_cast<int>(height));
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    float triple[3];
    in.read(reinterpret_cast<char*>(triple), 3 * sizeof(float));
    if (!in) {
      raise(ErrorCode::truncated_payload,
            "scan payload shorter than declared size: " + path);
    }
    scan.points[i] = Eigen::Vector3f(triple[0], triple[1], triple[2]);
    scan.valid[i] = scan.points[i].allFinite() ? 1 : 0;
  }
  return scan;
}

/// Pose file: 16 whitespace-separated decimal numbers, row-major 4x4
/// homogeneous matrix, bottom row 0 0 0 1.
inline void save_pose(const Pose& pose, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::io_error, "cannot open for writing: " + path);
  const Eigen::Matrix4d m = pose.matrix();
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      out << detail::format_double(m(r, c)) << (c == 3 ? "\n" : " ");
    }
  }
  if (!out) raise(ErrorCode::io_error, "write failed: " + path);
}

inline Pose load_pose(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::io_error, "cannot open for reading: " + path);
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (!(in >> m(r, c))) {
        raise(ErrorCode::parse_error, "pose file needs 16 numbers: " + path);
      }
    }
  }
  return Pose::from_matrix(m);
}

}  // namespace binpose
