#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "binpose/error.hpp"
#include "binpose/rotation.hpp"

namespace binpose {

/// Euclidean distance between estimated and ground-truth translation, mm.
inline double translation_error(const Eigen::Vector3d& t_est,
                                const Eigen::Vector3d& t_gt) {
  return (t_gt - t_est).norm();
}

/// Angle-axis angle between rotations, minimized over the bin symmetry pair
/// {R_est, R_s·R_est}: min acos((Tr(R'·R_gtᵀ) - 1) / 2) with the acos
/// argument clamped to its domain. The acos is evaluated through the
/// equivalent atan2 of the relative rotation's sine and cosine, which stays
/// well conditioned at angles near 0 and pi. Result in [0, pi].
inline double rotation_error(const Eigen::Matrix3d& r_est,
                             const Eigen::Matrix3d& r_gt) {
  const auto angle_to_gt = [&r_gt](const Eigen::Matrix3d& r) {
    const Eigen::Matrix3d m = r * r_gt.transpose();
    const double cos_angle = std::clamp((m.trace() - 1.0) / 2.0, -1.0, 1.0);
    const Eigen::Vector3d skew(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0),
                               m(1, 0) - m(0, 1));
    return std::atan2(skew.norm() / 2.0, cos_angle);
  };
  return std::min(angle_to_gt(r_est), angle_to_gt(detail::flip_left(r_est)));
}

/// One evaluated scan for one method. Failed fits carry infinite errors
/// (never counted below any finite threshold).
struct EvalRecord {
  std::string scan_id;
  std::string method;
  double e_te_mm = std::numeric_limits<double>::infinity();
  double e_re_rad = std::numeric_limits<double>::infinity();
  bool failed = true;
  std::optional<bool> icp_confident;
  double runtime_ms = 0;
};

struct CumulativeCurve {
  std::vector<double> thresholds;  // ascending
  std::vector<double> fractions;   // fraction of samples with error < threshold
};

enum class Metric { e_te, e_re };

inline double record_error(const EvalRecord& r, Metric metric) {
  return metric == Metric::e_te ? r.e_te_mm : r.e_re_rad;
}

/// Fraction of records with error strictly below each threshold. Failed
/// (infinite) records count in the denominator only.
inline CumulativeCurve build_curve(const std::vector<EvalRecord>& records,
                                   Metric metric,
                                   const std::vector<double>& thresholds) {
  if (records.empty()) {
    raise(ErrorCode::empty_records, "cannot build a curve from zero records");
  }
  CumulativeCurve curve;
  curve.thresholds = thresholds;
  curve.fractions.reserve(thresholds.size());
  for (double threshold : thresholds) {
    std::size_t below = 0;
    for (const EvalRecord& r : records) {
      if (record_error(r, metric) < threshold) ++below;
    }
    curve.fractions.push_back(static_cast<double>(below) / records.size());
  }
  return curve;
}

inline std::vector<double> default_te_thresholds() {
  std::vector<double> t;
  for (double v = 0.0; v <= 50.0 + 1e-12; v += 0.5) t.push_back(v);
  return t;
}

inline std::vector<double> default_re_thresholds() {
  std::vector<double> t;
  for (double v = 0.0; v <= M_PI; v += 0.01) t.push_back(v);
  return t;
}

/// Mean and population standard deviation over non-failed records, plus the
/// failure rate. Means are absent when every record failed.
struct Summary {
  std::size_t total = 0;
  std::size_t failed = 0;
  std::optional<double> mean_e_te, std_e_te;
  std::optional<double> mean_e_re, std_e_re;

  double failure_rate() const {
    return total == 0 ? 0.0 : static_cast<double>(failed) / total;
  }
};

inline Summary summarize(const std::vector<EvalRecord>& records) {
  if (records.empty()) {
    raise(ErrorCode::empty_records, "cannot summarize zero records");
  }
  Summary s;
  s.total = records.size();
  double sum_te = 0, sum_re = 0;
  std::size_t n = 0;
  for (const EvalRecord& r : records) {
    if (r.failed) {
      ++s.failed;
      continue;
    }
    sum_te += r.e_te_mm;
    sum_re += r.e_re_rad;
    ++n;
  }
  if (n == 0) return s;
  const double mean_te = sum_te / n;
  const double mean_re = sum_re / n;
  double var_te = 0, var_re = 0;
  for (const EvalRecord& r : records) {
    if (r.failed) continue;
    var_te += (r.e_te_mm - mean_te) * (r.e_te_mm - mean_te);
    var_re += (r.e_re_rad - mean_re) * (r.e_re_rad - mean_re);
  }
  s.mean_e_te = mean_te;
  s.std_e_te = std::sqrt(var_te / n);
  s.mean_e_re = mean_re;
  s.std_e_re = std::sqrt(var_re / n);
  return s;
}

// ----- CSV, header: scan_id,method,e_te_mm,e_re_rad,failed,icp_confident,runtime_ms

inline constexpr const char* kRecordCsvHeader =
    "scan_id,method,e_te_mm,e_re_rad,failed,icp_confident,runtime_ms";

namespace detail {

inline std::string format_csv_double(double v) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_csv_double(const std::string& s, const std::string& ctx) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    raise(ErrorCode::parse_error, "bad numeric field in " + ctx);
  }
  if (pos != s.size()) raise(ErrorCode::parse_error, "bad numeric field in " + ctx);
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace detail

inline void write_records_csv(const std::vector<EvalRecord>& records,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::io_error, "cannot open for writing: " + path);
  out << kRecordCsvHeader << "\n";
  for (const EvalRecord& r : records) {
    out << r.scan_id << ',' << r.method << ','
        << detail::format_csv_double(r.e_te_mm) << ','
        << detail::format_csv_double(r.e_re_rad) << ','
        << (r.failed ? "true" : "false") << ','
        << (r.icp_confident ? (*r.icp_confident ? "true" : "false") : "")
        << ',' << detail::format_csv_double(r.runtime_ms) << "\n";
  }
  if (!out) raise(ErrorCode::io_error, "write failed: " + path);
}

inline std::vector<EvalRecord> read_records_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::io_error, "cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kRecordCsvHeader) {
    raise(ErrorCode::parse_error, "unexpected record CSV header: " + path);
  }
  std::vector<EvalRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 7) {
      raise(ErrorCode::parse_error, "record CSV row needs 7 fields: " + path);
    }
    EvalRecord r;
    r.scan_id = fields[0];
    r.method = fields[1];
    r.e_te_mm = detail::parse_csv_double(fields[2], path);
    r.e_re_rad = detail::parse_csv_double(fields[3], path);
    r.failed = fields[4] == "true";
    if (!fields[5].empty()) r.icp_confident = fields[5] == "true";
    r.runtime_ms = detail::parse_csv_double(fields[6], path);
    records.push_back(std::move(r));
  }
  return records;
}

inline void write_curve_csv(const CumulativeCurve& curve,
                            const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::io_error, "cannot open for writing: " + path);
  out << "threshold,fraction\n";
  for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
    out << detail::format_csv_double(curve.thresholds[i]) << ','
        << detail::format_csv_double(curve.fractions[i]) << "\n";
  }
  if (!out) raise(ErrorCode::io_error, "write failed: " + path);
}

}  // namespace binpose
