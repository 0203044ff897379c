#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "binpose/metrics.hpp"
#include "test_util.hpp"

using binpose::build_curve;
using binpose::EvalRecord;
using binpose::Metric;
using binpose::rotation_error;
using binpose::summarize;
using binpose::translation_error;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

EvalRecord record(double te, double re) {
  EvalRecord r;
  r.scan_id = "s";
  r.method = "m";
  r.e_te_mm = te;
  r.e_re_rad = re;
  r.failed = std::isinf(te);
  return r;
}

TEST(TranslationError, Examples) {
  EXPECT_EQ(translation_error({0, 0, 0}, {3, 4, 0}), 5.0);
  EXPECT_EQ(translation_error({1, 2, 3}, {1, 2, 3}), 0.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-100, 100);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d a(u(rng), u(rng), u(rng));
    const Eigen::Vector3d b(u(rng), u(rng), u(rng));
    double ss = 0;
    for (int k = 0; k < 3; ++k) ss += (a[k] - b[k]) * (a[k] - b[k]);
    EXPECT_NEAR(translation_error(a, b), std::sqrt(ss), 1e-12);
  }
}

TEST(RotationError, WorkedCases) {
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  // The symmetry partner of rot_z(pi) is the identity itself.
  EXPECT_NEAR(rotation_error(I, testutil::rot_z(M_PI)), 0.0, 1e-9);
  std::mt19937_64 rng(6);
  const Eigen::Matrix3d r = testutil::random_rotation(rng);
  EXPECT_NEAR(rotation_error(r, r), 0.0, 1e-9);
  // Both symmetry candidates of rot_x(pi) have trace -1.
  EXPECT_NEAR(rotation_error(I, testutil::rot_x(M_PI)), M_PI, 1e-9);
}

TEST(RotationError, SymmetryInvarianceIsExact) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const Eigen::Matrix3d est = testutil::random_rotation(rng);
    const Eigen::Matrix3d gt = testutil::random_rotation(rng);
    const Eigen::Matrix3d flipped = binpose::detail::flip_left(est);
    EXPECT_EQ(rotation_error(est, gt), rotation_error(flipped, gt));
  }
}

TEST(RotationError, AgreesWithQuaternionOracle) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 5000; ++i) {
    const Eigen::Matrix3d est = testutil::random_rotation(rng);
    const Eigen::Matrix3d gt = testutil::random_rotation(rng);
    const double oracle =
        std::min(testutil::quaternion_angle(est, gt),
                 testutil::quaternion_angle(binpose::detail::flip_left(est), gt));
    EXPECT_NEAR(rotation_error(est, gt), oracle, 1e-9);
  }
}

TEST(BuildCurve, Examples) {
  const std::vector<EvalRecord> records = {record(1, 0.1), record(2, 0.2),
                                           record(kInf, kInf), record(kInf, kInf)};
  const auto curve = build_curve(records, Metric::e_te, {3.0});
  EXPECT_EQ(curve.fractions[0], 0.5);

  const std::vector<EvalRecord> all_failed = {record(kInf, kInf), record(kInf, kInf)};
  for (double f : build_curve(all_failed, Metric::e_te, {1.0, 10.0, 1000.0}).fractions) {
    EXPECT_EQ(f, 0.0);
  }

  EXPECT_EQ(build_curve(records, Metric::e_te, {0.5}).fractions[0], 0.0);
  EXPECT_THROW(build_curve({}, Metric::e_te, {1.0}), binpose::Error);
}

TEST(BuildCurve, MonotoneAndBounded) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 30);
  std::vector<EvalRecord> records;
  for (int i = 0; i < 200; ++i) {
    records.push_back(u(rng) < 5 ? record(kInf, kInf) : record(u(rng), u(rng) / 40));
  }
  const auto curve = build_curve(records, Metric::e_te, binpose::default_te_thresholds());
  for (std::size_t i = 0; i < curve.fractions.size(); ++i) {
    EXPECT_GE(curve.fractions[i], 0.0);
    EXPECT_LE(curve.fractions[i], 1.0);
    if (i) EXPECT_GE(curve.fractions[i], curve.fractions[i - 1]);
  }
}

TEST(Summarize, Examples) {
  const auto s = summarize({record(1, 1), record(3, 3)});
  EXPECT_EQ(s.failure_rate(), 0.0);
  EXPECT_NEAR(*s.mean_e_te, 2.0, 1e-12);
  EXPECT_NEAR(*s.std_e_te, 1.0, 1e-12);

  const auto s2 = summarize({record(2, 0.2), record(2, 0.2), record(kInf, kInf)});
  EXPECT_NEAR(*s2.mean_e_te, 2.0, 1e-12);
  EXPECT_NEAR(s2.failure_rate(), 1.0 / 3.0, 1e-12);

  const auto s3 = summarize({record(kInf, kInf)});
  EXPECT_FALSE(s3.mean_e_te.has_value());
  EXPECT_EQ(s3.failure_rate(), 1.0);
}

TEST(Summarize, MatchesBruteForceRecomputation) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0, 20);
  std::vector<EvalRecord> records;
  for (int i = 0; i < 100; ++i) {
    records.push_back(u(rng) < 4 ? record(kInf, kInf) : record(u(rng), u(rng) / 30));
  }
  const auto s = summarize(records);

  std::vector<double> te;
  for (const auto& r : records) {
    if (!r.failed) te.push_back(r.e_te_mm);
  }
  double mean = 0;
  for (double v : te) mean += v;
  mean /= te.size();
  double var = 0;
  for (double v : te) var += (v - mean) * (v - mean);
  EXPECT_NEAR(*s.mean_e_te, mean, 1e-12);
  EXPECT_NEAR(*s.std_e_te, std::sqrt(var / te.size()), 1e-12);
  EXPECT_NEAR(s.failure_rate(),
              double(records.size() - te.size()) / records.size(), 1e-12);
}

TEST(RecordCsv, RoundTripWithInfinitiesAndOptionalFlag) {
  std::vector<EvalRecord> records;
  EvalRecord a = record(1.25, 0.5);
  a.scan_id = "scan_0001";
  a.method = "analytic";
  a.runtime_ms = 12.5;
  EvalRecord b = record(kInf, kInf);
  b.scan_id = "scan_0002";
  b.method = "icp";
  b.icp_confident = false;
  records = {a, b};

  const auto path =
      (std::filesystem::temp_directory_path() / "binpose_records.csv").string();
  binpose::write_records_csv(records, path);
  const auto loaded = binpose::read_records_csv(path);
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[0].scan_id, "scan_0001");
  EXPECT_EQ(loaded[0].e_te_mm, 1.25);
  EXPECT_FALSE(loaded[0].icp_confident.has_value());
  EXPECT_TRUE(std::isinf(loaded[1].e_te_mm));
  EXPECT_TRUE(loaded[1].failed);
  ASSERT_TRUE(loaded[1].icp_confident.has_value());
  EXPECT_FALSE(*loaded[1].icp_confident);
}

}  // namespace
