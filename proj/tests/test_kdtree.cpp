#include <random>

#include <gtest/gtest.h>

#include "binpose/kdtree.hpp"
#include "test_util.hpp"

namespace {

TEST(KdTree, MatchesBruteForceOnRandomQueries) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-400, 400);
  std::vector<Eigen::Vector3d> points;
  for (int i = 0; i < 5000; ++i) points.emplace_back(u(rng), u(rng), u(rng));
  const binpose::KdTree3 tree(points);

  for (int q = 0; q < 1000; ++q) {
    const Eigen::Vector3d query(u(rng), u(rng), u(rng));
    const auto nn = tree.nearest(query);
    const std::size_t brute = testutil::brute_force_nearest(points, query);
    EXPECT_EQ((points[brute] - query).squaredNorm(), nn.squared_distance);
  }
}

TEST(KdTree, PlanarAndCollinearSets) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-50, 50);
  std::vector<Eigen::Vector3d> plane;
  for (int i = 0; i < 500; ++i) plane.emplace_back(u(rng), u(rng), 10.0);
  const binpose::KdTree3 tree(plane);
  for (int q = 0; q < 200; ++q) {
    const Eigen::Vector3d query(u(rng), u(rng), u(rng));
    const auto nn = tree.nearest(query);
    EXPECT_EQ((plane[testutil::brute_force_nearest(plane, query)] - query).squaredNorm(),
              nn.squared_distance);
  }

  std::vector<Eigen::Vector3d> line;
  for (int i = 0; i < 100; ++i) line.emplace_back(double(i), 0.0, 0.0);
  const binpose::KdTree3 linetree(line);
  const auto nn = linetree.nearest({17.4, 5.0, 0.0});
  EXPECT_EQ(linetree.point(nn.index), Eigen::Vector3d(17, 0, 0));
}

TEST(KdTree, SinglePointAndDuplicates) {
  const binpose::KdTree3 one({{1, 2, 3}});
  EXPECT_EQ(one.nearest({0, 0, 0}).index, 0u);

  std::vector<Eigen::Vector3d> dup(50, Eigen::Vector3d(5, 5, 5));
  dup.emplace_back(6, 5, 5);
  const binpose::KdTree3 tree(dup);
  const auto nn = tree.nearest({6.2, 5, 5});
  EXPECT_EQ(tree.point(nn.index), Eigen::Vector3d(6, 5, 5));
}

}  // namespace
