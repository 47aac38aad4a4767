#include <gtest/gtest.h>

#include <algorithm>

#include "test_util.hpp"
#include "wildocc/label/kdtree.hpp"

using namespace wildocc;

namespace {

std::vector<Neighbor> brute_knn(const std::vector<Point3>& pts, const Point3& q, int k) {
  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < pts.size(); ++i)
    all.push_back({static_cast<std::uint32_t>(i), (pts[i] - q).squaredNorm()});
  std::sort(all.begin(), all.end());
  all.resize(std::min<std::size_t>(all.size(), k));
  return all;
}

}  // namespace

TEST(KdTree, SinglePoint) {
  const KdTree t({Point3(1, 2, 3)});
  const auto n = t.knn(Point3(100, -4, 2), 1);
  ASSERT_EQ(n.size(), 1u);
  EXPECT_EQ(n[0].index, 0u);
  EXPECT_EQ(t.knn(Point3::Zero(), 5).size(), 1u);
}

TEST(KdTree, LatticeQueryHasZeroDistance) {
  std::vector<Point3> pts;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      for (int k = 0; k < 10; ++k) pts.emplace_back(i, j, k);
  const KdTree t(pts);
  const auto n = t.knn(Point3(3, 7, 2), 1);
  EXPECT_EQ(n[0].distance_sq, 0.0);
  EXPECT_EQ(pts[n[0].index], Point3(3, 7, 2));
}

TEST(KdTree, MatchesBruteForce) {
  std::mt19937_64 rng(11);
  std::vector<Point3> pts;
  for (int i = 0; i < 10000; ++i) pts.push_back(test::random_point(rng, -10, 10));
  const KdTree t(pts);
  for (int q = 0; q < 100; ++q) {
    const Point3 query = test::random_point(rng, -12, 12);
    EXPECT_EQ(t.knn(query, 15), brute_knn(pts, query, 15));
  }
}

TEST(KdTree, TiesResolvedByIndex) {
  // Many duplicated and equidistant points.
  std::vector<Point3> pts;
  for (int r = 0; r < 5; ++r)
    for (int i = 0; i < 8; ++i) pts.emplace_back(i % 2 ? 1.0 : -1.0, (i / 2) % 2 ? 1.0 : -1.0, i / 4 ? 1.0 : -1.0);
  const KdTree t(pts);
  for (int k : {1, 7, 15, 40}) EXPECT_EQ(t.knn(Point3::Zero(), k), brute_knn(pts, Point3::Zero(), k));
}

TEST(KdTree, EmptyThrows) {
  try {
    KdTree t({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInsufficientPoints);
  }
  EXPECT_THROW(build_index(SemanticPointCloud{}), Error);
}
