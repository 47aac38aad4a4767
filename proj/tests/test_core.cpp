#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_util.hpp"
#include "wildocc/core/feature_volume.hpp"
#include "wildocc/core/grid.hpp"
#include "wildocc/core/label_map.hpp"
#include "wildocc/core/pose.hpp"

using namespace wildocc;

TEST(VoxelCenter, DefaultGridCorners) {
  const GridSpec spec;
  EXPECT_TRUE(voxel_center(spec, {0, 0, 0}).isApprox(Point3(0.1, -9.9, -1.9), 1e-12));
  EXPECT_TRUE(voxel_center(spec, {99, 99, 39}).isApprox(Point3(19.9, 9.9, 5.9), 1e-12));
}

TEST(VoxelCenter, UnitGrid) {
  GridSpec spec;
  spec.origin = Point3::Zero();
  spec.voxel_size = 1.0;
  EXPECT_EQ(voxel_center(spec, {2, 3, 4}), Point3(2.5, 3.5, 4.5));
}

TEST(VoxelCenter, OutOfRangeThrows) {
  const GridSpec spec;
  try {
    voxel_center(spec, {100, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kRange);
  }
  EXPECT_THROW(voxel_center(spec, {0, -1, 0}), Error);
}

TEST(VoxelIndex, RoundTripEveryVoxel) {
  GridSpec spec;
  spec.dims = {13, 7, 5};
  spec.origin = Point3(-1.3, 0.7, 2.1);
  spec.voxel_size = 0.3;
  for (std::size_t n = 0; n < spec.voxel_count(); ++n) {
    const Index3 idx = spec.unlinear(n);
    EXPECT_EQ(spec.linear(idx), n);
    const auto back = voxel_index(spec, voxel_center(spec, idx));
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, idx);
  }
}

TEST(VoxelIndex, HalfOpenOwnership) {
  GridSpec spec;
  spec.origin = Point3::Zero();
  spec.voxel_size = 1.0;
  spec.dims = {4, 4, 4};
  // An interior face belongs to the upper cell.
  EXPECT_EQ(*voxel_index(spec, Point3(1.0, 0.5, 0.5)), (Index3{1, 0, 0}));
  EXPECT_EQ(*voxel_index(spec, Point3(0.0, 0.0, 0.0)), (Index3{0, 0, 0}));
  // The outer max face is outside.
  EXPECT_FALSE(voxel_index(spec, Point3(4.0, 0.5, 0.5)).has_value());
  EXPECT_FALSE(voxel_index(spec, Point3(-1e-12, 0.5, 0.5)).has_value());
}

TEST(GridSpec, LinearIsISlowest) {
  const GridSpec spec;
  EXPECT_EQ(spec.linear({0, 0, 1}), 1u);
  EXPECT_EQ(spec.linear({0, 1, 0}), 40u);
  EXPECT_EQ(spec.linear({1, 0, 0}), 4000u);
  EXPECT_EQ(spec.voxel_count(), 400000u);
}

TEST(GridSpec, InvalidRejected) {
  GridSpec spec;
  spec.dims = {0, 1, 1};
  EXPECT_THROW(spec.validate(), Error);
  spec = GridSpec{};
  spec.voxel_size = -0.2;
  EXPECT_THROW(spec.validate(), Error);
}

TEST(Pose, Examples) {
  const Point3 p(1, 2, 3);
  EXPECT_EQ(pose_apply(RigidPose::identity(), p), p);
  EXPECT_EQ(pose_apply(RigidPose::translation({5, 0, 0}), p), Point3(6, 2, 3));
  const Point3 r = pose_apply(RigidPose::yaw(std::numbers::pi / 2), Point3(1, 0, 0));
  EXPECT_NEAR((r - Point3(0, 1, 0)).norm(), 0.0, 1e-9);
}

TEST(Pose, RandomInverseAndCompose) {
  std::mt19937_64 rng(7);
  for (int n = 0; n < 1000; ++n) {
    const RigidPose a = test::random_pose(rng), b = test::random_pose(rng), c = test::random_pose(rng);
    const Point3 p = test::random_point(rng, -20, 20);
    EXPECT_LT((pose_apply(pose_invert(a), pose_apply(a, p)) - p).norm(), 1e-9);
    EXPECT_LT((pose_compose(a, pose_invert(a)).matrix() - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    const Eigen::Matrix4d lhs = pose_compose(pose_compose(a, b), c).matrix();
    const Eigen::Matrix4d rhs = pose_compose(a, pose_compose(b, c)).matrix();
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT((pose_apply(pose_compose(a, b), p) - pose_apply(a, pose_apply(b, p))).norm(), 1e-9);
  }
}

TEST(Pose, InvalidMatricesRejected) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m(0, 0) = 2.0;
  EXPECT_THROW(RigidPose{m}, Error);
  m = Eigen::Matrix4d::Identity();
  m(2, 2) = -1.0;  // reflection
  EXPECT_THROW(RigidPose{m}, Error);
  m = Eigen::Matrix4d::Identity();
  m(3, 0) = 0.5;
  EXPECT_THROW(RigidPose{m}, Error);
  m = Eigen::Matrix4d::Zero();
  try {
    RigidPose bad(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidPose);
  }
}

TEST(Pose, OrthonormalizeProjectsNearbyMatrix) {
  std::mt19937_64 rng(3);
  const RigidPose p = test::random_pose(rng);
  Eigen::Matrix3d r = p.rotation();
  r(0, 1) += 5e-4;
  const Eigen::Matrix3d q = orthonormalize(r);
  EXPECT_LT((q.transpose() * q - Eigen::Matrix3d::Identity()).norm(), 1e-12);
  EXPECT_NEAR(q.determinant(), 1.0, 1e-12);
  EXPECT_LT((q - p.rotation()).norm(), 1e-3);
}

TEST(LabelMap, DefaultSevenClasses) {
  const LabelMap m = LabelMap::default_map();
  EXPECT_EQ(m.num_classes(), 7);
  const char* names[] = {"grass", "tree", "bush", "puddle", "mud", "barrier", "rubble"};
  for (int i = 0; i < 7; ++i) EXPECT_EQ(m.name_of(static_cast<ClassId>(i + 1)), names[i]);
  EXPECT_TRUE(m.is_ground(m.id_of("grass")));
  EXPECT_TRUE(m.is_ground(m.id_of("rubble")));
  EXPECT_FALSE(m.is_ground(m.id_of("tree")));
  EXPECT_EQ(m.remap(3), m.id_of("grass"));
  EXPECT_EQ(m.remap(4), m.id_of("tree"));
  EXPECT_EQ(m.remap(0), kNoiseClass);
  EXPECT_EQ(m.remap(9999), kNoiseClass);
}

TEST(LabelMap, IdsMustBeContiguous) {
  EXPECT_THROW(LabelMap({{1, "a"}, {3, "b"}}, {}), Error);
  EXPECT_THROW(LabelMap({{1, "a"}, {1, "b"}}, {}), Error);
  EXPECT_NO_THROW(LabelMap({{2, "b"}, {1, "a"}}, {1}));
}

TEST(Mesh, CleanMergesAndDropsDegenerates) {
  TriangleMesh m;
  m.vertices = {Point3(0, 0, 0), Point3(1, 0, 0), Point3(0, 1, 0), Point3(1e-9, 0, 0), Point3(5, 5, 5),
                Point3(2, 0, 0)};
  m.triangles = {{0, 1, 2}, {3, 2, 1}, {0, 3, 1}, {0, 1, 5}};
  const TriangleMesh c = clean_mesh(m);
  // Vertex 3 merges into 0; {0,3,1} repeats an index; {0,1,5} is collinear;
  // vertex 4 is unreferenced.
  ASSERT_EQ(c.triangles.size(), 2u);
  EXPECT_EQ(c.vertices.size(), 3u);
  for (std::size_t t = 0; t < c.triangles.size(); ++t) EXPECT_GT(triangle_area(c, t), 1e-12);
  EXPECT_NO_THROW(c.validate());
}

TEST(Mesh, ValidateRejectsBadIndices) {
  TriangleMesh m;
  m.vertices = {Point3(0, 0, 0), Point3(1, 0, 0), Point3(0, 1, 0)};
  m.triangles = {{0, 1, 3}};
  EXPECT_THROW(m.validate(), Error);
  m.triangles = {{0, 1, 1}};
  EXPECT_THROW(m.validate(), Error);
}

TEST(Mesh, ConcatCountsAdd) {
  TriangleMesh a, b;
  a.vertices = {Point3(0, 0, 0), Point3(1, 0, 0), Point3(0, 1, 0)};
  a.triangles = {{0, 1, 2}};
  b = a;
  const TriangleMesh c = concat(a, b);
  EXPECT_EQ(c.vertices.size(), 6u);
  ASSERT_EQ(c.triangles.size(), 2u);
  EXPECT_EQ(c.triangles[1], (std::array<std::int32_t, 3>{3, 4, 5}));
}

TEST(PointCloud, ValidateChecksLengths) {
  SemanticPointCloud c;
  c.points = {Point3(0, 0, 0)};
  c.labels = {};
  EXPECT_THROW(c.validate(), Error);
  c.labels = {1};
  EXPECT_NO_THROW(c.validate());
  c.intensity = {0.5f, 0.2f};
  EXPECT_THROW(c.validate(), Error);
}

TEST(FeatureVolume, LayoutIsChannelMajor) {
  GridSpec spec;
  spec.dims = {2, 3, 4};
  FeatureVolume v(spec, 2);
  EXPECT_EQ(v.size(), 48u);
  v(1, Index3{1, 2, 3}) = 7.0;
  EXPECT_EQ(v.storage()[24 + spec.linear({1, 2, 3})], 7.0);
  EXPECT_EQ(v.channel(1).sum(), 7.0);
  EXPECT_TRUE(v.all_finite());
  v(0, std::size_t{0}) = std::nan("");
  EXPECT_FALSE(v.all_finite());
  EXPECT_THROW(FeatureVolume(spec, 0), Error);
}

TEST(OccupancyGrid, Counts) {
  GridSpec spec;
  spec.dims = {2, 2, 2};
  OccupancyGrid g(spec);
  g.labels = {0, 1, 1, 2, 255, 0, 0, 3};
  EXPECT_EQ(g.occupied_count(), 4u);
  EXPECT_EQ(g.count_if_label(1), 2u);
}
