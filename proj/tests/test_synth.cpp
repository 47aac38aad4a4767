#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "test_util.hpp"
#include "wildocc/io/grid_file.hpp"
#include "wildocc/pipeline.hpp"
#include "wildocc/synth.hpp"

using namespace wildocc;
using test::kind_of;

namespace {

SyntheticScene plane_only() {
  SyntheticScene s;
  s.primitives = {Primitive::plane(0, 20, -10, 10, -1.5, s.labels.id_of("grass"))};
  return s;
}

}  // namespace

TEST(Synth, PlaneFillsOneSlab) {
  const SyntheticScene s = plane_only();
  const OccupancyGrid gt = analytic_ground_truth(s);
  EXPECT_EQ(gt.occupied_count(), 100u * 100u);
  for (int i = 0; i < 100; i += 7)
    for (int j = 0; j < 100; j += 3)
      for (int k = 0; k < 40; ++k) EXPECT_EQ(gt.at({i, j, k}), k == 2 ? 1 : 0);
}

TEST(Synth, TrajectoryKeyframeIsIdentity) {
  const Trajectory t;
  EXPECT_TRUE(t.pose(t.keyframe()).matrix().isApprox(Eigen::Matrix4d::Identity(), 1e-15));
  for (int i = 0; i < t.frames; ++i) {
    const Point3 c(t.radius, 0, 0);
    EXPECT_NEAR((t.pose(i).translation() - c).norm(), t.radius, 1e-9);
  }
}

TEST(Synth, Deterministic) {
  const SyntheticScene s = SyntheticScene::default_scene();
  const SyntheticData a = generate_synthetic(s, 5000, 0.01, 7), b = generate_synthetic(s, 5000, 0.01, 7);
  const SyntheticData c = generate_synthetic(s, 5000, 0.01, 8);
  ASSERT_EQ(a.frames.size(), b.frames.size());
  bool differs = false;
  for (std::size_t f = 0; f < a.frames.size(); ++f) {
    EXPECT_EQ(a.frames[f].cloud.points, b.frames[f].cloud.points);
    EXPECT_EQ(a.frames[f].cloud.labels, b.frames[f].cloud.labels);
    differs |= a.frames[f].cloud.points != c.frames[f].cloud.points;
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.gt, b.gt);
}

TEST(Synth, NoiseShareAndVisibility) {
  const SyntheticScene s = SyntheticScene::default_scene();
  const SyntheticData d = generate_synthetic(s, 40000, 0.0, 3);
  std::size_t total = 0, noise = 0;
  const ClassId grass = s.labels.id_of("grass");
  for (const auto& f : d.frames) {
    const SemanticPointCloud w = frame_to_world(f);
    for (std::size_t i = 0; i < w.size(); ++i) {
      ++total;
      noise += w.labels[i] == kNoiseClass;
      if (w.labels[i] == grass) {
        EXPECT_NEAR(w.points[i].z(), -1.5, 1e-9);
        EXPECT_GT(f.pose_world.translation().z(), w.points[i].z());
      }
    }
  }
  EXPECT_GT(total, 39000u);
  EXPECT_NEAR(static_cast<double>(noise) / static_cast<double>(total), s.noise_fraction, 0.005);
}

TEST(Synth, SphereGroundTruthMatchesDenseSampling) {
  SyntheticScene s;
  const Point3 center(11.03, 2.47, 1.01);
  s.primitives = {Primitive::sphere(center, 1.5, s.labels.id_of("tree"))};
  const OccupancyGrid gt = analytic_ground_truth(s);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::set<std::size_t> hit;
  for (int n = 0; n < 2'000'000; ++n) {
    const Point3 d(g(rng), g(rng), g(rng));
    if (const auto idx = voxel_index(s.spec, center + 1.5 * d.normalized())) hit.insert(s.spec.linear(*idx));
  }
  for (std::size_t v : hit) ASSERT_NE(gt.labels[v], kEmptyClass);
  const double ratio = static_cast<double>(hit.size()) / static_cast<double>(gt.occupied_count());
  EXPECT_GE(ratio, 0.98);
  EXPECT_LE(ratio, 1.0);
}

TEST(Synth, LaterPrimitivesWin) {
  SyntheticScene s = plane_only();
  s.primitives.push_back(Primitive::box(Point3(5, 0, -1.6), Point3(6, 1, -1.0), s.labels.id_of("barrier")));
  const OccupancyGrid gt = analytic_ground_truth(s);
  EXPECT_EQ(gt.at({27, 52, 2}), s.labels.id_of("barrier"));
  EXPECT_EQ(gt.at({10, 10, 2}), s.labels.id_of("grass"));
}

TEST(Synth, ValidateRejectsBadScenes) {
  SyntheticScene s = SyntheticScene::default_scene();
  EXPECT_NO_THROW(s.validate());
  s.primitives.push_back(Primitive::sphere(Point3(30, 0, 0), 1.0, 2));
  EXPECT_EQ(kind_of([&] { s.validate(); }), ErrorKind::kPrecondition);
  s = SyntheticScene::default_scene();
  s.primitives.push_back(Primitive::sphere(Point3(10, 0, 0), 1.0, 42));
  EXPECT_EQ(kind_of([&] { s.validate(); }), ErrorKind::kPrecondition);
}

TEST(Synth, DatasetOnDiskLoadsBack) {
  const auto dir = test::scratch_dir("synth_ds");
  SyntheticScene s = SyntheticScene::default_scene();
  s.trajectory.frames = 6;
  const SyntheticData d = generate_synthetic(s, 3000, 0.01, 2);
  const auto manifest_path = write_synthetic_dataset(dir, s, d);
  const SequenceManifest m = SequenceManifest::load(manifest_path);
  EXPECT_NO_THROW(m.validate());
  EXPECT_EQ(m.frames.size(), 6u);
  EXPECT_EQ(m.config.window, 6);
  const auto frames = load_frames(m);
  ASSERT_EQ(frames.size(), d.frames.size());
  for (std::size_t f = 0; f < frames.size(); ++f) {
    EXPECT_EQ(frames[f].cloud.labels, d.frames[f].cloud.labels);
    EXPECT_TRUE(frames[f].pose_world.matrix().isApprox(d.frames[f].pose_world.matrix(), 1e-12));
    ASSERT_EQ(frames[f].cloud.size(), d.frames[f].cloud.size());
    for (std::size_t i = 0; i < frames[f].cloud.size(); ++i) {
      ASSERT_LT((frames[f].cloud.points[i] - d.frames[f].cloud.points[i]).cwiseAbs().maxCoeff(), 1e-5);
    }
  }
  EXPECT_EQ(io::read_grid(dir / "gt.wocc"), d.gt);
}
