#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "test_util.hpp"
#include "wildocc/label/knn_label.hpp"

using namespace wildocc;

namespace {

GridSpec unit_spec(int n) {
  GridSpec s;
  s.origin = Point3::Zero();
  s.dims = {n, n, n};
  s.voxel_size = 1.0;
  return s;
}

OccupancyGrid single_voxel() {
  OccupancyGrid g(unit_spec(3));
  g.at({1, 1, 1}) = 1;
  return g;
}

void add(SemanticPointCloud& c, const Point3& p, ClassId l) {
  c.points.push_back(p);
  c.labels.push_back(l);
}

// Points on a sphere of radius r around the center of voxel (1,1,1).
void add_ring(SemanticPointCloud& c, std::mt19937_64& rng, int n, double r, ClassId l) {
  std::normal_distribution<double> g;
  for (int i = 0; i < n; ++i) {
    Point3 d(g(rng), g(rng), g(rng));
    add(c, Point3::Constant(1.5) + r * d.normalized(), l);
  }
}

// Integer-coordinate cloud over a unit grid with half-integer voxel centers:
// squared distances are exact quarter-integers, so ties are everywhere.
SemanticPointCloud lattice_cloud(std::mt19937_64& rng, int n, int extent) {
  std::uniform_int_distribution<int> coord(0, extent);
  std::uniform_int_distribution<int> cls(1, 7);
  std::uniform_real_distribution<double> u;
  SemanticPointCloud c;
  for (int i = 0; i < n; ++i) {
    add(c, Point3(coord(rng), coord(rng), coord(rng)), u(rng) < 0.05 ? kNoiseClass : static_cast<ClassId>(cls(rng)));
  }
  return c;
}

OccupancyGrid random_occupancy(std::mt19937_64& rng, const GridSpec& spec, std::size_t count) {
  OccupancyGrid g(spec);
  std::vector<std::size_t> all(spec.voxel_count());
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  for (std::size_t i = 0; i < count; ++i) g.labels[all[i]] = 1;
  return g;
}

}  // namespace

TEST(KnnLabel, UnanimousVote) {
  const LabelMap m = LabelMap::default_map();
  std::mt19937_64 rng(3);
  SemanticPointCloud c;
  add_ring(c, rng, 15, 0.3, m.id_of("grass"));
  const OccupancyGrid out = knn_label(single_voxel(), c, {}, m);
  EXPECT_EQ(out.at({1, 1, 1}), m.id_of("grass"));
  EXPECT_EQ(out.occupied_count(), 1u);
}

TEST(KnnLabel, StrictMajority) {
  const LabelMap m = LabelMap::default_map();
  std::mt19937_64 rng(4);
  SemanticPointCloud c;
  add_ring(c, rng, 7, 0.2, m.id_of("bush"));  // the closer minority still loses
  add_ring(c, rng, 8, 0.4, m.id_of("tree"));
  add_ring(c, rng, 50, 5.0, m.id_of("bush"));
  EXPECT_EQ(knn_label(single_voxel(), c, {}, m).at({1, 1, 1}), m.id_of("tree"));
}

TEST(KnnLabel, TieBreaks) {
  const LabelMap m = LabelMap::default_map();
  const ClassId tree = m.id_of("tree"), bush = m.id_of("bush");
  const Point3 ctr = Point3::Constant(1.5);
  KnnConfig cfg;
  cfg.k = 2;
  {  // one vote each, nearer class wins regardless of id
    SemanticPointCloud c;
    add(c, ctr + Point3(0.4, 0, 0), std::max(tree, bush));
    add(c, ctr + Point3(0, 0.5, 0), std::min(tree, bush));
    EXPECT_EQ(knn_label(single_voxel(), c, cfg, m).at({1, 1, 1}), std::max(tree, bush));
  }
  {  // equal counts and equal summed distance: smaller id
    SemanticPointCloud c;
    add(c, ctr + Point3(0.4, 0, 0), std::max(tree, bush));
    add(c, ctr + Point3(0, -0.4, 0), std::min(tree, bush));
    EXPECT_EQ(knn_label(single_voxel(), c, cfg, m).at({1, 1, 1}), std::min(tree, bush));
  }
  cfg.k = 4;
  {  // 2 vs 2, summed distances 0.3+0.6 < 0.4+0.6
    SemanticPointCloud c;
    add(c, ctr + Point3(0.3, 0, 0), 5);
    add(c, ctr + Point3(0, 0.6, 0), 5);
    add(c, ctr + Point3(0, 0, 0.4), 2);
    add(c, ctr + Point3(-0.6, 0, 0), 2);
    EXPECT_EQ(knn_label(single_voxel(), c, cfg, m).at({1, 1, 1}), 5);
  }
}

TEST(KnnLabel, MatchesBruteForceWithTies) {
  const LabelMap m = LabelMap::default_map();
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    std::mt19937_64 rng(seed);
    const GridSpec spec = unit_spec(10);
    const OccupancyGrid occ = random_occupancy(rng, spec, 300);
    const SemanticPointCloud c = lattice_cloud(rng, 2000, 10);
    for (int k : {1, 2, 4, 15}) {
      KnnConfig cfg;
      cfg.k = k;
      EXPECT_EQ(knn_label(occ, c, cfg, m), oracle::knn_label(occ, c, k)) << "seed " << seed << " k " << k;
    }
  }
}

TEST(KnnLabel, PermutationInvariant) {
  const LabelMap m = LabelMap::default_map();
  std::mt19937_64 rng(11);
  const GridSpec spec = unit_spec(8);
  const OccupancyGrid occ = random_occupancy(rng, spec, 200);
  const SemanticPointCloud c = lattice_cloud(rng, 1500, 8);
  const OccupancyGrid ref = knn_label(occ, c, {}, m);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<std::size_t> perm(c.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    SemanticPointCloud p;
    for (std::size_t i : perm) add(p, c.points[i], c.labels[i]);
    EXPECT_EQ(knn_label(occ, p, {}, m), ref);
  }
}

TEST(KnnLabel, KOneIsNearestPoint) {
  const LabelMap m = LabelMap::default_map();
  std::mt19937_64 rng(5);
  const GridSpec spec = unit_spec(10);
  const OccupancyGrid occ = random_occupancy(rng, spec, 200);
  SemanticPointCloud c;
  std::uniform_int_distribution<int> cls(1, 7);
  for (int i = 0; i < 3000; ++i) add(c, test::random_point(rng, 0, 10), static_cast<ClassId>(cls(rng)));
  KnnConfig cfg;
  cfg.k = 1;
  const OccupancyGrid out = knn_label(occ, c, cfg, m);
  for (std::size_t v = 0; v < occ.labels.size(); ++v) {
    if (!occ.labels[v]) {
      EXPECT_EQ(out.labels[v], kEmptyClass);
      continue;
    }
    const Point3 q = voxel_center(spec, spec.unlinear(v));
    const auto nn = oracle::knn(c.points, q, 1);
    EXPECT_EQ(out.labels[v], c.labels[nn[0].second]);
  }
}

TEST(KnnLabel, FarAdversariesDoNotFlipUnanimousVote) {
  const LabelMap m = LabelMap::default_map();
  std::mt19937_64 rng(6);
  for (int k : {1, 3, 15, 16}) {
    SemanticPointCloud c;
    add_ring(c, rng, k, 0.3, m.id_of("tree"));
    add_ring(c, rng, (k - 1) / 2, 0.35, m.id_of("bush"));
    KnnConfig cfg;
    cfg.k = k;
    EXPECT_EQ(knn_label(single_voxel(), c, cfg, m).at({1, 1, 1}), m.id_of("tree")) << k;
  }
}

TEST(KnnLabel, NoiseExcludedAndRadius) {
  const LabelMap m = LabelMap::default_map();
  std::mt19937_64 rng(8);
  SemanticPointCloud c;
  add_ring(c, rng, 40, 0.1, kNoiseClass);
  add_ring(c, rng, 3, 2.0, m.id_of("mud"));
  EXPECT_EQ(knn_label(single_voxel(), c, {}, m).at({1, 1, 1}), m.id_of("mud"));
  KnnConfig cfg;
  cfg.max_radius = 1.0;
  EXPECT_EQ(knn_label(single_voxel(), c, cfg, m).at({1, 1, 1}), kNoiseClass);
  cfg.max_radius = 2.5;
  EXPECT_EQ(knn_label(single_voxel(), c, cfg, m).at({1, 1, 1}), m.id_of("mud"));

  std::mt19937_64 r2(9);
  const GridSpec spec = unit_spec(6);
  const OccupancyGrid occ = random_occupancy(r2, spec, 50);
  const SemanticPointCloud lc = lattice_cloud(r2, 300, 6);
  cfg.k = 15;
  cfg.max_radius = 1.3;
  EXPECT_EQ(knn_label(occ, lc, cfg, m), oracle::knn_label(occ, lc, 15, 1.3));
}

TEST(KnnLabel, Preconditions) {
  const LabelMap m = LabelMap::default_map();
  SemanticPointCloud c;
  EXPECT_THROW(knn_label(single_voxel(), c, {}, m), Error);
  add(c, Point3::Zero(), 1);
  KnnConfig bad;
  bad.k = 0;
  EXPECT_THROW(knn_label(single_voxel(), c, bad, m), Error);
  bad.k = 3;
  bad.max_radius = -1.0;
  EXPECT_THROW(knn_label(single_voxel(), c, bad, m), Error);
  OccupancyGrid semantic = single_voxel();
  semantic.at({1, 1, 1}) = 4;
  EXPECT_THROW(knn_label(semantic, c, {}, m), Error);
  c.labels[0] = 42;
  EXPECT_THROW(knn_label(single_voxel(), c, {}, m), Error);
}
