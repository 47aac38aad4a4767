#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "json.hpp"
#include "test_util.hpp"
#include "wildocc/metrics.hpp"

using namespace wildocc;
using test::kind_of;

namespace {

GridSpec line_spec(int n) {
  GridSpec s;
  s.origin = Point3::Zero();
  s.dims = {1, 1, n};
  s.voxel_size = 1.0;
  return s;
}

OccupancyGrid grid(const GridSpec& s, std::vector<ClassId> labels) {
  OccupancyGrid g(s);
  g.labels = std::move(labels);
  return g;
}

OccupancyGrid random_grid(std::mt19937_64& rng, const GridSpec& s, int n, bool noise) {
  std::uniform_int_distribution<int> lab(0, n);
  std::bernoulli_distribution empty(0.5), ign(0.1);
  OccupancyGrid g(s);
  for (auto& l : g.labels) {
    l = empty(rng) ? kEmptyClass : static_cast<ClassId>(lab(rng));
    if (noise && ign(rng)) l = kNoiseClass;
  }
  return g;
}

std::set<std::size_t> where(const OccupancyGrid& g, const OccupancyGrid& gt, auto pred) {
  std::set<std::size_t> s;
  for (std::size_t v = 0; v < g.labels.size(); ++v) {
    if (gt.labels[v] != kNoiseClass && pred(g.labels[v])) s.insert(v);
  }
  return s;
}

double set_iou(const std::set<std::size_t>& a, const std::set<std::size_t>& b) {
  std::vector<std::size_t> i, u;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(i));
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(u));
  return u.empty() ? std::nan("") : static_cast<double>(i.size()) / static_cast<double>(u.size());
}

}  // namespace

TEST(Confusion, DiagonalIgnoredAndLoopOracle) {
  const LabelMap m = LabelMap::default_map();
  const GridSpec s = line_spec(8);
  const OccupancyGrid a = grid(s, {0, 1, 2, 3, 4, 5, 6, 7});
  const ConfusionMatrix d = confusion(a, a, 7);
  for (int g = 0; g <= 7; ++g)
    for (int p = 0; p <= 7; ++p) EXPECT_EQ(d.at(g, p), g == p ? 1u : 0u);
  const ConfusionMatrix all_noise = confusion(a, OccupancyGrid(s, kNoiseClass), 7);
  EXPECT_EQ(all_noise.ignored_count, 8u);
  EXPECT_EQ(std::accumulate(all_noise.counts.begin(), all_noise.counts.end(), std::uint64_t{0}), 0u);

  std::mt19937_64 rng(1);
  const GridSpec big{Point3::Zero(), {10, 12, 8}, 0.2};
  const OccupancyGrid p = random_grid(rng, big, 7, false), g = random_grid(rng, big, 7, true);
  const ConfusionMatrix cm = confusion(p, g, 7);
  ConfusionMatrix ref(7);
  for (std::size_t v = 0; v < g.labels.size(); ++v) {
    if (g.labels[v] == kNoiseClass) ++ref.ignored_count;
    else ++ref.counts[g.labels[v] * 8 + p.labels[v]];
  }
  EXPECT_EQ(cm.counts, ref.counts);
  EXPECT_EQ(cm.ignored_count, ref.ignored_count);
  EXPECT_EQ(cm.total(), big.voxel_count());
}

TEST(Confusion, Errors) {
  const OccupancyGrid a(line_spec(3)), b(line_spec(4));
  EXPECT_EQ(kind_of([&] { confusion(a, b, 7); }), ErrorKind::kIncompatibleGrid);
  EXPECT_THROW(confusion(grid(line_spec(3), {0, 255, 1}), a, 7), Error);
  EXPECT_THROW(confusion(grid(line_spec(3), {0, 9, 1}), a, 7), Error);
}

TEST(GeometricIou, CasesAndSetOracle) {
  const GridSpec s = line_spec(6);
  const OccupancyGrid a = grid(s, {1, 2, 0, 0, 0, 0}), b = grid(s, {0, 0, 3, 3, 3, 0});
  EXPECT_EQ(geometric_iou(confusion(a, a, 7)), 1.0);
  EXPECT_EQ(geometric_iou(confusion(a, b, 7)), 0.0);
  EXPECT_EQ(geometric_iou(confusion(OccupancyGrid(s), OccupancyGrid(s), 7)), 1.0);

  std::mt19937_64 rng(2);
  const GridSpec big{Point3::Zero(), {9, 7, 11}, 0.2};
  const auto occ = [](ClassId l) { return l != kEmptyClass; };
  for (int t = 0; t < 10; ++t) {
    const OccupancyGrid p = random_grid(rng, big, 7, false), g = random_grid(rng, big, 7, true);
    const double iou = geometric_iou(confusion(p, g, 7));
    EXPECT_NEAR(iou, set_iou(where(p, g, occ), where(g, g, occ)), 1e-12);
    // symmetric when neither grid carries noise
    const OccupancyGrid q = random_grid(rng, big, 7, false);
    EXPECT_EQ(geometric_iou(confusion(p, q, 7)), geometric_iou(confusion(q, p, 7)));
  }
}

TEST(MeanIou, HandEnumeratedFourVoxels) {
  const LabelMap m = LabelMap::default_map();
  const GridSpec s = line_spec(4);
  const MeanIou r = mean_iou(confusion(grid(s, {1, 1, 1, 1}), grid(s, {1, 1, 2, 2}), 7), m);
  EXPECT_EQ(r.per_class[0], 0.5);
  EXPECT_EQ(r.per_class[1], 0.0);
  EXPECT_EQ(r.miou, 0.25);
  EXPECT_EQ(r.classes_counted, 2);
  for (int c = 2; c < 7; ++c) EXPECT_TRUE(std::isnan(r.per_class[c]));

  const MeanIou strict = mean_iou(confusion(grid(s, {1, 1, 1, 1}), grid(s, {1, 1, 2, 2}), 7), m, true);
  EXPECT_EQ(strict.classes_counted, 7);
  EXPECT_DOUBLE_EQ(strict.miou, 0.5 / 7);

  const MeanIou perfect = mean_iou(confusion(grid(s, {1, 2, 0, 2}), grid(s, {1, 2, 0, 2}), 7), m);
  EXPECT_EQ(perfect.miou, 1.0);
}

TEST(MeanIou, SetOracleOnRandomGrids) {
  const LabelMap m = LabelMap::default_map();
  std::mt19937_64 rng(3);
  const GridSpec big{Point3::Zero(), {8, 9, 10}, 0.2};
  for (int t = 0; t < 10; ++t) {
    const OccupancyGrid p = random_grid(rng, big, 7, false), g = random_grid(rng, big, 7, true);
    const MeanIou r = mean_iou(confusion(p, g, 7), m);
    double sum = 0.0;
    int counted = 0;
    for (ClassId c = 1; c <= 7; ++c) {
      const auto is_c = [c](ClassId l) { return l == c; };
      const double iou = set_iou(where(p, g, is_c), where(g, g, is_c));
      if (std::isnan(iou)) {
        EXPECT_TRUE(std::isnan(r.per_class[c - 1]));
        continue;
      }
      EXPECT_NEAR(r.per_class[c - 1], iou, 1e-12);
      sum += iou;
      ++counted;
    }
    EXPECT_EQ(r.classes_counted, counted);
    EXPECT_NEAR(r.miou, sum / counted, 1e-12);
  }
}

TEST(MeanIou, MonotoneAndPermutationInvariant) {
  const LabelMap m = LabelMap::default_map();
  std::mt19937_64 rng(4);
  const GridSpec s = line_spec(500);
  OccupancyGrid p = random_grid(rng, s, 7, false);
  const OccupancyGrid g = random_grid(rng, s, 7, false);
  for (std::size_t v = 0; v < g.labels.size(); ++v) {
    if (p.labels[v] == g.labels[v] || g.labels[v] == kEmptyClass) continue;
    const ClassId c = g.labels[v];
    const double before = mean_iou(confusion(p, g, 7), m).per_class[c - 1];
    p.labels[v] = c;
    EXPECT_GE(mean_iou(confusion(p, g, 7), m).per_class[c - 1], before);
  }
  std::vector<std::size_t> perm(s.voxel_count());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  OccupancyGrid pp(s), gp(s);
  const OccupancyGrid p0 = random_grid(rng, s, 7, false), g0 = random_grid(rng, s, 7, true);
  for (std::size_t v = 0; v < perm.size(); ++v) {
    pp.labels[v] = p0.labels[perm[v]];
    gp.labels[v] = g0.labels[perm[v]];
  }
  const MetricsReport a = evaluate(p0, g0, m), b = evaluate(pp, gp, m);
  EXPECT_EQ(a.iou, b.iou);
  EXPECT_EQ(a.miou.miou, b.miou.miou);
}

TEST(MeanIou, Errors) {
  const LabelMap m = LabelMap::default_map();
  const GridSpec s = line_spec(3);
  EXPECT_EQ(kind_of([&] { mean_iou(confusion(OccupancyGrid(s), OccupancyGrid(s), 7), m); }),
            ErrorKind::kUndefinedMetric);
  EXPECT_EQ(mean_iou(confusion(OccupancyGrid(s), OccupancyGrid(s), 7), m, true).miou, 0.0);
  EXPECT_THROW(mean_iou(ConfusionMatrix(3), m), Error);
}

TEST(Report, KeyValueAndJson) {
  const LabelMap m = LabelMap::default_map();
  const GridSpec s = line_spec(5);
  const MetricsReport r = evaluate(grid(s, {1, 1, 1, 1, 0}), grid(s, {1, 1, 2, 2, 255}), m);
  const std::string kv = to_key_value(r);
  EXPECT_NE(kv.find("iou=1\n"), std::string::npos);
  EXPECT_NE(kv.find("miou=0.25\n"), std::string::npos);
  EXPECT_NE(kv.find("ignored=1\n"), std::string::npos);
  EXPECT_NE(kv.find("iou_grass=0.5\n"), std::string::npos);
  EXPECT_NE(kv.find("iou_puddle=nan\n"), std::string::npos);

  const auto j = nlohmann::json::parse(to_json(r));
  EXPECT_EQ(j["iou"].get<double>(), 1.0);
  EXPECT_EQ(j["miou"].get<double>(), 0.25);
  EXPECT_EQ(j["classes_counted"].get<int>(), 2);
  EXPECT_EQ(j["total"].get<int>(), 5);
  EXPECT_EQ(j["per_class"]["tree"].get<double>(), 0.0);
  EXPECT_TRUE(j["per_class"]["rubble"].is_null());
  EXPECT_EQ(j["confusion"][1][1].get<int>(), 2);
  EXPECT_EQ(j["confusion"][2][1].get<int>(), 2);
}
