#pragma once

// Brute-force reference implementations used only by tests.

#include <Eigen/Geometry>
#include <algorithm>
#include <array>
#include <limits>
#include <map>
#include <random>
#include <tuple>
#include <vector>

#include "wildocc/core/grid.hpp"
#include "wildocc/core/types.hpp"

namespace wildocc::oracle {

/// Closed triangle/box intersection: projects the 8 box corners and the 3
/// triangle vertices onto every candidate separating axis.
inline bool tri_box(const Point3& lo, const Point3& hi, const Point3& a, const Point3& b, const Point3& c) {
  std::array<Point3, 8> corners;
  for (int n = 0; n < 8; ++n) corners[n] = Point3(n & 1 ? hi.x() : lo.x(), n & 2 ? hi.y() : lo.y(), n & 4 ? hi.z() : lo.z());
  const std::array<Point3, 3> tri{a, b, c};
  std::vector<Point3> axes{Point3::UnitX(), Point3::UnitY(), Point3::UnitZ(), (b - a).cross(c - a)};
  for (const Point3& e : {Point3(b - a), Point3(c - b), Point3(a - c)})
    for (const Point3& u : {Point3::UnitX(), Point3::UnitY(), Point3::UnitZ()}) axes.push_back(e.cross(u));
  for (const Point3& ax : axes) {
    if (ax.squaredNorm() == 0.0) continue;
    double t0 = std::numeric_limits<double>::infinity(), t1 = -t0, b0 = t0, b1 = -t0;
    for (const auto& p : tri) {
      t0 = std::min(t0, ax.dot(p));
      t1 = std::max(t1, ax.dot(p));
    }
    for (const auto& p : corners) {
      b0 = std::min(b0, ax.dot(p));
      b1 = std::max(b1, ax.dot(p));
    }
    if (t1 < b0 || b1 < t0) return false;
  }
  return true;
}

/// Area-uniform point on triangle abc.
inline Point3 sample_triangle(std::mt19937_64& rng, const Point3& a, const Point3& b, const Point3& c) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double s = u(rng), t = u(rng);
  if (s + t > 1.0) {
    s = 1.0 - s;
    t = 1.0 - t;
  }
  return a + s * (b - a) + t * (c - a);
}

/// Indices of the k nearest points, sorted by (distance, index).
inline std::vector<std::pair<double, std::size_t>> knn(const std::vector<Point3>& pts, const Point3& q, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  for (std::size_t i = 0; i < pts.size(); ++i) d.emplace_back((pts[i] - q).squaredNorm(), i);
  std::sort(d.begin(), d.end());
  if (d.size() > k) d.resize(k);
  return d;
}

/// Mode with ties broken by smaller summed Euclidean distance, then smaller id.
inline ClassId vote(const std::vector<std::pair<double, std::size_t>>& nbrs, const std::vector<ClassId>& labels) {
  std::map<ClassId, std::pair<int, double>> tally;
  for (const auto& [d2, i] : nbrs) {
    auto& t = tally[labels[i]];
    ++t.first;
    t.second += std::sqrt(d2);
  }
  ClassId best = kNoiseClass;
  int best_n = -1;
  double best_d = 0.0;
  for (const auto& [c, t] : tally) {  // ascending class id
    if (t.first > best_n || (t.first == best_n && t.second < best_d)) {
      best = c;
      best_n = t.first;
      best_d = t.second;
    }
  }
  return best;
}

/// Brute-force voxel labeling: every non-noise point ranked by squared
/// distance, then (x, y, z, label); the first k inside `max_radius` vote.
inline OccupancyGrid knn_label(const OccupancyGrid& occ, const SemanticPointCloud& cloud, std::size_t k,
                               double max_radius = std::numeric_limits<double>::infinity()) {
  OccupancyGrid out(occ.spec);
  for (std::size_t v = 0; v < occ.labels.size(); ++v) {
    if (occ.labels[v] == kEmptyClass) continue;
    const Index3 ix = occ.spec.unlinear(v);
    const Point3 c = occ.spec.origin + occ.spec.voxel_size * Point3(ix[0] + 0.5, ix[1] + 0.5, ix[2] + 0.5);
    std::vector<std::tuple<double, double, double, double, ClassId>> ranked;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (cloud.labels[i] == kNoiseClass) continue;
      const Point3& p = cloud.points[i];
      ranked.emplace_back((p - c).squaredNorm(), p.x(), p.y(), p.z(), cloud.labels[i]);
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<std::pair<double, std::size_t>> nbrs;
    std::vector<ClassId> labels;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) {
      if (std::get<0>(ranked[i]) > max_radius * max_radius) break;
      nbrs.emplace_back(std::get<0>(ranked[i]), labels.size());
      labels.push_back(std::get<4>(ranked[i]));
    }
    out.labels[v] = vote(nbrs, labels);
  }
  return out;
}

}  // namespace wildocc::oracle
