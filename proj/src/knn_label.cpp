#include "wildocc/label/knn_label.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <tuple>

namespace wildocc {

void KnnConfig::validate() const {
  if (k < 1) throw Error(ErrorKind::kPrecondition, "knn k must be >= 1");
  if (max_radius && !(*max_radius > 0.0)) {
    throw Error(ErrorKind::kPrecondition, "knn max_radius must be positive");
  }
}

ClassId majority_vote(std::span<const Neighbor> neighbors, std::span<const ClassId> labels) {
  std::array<int, 256> votes{};
  std::array<double, 256> dist{};
  for (const auto& n : neighbors) {
    const ClassId c = labels[n.index];
    ++votes[c];
    dist[c] += std::sqrt(n.distance_sq);
  }
  int best = -1;
  for (int c = 0; c < 256; ++c) {
    if (votes[c] == 0) continue;
    if (best < 0 || votes[c] > votes[best] || (votes[c] == votes[best] && dist[c] < dist[best])) {
      best = c;
    }
  }
  return best < 0 ? kNoiseClass : static_cast<ClassId>(best);
}

OccupancyGrid knn_label(const OccupancyGrid& occupancy, const SemanticPointCloud& cloud,
                        const KnnConfig& cfg, const LabelMap& labels) {
  cfg.validate();
  cloud.validate();
  if (cloud.empty()) throw Error(ErrorKind::kInsufficientPoints, "labeling needs a non-empty cloud");
  for (ClassId l : occupancy.labels) {
    if (l > 1) throw Error(ErrorKind::kPrecondition, "knn_label expects a boolean occupancy grid");
  }

  std::vector<std::size_t> keep;
  keep.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.labels[i] == kNoiseClass) continue;
    if (!labels.is_valid(cloud.labels[i])) {
      throw Error(ErrorKind::kPrecondition, "point label " + std::to_string(cloud.labels[i]) +
                                                " is not in the label map");
    }
    keep.push_back(i);
  }
  // Canonical point order, so equidistant neighbours at the k-th rank are
  // chosen independently of the input order.
  const auto key = [&](std::size_t i) {
    const Point3& p = cloud.points[i];
    return std::tuple(p.x(), p.y(), p.z(), cloud.labels[i]);
  };
  std::sort(keep.begin(), keep.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  std::vector<Point3> pts;
  std::vector<ClassId> cls;
  pts.reserve(keep.size());
  cls.reserve(keep.size());
  for (std::size_t i : keep) {
    pts.push_back(cloud.points[i]);
    cls.push_back(cloud.labels[i]);
  }

  OccupancyGrid out(occupancy.spec);
  if (pts.empty()) {
    for (std::size_t v = 0; v < out.labels.size(); ++v) {
      if (occupancy.labels[v] != kEmptyClass) out.labels[v] = kNoiseClass;
    }
    return out;
  }

  const KdTree tree(std::move(pts));
  const double r2 = cfg.max_radius ? *cfg.max_radius * *cfg.max_radius
                                   : std::numeric_limits<double>::infinity();
  std::vector<Neighbor> nbrs;
  for (std::size_t v = 0; v < out.labels.size(); ++v) {
    if (occupancy.labels[v] == kEmptyClass) continue;
    tree.knn(voxel_center(out.spec, out.spec.unlinear(v)), cfg.k, nbrs);
    while (!nbrs.empty() && nbrs.back().distance_sq > r2) nbrs.pop_back();
    out.labels[v] = majority_vote(nbrs, cls);
  }
  return out;
}

}  // namespace wildocc
