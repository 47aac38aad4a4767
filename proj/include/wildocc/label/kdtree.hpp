#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wildocc/core/types.hpp"

namespace wildocc {

struct Neighbor {
  std::uint32_t index;
  double distance_sq;

  /// Strict order by distance, ties by point index.
  bool operator<(const Neighbor& o) const {
    return distance_sq < o.distance_sq || (distance_sq == o.distance_sq && index < o.index);
  }
  bool operator==(const Neighbor&) const = default;
};

/// Static 3-d tree for exact Euclidean k-NN. Results are sorted by
/// (distance, point index), so equidistant points resolve deterministically.
class KdTree {
 public:
  static constexpr int kLeafSize = 12;

  /// Throws kInsufficientPoints when `points` is empty.
  explicit KdTree(std::vector<Point3> points);

  std::size_t size() const { return points_.size(); }
  const Point3& point(std::uint32_t i) const { return points_[i]; }

  /// The min(k, size()) nearest points to `query`.
  std::vector<Neighbor> knn(const Point3& query, int k) const;
  /// Same as knn() but writes into `out`, reusing its storage.
  void knn(const Point3& query, int k, std::vector<Neighbor>& out) const;

 private:
  struct Node {
    // Leaves: [begin, end) into order_. Inner: split axis/value and children.
    std::uint32_t begin = 0, end = 0;
    std::int32_t left = -1, right = -1;
    int axis = -1;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Point3& q, std::size_t k,
              std::vector<Neighbor>& heap) const;

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// Index over a labeled cloud. Built from any non-empty cloud.
KdTree build_index(const SemanticPointCloud& cloud);

}  // namespace wildocc
