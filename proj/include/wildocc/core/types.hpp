#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "wildocc/core/error.hpp"

namespace wildocc {

using ClassId = std::uint8_t;

inline constexpr ClassId kEmptyClass = 0;
inline constexpr ClassId kNoiseClass = 255;

using Point3 = Eigen::Vector3d;
using Index3 = std::array<int, 3>;

/// Labeled point set. `intensity` and `frame_ids` are either empty (absent)
/// or the same length as `points`.
struct SemanticPointCloud {
  std::vector<Point3> points;
  std::vector<ClassId> labels;
  std::vector<float> intensity;
  std::vector<std::int32_t> frame_ids;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_intensity() const { return !intensity.empty(); }
  bool has_frame_ids() const { return !frame_ids.empty(); }

  void reserve(std::size_t n);
  /// Appends point `i` of `other`. Optional channels must agree.
  void push_back_from(const SemanticPointCloud& other, std::size_t i);

  /// Throws kPrecondition if channel lengths disagree or a point is
  /// non-finite.
  void validate() const;
};

struct TriangleMesh {
  std::vector<Point3> vertices;
  std::vector<std::array<std::int32_t, 3>> triangles;

  bool empty() const { return triangles.empty(); }
  void validate() const;
};

/// Plain union: vertices of `b` are re-indexed after those of `a`.
TriangleMesh concat(const TriangleMesh& a, const TriangleMesh& b);

/// Merges vertices closer than `merge_tol` (grid hashing), drops triangles
/// that repeat an index or have area below `min_area`, and removes
/// unreferenced vertices. Vertex order follows first use.
TriangleMesh clean_mesh(const TriangleMesh& mesh, double merge_tol = 1e-7,
                        double min_area = 1e-12);

double triangle_area(const TriangleMesh& mesh, std::size_t t);

}  // namespace wildocc
