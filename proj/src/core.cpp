#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "wildocc/core/error.hpp"
#include "wildocc/core/grid.hpp"
#include "wildocc/core/label_map.hpp"
#include "wildocc/core/pose.hpp"
#include "wildocc/core/types.hpp"

namespace wildocc {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kRange: return "range";
    case ErrorKind::kInvalidPose: return "invalid-pose";
    case ErrorKind::kEmptyInput: return "empty-input";
    case ErrorKind::kInsufficientPoints: return "insufficient-points";
    case ErrorKind::kSolverNotConverged: return "solver-not-converged";
    case ErrorKind::kPrecondition: return "precondition";
    case ErrorKind::kIncompatibleGrid: return "incompatible-grid";
    case ErrorKind::kIncompatibleShape: return "incompatible-shape";
    case ErrorKind::kUndefinedLoss: return "undefined-loss";
    case ErrorKind::kInvalidLoss: return "invalid-loss";
    case ErrorKind::kUndefinedMetric: return "undefined-metric";
    case ErrorKind::kMalformedFile: return "malformed-file";
    case ErrorKind::kPairing: return "pairing";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kFormat: return "format";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kConfig: return "config";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Point clouds and meshes

void SemanticPointCloud::reserve(std::size_t n) {
  points.reserve(n);
  labels.reserve(n);
}

void SemanticPointCloud::push_back_from(const SemanticPointCloud& other, std::size_t i) {
  points.push_back(other.points[i]);
  labels.push_back(other.labels[i]);
  if (other.has_intensity()) intensity.push_back(other.intensity[i]);
  if (other.has_frame_ids()) frame_ids.push_back(other.frame_ids[i]);
}

void SemanticPointCloud::validate() const {
  if (labels.size() != points.size()) {
    throw Error(ErrorKind::kPrecondition, "cloud has " + std::to_string(points.size()) +
                                              " points but " + std::to_string(labels.size()) +
                                              " labels");
  }
  if (has_intensity() && intensity.size() != points.size()) {
    throw Error(ErrorKind::kPrecondition, "intensity length differs from point count");
  }
  if (has_frame_ids() && frame_ids.size() != points.size()) {
    throw Error(ErrorKind::kPrecondition, "frame id length differs from point count");
  }
  for (const auto& p : points) {
    if (!p.allFinite()) throw Error(ErrorKind::kPrecondition, "non-finite point");
  }
}

void TriangleMesh::validate() const {
  const auto n = static_cast<std::int64_t>(vertices.size());
  for (const auto& t : triangles) {
    for (int c = 0; c < 3; ++c) {
      if (t[c] < 0 || t[c] >= n) {
        throw Error(ErrorKind::kPrecondition, "triangle index out of range");
      }
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw Error(ErrorKind::kPrecondition, "triangle repeats a vertex index");
    }
  }
}

TriangleMesh concat(const TriangleMesh& a, const TriangleMesh& b) {
  TriangleMesh out = a;
  const auto offset = static_cast<std::int32_t>(a.vertices.size());
  out.vertices.insert(out.vertices.end(), b.vertices.begin(), b.vertices.end());
  out.triangles.reserve(a.triangles.size() + b.triangles.size());
  for (const auto& t : b.triangles) {
    out.triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
  }
  return out;
}

double triangle_area(const TriangleMesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles[t];
  const Point3& a = mesh.vertices[tri[0]];
  return 0.5 * (mesh.vertices[tri[1]] - a).cross(mesh.vertices[tri[2]] - a).norm();
}

namespace {

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 73856093ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 19349663ULL;
    h ^= static_cast<std::uint64_t>(k.z) * 83492791ULL;
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

TriangleMesh clean_mesh(const TriangleMesh& mesh, double merge_tol, double min_area) {
  // Vertex welding on a hash grid of cell size merge_tol; any two vertices
  // within merge_tol sit in adjacent cells.
  std::unordered_map<CellKey, std::vector<std::int32_t>, CellKeyHash> buckets;
  std::vector<std::int32_t> remap(mesh.vertices.size());
  std::vector<Point3> welded;
  welded.reserve(mesh.vertices.size());
  const double inv = 1.0 / merge_tol;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    const Point3& p = mesh.vertices[v];
    const CellKey key{static_cast<std::int64_t>(std::floor(p.x() * inv)),
                      static_cast<std::int64_t>(std::floor(p.y() * inv)),
                      static_cast<std::int64_t>(std::floor(p.z() * inv))};
    std::int32_t found = -1;
    for (int dx = -1; dx <= 1 && found < 0; ++dx) {
      for (int dy = -1; dy <= 1 && found < 0; ++dy) {
        for (int dz = -1; dz <= 1 && found < 0; ++dz) {
          auto it = buckets.find({key.x + dx, key.y + dy, key.z + dz});
          if (it == buckets.end()) continue;
          for (std::int32_t w : it->second) {
            if ((welded[w] - p).norm() <= merge_tol) {
              found = w;
              break;
            }
          }
        }
      }
    }
    if (found < 0) {
      found = static_cast<std::int32_t>(welded.size());
      welded.push_back(p);
      buckets[key].push_back(found);
    }
    remap[v] = found;
  }

  TriangleMesh out;
  std::vector<std::int32_t> compact(welded.size(), -1);
  for (const auto& t : mesh.triangles) {
    const std::array<std::int32_t, 3> w{remap[t[0]], remap[t[1]], remap[t[2]]};
    if (w[0] == w[1] || w[1] == w[2] || w[0] == w[2]) continue;
    const double area =
        0.5 * (welded[w[1]] - welded[w[0]]).cross(welded[w[2]] - welded[w[0]]).norm();
    if (!(area >= min_area)) continue;
    std::array<std::int32_t, 3> tri{};
    for (int c = 0; c < 3; ++c) {
      if (compact[w[c]] < 0) {
        compact[w[c]] = static_cast<std::int32_t>(out.vertices.size());
        out.vertices.push_back(welded[w[c]]);
      }
      tri[c] = compact[w[c]];
    }
    out.triangles.push_back(tri);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Poses

RigidPose::RigidPose(const Eigen::Matrix4d& m, double tol) : m_(m) {
  if (!m.allFinite()) throw Error(ErrorKind::kInvalidPose, "pose has non-finite entries");
  if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0) {
    throw Error(ErrorKind::kInvalidPose, "pose bottom row must be [0 0 0 1]");
  }
  const Eigen::Matrix3d r = m.topLeftCorner<3, 3>();
  const double ortho_err = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > tol) {
    throw Error(ErrorKind::kInvalidPose,
                "pose rotation is not orthonormal (error " + std::to_string(ortho_err) + ")");
  }
  if (std::abs(r.determinant() - 1.0) > tol) {
    throw Error(ErrorKind::kInvalidPose, "pose rotation has determinant != +1");
  }
}

RigidPose RigidPose::from_rt(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = r;
  m.topRightCorner<3, 1>() = t;
  return RigidPose(m);
}

RigidPose RigidPose::translation(const Eigen::Vector3d& t) {
  return from_rt(Eigen::Matrix3d::Identity(), t);
}

RigidPose RigidPose::yaw(double yaw, const Eigen::Vector3d& t) {
  return from_rt(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix(), t);
}

RigidPose RigidPose::operator*(const RigidPose& other) const {
  // Composition of valid poses is valid up to rounding; skip re-validation.
  return RigidPose(m_ * other.m_, Unchecked{});
}

RigidPose RigidPose::inverse() const {
  Eigen::Matrix4d inv = Eigen::Matrix4d::Identity();
  const Eigen::Matrix3d rt = m_.topLeftCorner<3, 3>().transpose();
  inv.topLeftCorner<3, 3>() = rt;
  inv.topRightCorner<3, 1>() = -rt * m_.topRightCorner<3, 1>();
  return RigidPose(inv, Unchecked{});
}

Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& r) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

// ---------------------------------------------------------------------------
// Grid geometry

void GridSpec::validate() const {
  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0) {
    throw Error(ErrorKind::kPrecondition, "grid dims must be positive");
  }
  if (!(voxel_size > 0.0) || !std::isfinite(voxel_size)) {
    throw Error(ErrorKind::kPrecondition, "voxel size must be positive");
  }
  if (!origin.allFinite()) throw Error(ErrorKind::kPrecondition, "grid origin not finite");
}

Point3 voxel_center(const GridSpec& spec, const Index3& idx) {
  if (!spec.contains(idx)) {
    throw Error(ErrorKind::kRange, "voxel index (" + std::to_string(idx[0]) + "," +
                                       std::to_string(idx[1]) + "," + std::to_string(idx[2]) +
                                       ") outside grid");
  }
  return spec.origin + spec.voxel_size * Point3(idx[0] + 0.5, idx[1] + 0.5, idx[2] + 0.5);
}

Index3 cell_of(const GridSpec& spec, const Point3& p) {
  const Point3 rel = (p - spec.origin) / spec.voxel_size;
  return {static_cast<int>(std::floor(rel.x())), static_cast<int>(std::floor(rel.y())),
          static_cast<int>(std::floor(rel.z()))};
}

std::optional<Index3> voxel_index(const GridSpec& spec, const Point3& p) {
  const Point3 rel = (p - spec.origin) / spec.voxel_size;
  if (!rel.allFinite()) return std::nullopt;
  for (int a = 0; a < 3; ++a) {
    if (rel[a] < 0.0 || rel[a] >= spec.dims[a]) return std::nullopt;
  }
  return Index3{static_cast<int>(std::floor(rel.x())), static_cast<int>(std::floor(rel.y())),
                static_cast<int>(std::floor(rel.z()))};
}

std::size_t OccupancyGrid::count_if_label(ClassId c) const {
  std::size_t n = 0;
  for (auto l : labels) n += l == c;
  return n;
}

std::size_t OccupancyGrid::occupied_count() const {
  std::size_t n = 0;
  for (auto l : labels) n += l != kEmptyClass && l != kNoiseClass;
  return n;
}

// ---------------------------------------------------------------------------
// Label map

LabelMap::LabelMap(std::vector<std::pair<ClassId, std::string>> classes,
                   std::set<ClassId> ground, std::map<std::uint32_t, ClassId> remap)
    : classes_(std::move(classes)), remap_(std::move(remap)) {
  std::sort(classes_.begin(), classes_.end());
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    if (classes_[i].first != static_cast<ClassId>(i + 1)) {
      throw Error(ErrorKind::kConfig, "class ids must be unique and contiguous from 1");
    }
  }
  if (classes_.size() >= kNoiseClass) throw Error(ErrorKind::kConfig, "too many classes");
  for (const auto& [raw, id] : remap_) {
    if (!is_valid(id)) {
      throw Error(ErrorKind::kConfig, "remap of raw id " + std::to_string(raw) +
                                          " targets unknown class " + std::to_string(id));
    }
  }
  set_ground(std::move(ground));
}

void LabelMap::set_ground(std::set<ClassId> ground) {
  for (ClassId g : ground) {
    if (g < 1 || g > num_classes()) {
      throw Error(ErrorKind::kConfig, "ground class " + std::to_string(g) + " is not a class");
    }
  }
  ground_ = std::move(ground);
}

LabelMap LabelMap::default_map() {
  // RELLIS-3D ontology: 3 grass, 4 tree, 19 bush, 31 puddle, 33 mud,
  // 27 barrier, 34 rubble. Everything else is ignored.
  return LabelMap({{1, "grass"},
                   {2, "tree"},
                   {3, "bush"},
                   {4, "puddle"},
                   {5, "mud"},
                   {6, "barrier"},
                   {7, "rubble"}},
                  {1, 4, 5, 7},
                  {{3, 1}, {4, 2}, {19, 3}, {31, 4}, {33, 5}, {27, 6}, {34, 7}});
}

ClassId LabelMap::id_of(const std::string& name) const {
  for (const auto& [id, n] : classes_) {
    if (n == name) return id;
  }
  throw Error(ErrorKind::kConfig, "unknown class name '" + name + "'");
}

const std::string& LabelMap::name_of(ClassId c) const {
  if (c < 1 || c > num_classes()) {
    throw Error(ErrorKind::kRange, "class id " + std::to_string(c) + " not in label map");
  }
  return classes_[c - 1].second;
}

ClassId LabelMap::remap(std::uint32_t raw) const {
  auto it = remap_.find(raw);
  return it == remap_.end() ? kNoiseClass : it->second;
}

}  // namespace wildocc
