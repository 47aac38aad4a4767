#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <vector>

#include "wildocc/aggregate.hpp"
#include "wildocc/core/grid.hpp"
#include "wildocc/core/label_map.hpp"

namespace wildocc {

/// Parametric surface with a class id. Geometry by kind:
///   plane     horizontal rectangle, a = (x0, y0, z), b = (x1, y1, z)
///   sphere    center a, radius
///   box       closed axis-aligned box [a, b]
///   cylinder  vertical axis through (a.x, a.y) from a.z to b.z, side and
///             top cap (the bottom is open)
struct Primitive {
  enum class Kind { kPlane, kSphere, kBox, kCylinder };

  Kind kind = Kind::kPlane;
  ClassId class_id = 1;
  Point3 a = Point3::Zero();
  Point3 b = Point3::Zero();
  double radius = 0.0;
  /// Relative sampling density per unit area.
  double sample_weight = 1.0;

  static Primitive plane(double x0, double x1, double y0, double y1, double z, ClassId id);
  static Primitive sphere(const Point3& center, double radius, ClassId id);
  static Primitive box(const Point3& lo, const Point3& hi, ClassId id);
  static Primitive cylinder(double cx, double cy, double radius, double z0, double z1, ClassId id);

  double area() const;
  Point3 bounds_min() const;
  Point3 bounds_max() const;
  /// True when the surface meets the closed box [lo, hi].
  bool touches(const Point3& lo, const Point3& hi) const;
  /// Area-uniform surface sample and its outward normal.
  std::pair<Point3, Point3> sample(std::mt19937_64& rng) const;
};

/// Sensor path: `frames` poses evenly spaced on the horizontal circle of
/// `radius` through the origin centered at (radius, 0, 0), each looking at
/// the center. The middle frame has identity pose, so world and keyframe
/// coordinates coincide.
struct Trajectory {
  int frames = 24;
  double radius = 10.0;
  double rate_hz = 10.0;

  int keyframe() const { return frames / 2; }
  RigidPose pose(int i) const;
};

struct SyntheticScene {
  GridSpec spec;
  LabelMap labels = LabelMap::default_map();
  std::vector<Primitive> primitives;  // later entries win shared voxels
  Trajectory trajectory;
  double noise_fraction = 0.0;
  /// Noise points are displaced up to this far from a surface sample.
  double noise_spread = 1.0;

  /// Grass ground plane, a tree sphere and a bush cylinder, 5% noise.
  static SyntheticScene default_scene();
  /// Grass ground plane and a tree sphere, no noise points.
  static SyntheticScene plane_sphere();

  /// Throws kPrecondition if a primitive leaves the grid box or uses a
  /// class the label map does not define.
  void validate() const;
};

struct SyntheticData {
  std::vector<PosedFrame> frames;
  OccupancyGrid gt;
  int keyframe = 0;
};

/// Every voxel whose closed box meets a primitive's surface gets that
/// primitive's class; computed from geometry alone.
OccupancyGrid analytic_ground_truth(const SyntheticScene& scene);

/// Samples `n_points` labeled points (a `noise_fraction` share of them noise)
/// and distributes each surface sample to a random frame whose sensor lies
/// on the outer side of the surface there. `noise_sigma` is isotropic
/// Gaussian jitter in meters. Same seed, same output.
SyntheticData generate_synthetic(const SyntheticScene& scene, std::size_t n_points, double noise_sigma,
                                 std::uint64_t seed);

/// Writes frames as .bin/.label files with RELLIS raw ids, a pose file, a
/// timestamp file, a label map and a manifest (`sequence.manifest`), plus
/// the analytic grid as `gt.wocc`. Returns the manifest path.
std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticScene& scene,
                                              const SyntheticData& data);

}  // namespace wildocc
