#include "wildocc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "wildocc/io/grid_file.hpp"
#include "wildocc/io/poses.hpp"
#include "wildocc/io/scan.hpp"

namespace wildocc {

namespace {

constexpr double kPi = std::numbers::pi;

double clampd(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

// Nearest and farthest distance from `p` to the closed box, per axis set.
template <int N>
std::pair<double, double> box_distance_range(const Point3& p, const Point3& lo, const Point3& hi) {
  double near2 = 0.0, far2 = 0.0;
  for (int a = 0; a < N; ++a) {
    const double d = p[a] - clampd(p[a], lo[a], hi[a]);
    near2 += d * d;
    const double f = std::max(std::abs(p[a] - lo[a]), std::abs(p[a] - hi[a]));
    far2 += f * f;
  }
  return {std::sqrt(near2), std::sqrt(far2)};
}

bool overlap(double lo0, double hi0, double lo1, double hi1) { return lo0 <= hi1 && lo1 <= hi0; }

}  // namespace

Primitive Primitive::plane(double x0, double x1, double y0, double y1, double z, ClassId id) {
  Primitive p;
  p.kind = Kind::kPlane;
  p.class_id = id;
  p.a = Point3(std::min(x0, x1), std::min(y0, y1), z);
  p.b = Point3(std::max(x0, x1), std::max(y0, y1), z);
  return p;
}

Primitive Primitive::sphere(const Point3& center, double radius, ClassId id) {
  Primitive p;
  p.kind = Kind::kSphere;
  p.class_id = id;
  p.a = p.b = center;
  p.radius = radius;
  return p;
}

Primitive Primitive::box(const Point3& lo, const Point3& hi, ClassId id) {
  Primitive p;
  p.kind = Kind::kBox;
  p.class_id = id;
  p.a = lo.cwiseMin(hi);
  p.b = lo.cwiseMax(hi);
  return p;
}

Primitive Primitive::cylinder(double cx, double cy, double radius, double z0, double z1, ClassId id) {
  Primitive p;
  p.kind = Kind::kCylinder;
  p.class_id = id;
  p.a = Point3(cx, cy, std::min(z0, z1));
  p.b = Point3(cx, cy, std::max(z0, z1));
  p.radius = radius;
  return p;
}

double Primitive::area() const {
  const Point3 d = b - a;
  switch (kind) {
    case Kind::kPlane: return d.x() * d.y();
    case Kind::kSphere: return 4.0 * kPi * radius * radius;
    case Kind::kBox: return 2.0 * (d.x() * d.y() + d.y() * d.z() + d.x() * d.z());
    case Kind::kCylinder: return 2.0 * kPi * radius * d.z() + kPi * radius * radius;
  }
  return 0.0;
}

Point3 Primitive::bounds_min() const {
  switch (kind) {
    case Kind::kSphere: return a - Point3::Constant(radius);
    case Kind::kCylinder: return Point3(a.x() - radius, a.y() - radius, a.z());
    default: return a;
  }
}

Point3 Primitive::bounds_max() const {
  switch (kind) {
    case Kind::kSphere: return a + Point3::Constant(radius);
    case Kind::kCylinder: return Point3(b.x() + radius, b.y() + radius, b.z());
    default: return b;
  }
}

bool Primitive::touches(const Point3& lo, const Point3& hi) const {
  switch (kind) {
    case Kind::kPlane:
      return lo.z() <= a.z() && a.z() <= hi.z() && overlap(lo.x(), hi.x(), a.x(), b.x()) &&
             overlap(lo.y(), hi.y(), a.y(), b.y());
    case Kind::kSphere: {
      const auto [n, f] = box_distance_range<3>(a, lo, hi);
      return n <= radius && radius <= f;
    }
    case Kind::kBox: {
      for (int k = 0; k < 3; ++k)
        if (!overlap(lo[k], hi[k], a[k], b[k])) return false;
      // Touching the solid but not the boundary means strictly inside.
      bool inside = true;
      for (int k = 0; k < 3; ++k) inside = inside && lo[k] > a[k] && hi[k] < b[k];
      return !inside;
    }
    case Kind::kCylinder: {
      const auto [n, f] = box_distance_range<2>(a, lo, hi);
      const bool side = overlap(lo.z(), hi.z(), a.z(), b.z()) && n <= radius && radius <= f;
      const bool cap = lo.z() <= b.z() && b.z() <= hi.z() && n <= radius;
      return side || cap;
    }
  }
  return false;
}

std::pair<Point3, Point3> Primitive::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  switch (kind) {
    case Kind::kPlane:
      return {Point3(a.x() + u(rng) * (b.x() - a.x()), a.y() + u(rng) * (b.y() - a.y()), a.z()), Point3::UnitZ()};
    case Kind::kSphere: {
      const double z = 2.0 * u(rng) - 1.0, phi = 2.0 * kPi * u(rng);
      const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      const Point3 n(s * std::cos(phi), s * std::sin(phi), z);
      return {a + radius * n, n};
    }
    case Kind::kBox: {
      const Point3 d = b - a;
      const double areas[3] = {d.y() * d.z(), d.x() * d.z(), d.x() * d.y()};
      double pick = u(rng) * 2.0 * (areas[0] + areas[1] + areas[2]);
      int axis = 0;
      bool upper = false;
      for (int k = 0; k < 6; ++k) {
        if (pick < areas[k / 2] || k == 5) {
          axis = k / 2;
          upper = k % 2 == 1;
          break;
        }
        pick -= areas[k / 2];
      }
      Point3 p(a.x() + u(rng) * d.x(), a.y() + u(rng) * d.y(), a.z() + u(rng) * d.z());
      p[axis] = upper ? b[axis] : a[axis];
      Point3 n = Point3::Zero();
      n[axis] = upper ? 1.0 : -1.0;
      return {p, n};
    }
    case Kind::kCylinder: {
      const double h = b.z() - a.z();
      const double side = 2.0 * kPi * radius * h;
      const double phi = 2.0 * kPi * u(rng);
      const Point3 radial(std::cos(phi), std::sin(phi), 0.0);
      if (u(rng) * (side + kPi * radius * radius) < side)
        return {Point3(a.x(), a.y(), a.z() + u(rng) * h) + radius * radial, radial};
      const double r = radius * std::sqrt(u(rng));
      return {Point3(a.x(), a.y(), b.z()) + r * radial, Point3::UnitZ()};
    }
  }
  return {a, Point3::UnitZ()};
}

RigidPose Trajectory::pose(int i) const {
  const double phi = 2.0 * kPi * (i - keyframe()) / frames;
  // Circle point at angle pi + phi about the center, heading toward it.
  return RigidPose::yaw(phi, Point3(radius * (1.0 - std::cos(phi)), -radius * std::sin(phi), 0.0));
}

SyntheticScene SyntheticScene::default_scene() {
  SyntheticScene s;
  const LabelMap& m = s.labels;
  s.primitives.push_back(Primitive::plane(0.0, 20.0, -10.0, 10.0, -1.5, m.id_of("grass")));
  Primitive tree = Primitive::sphere(Point3(11.0, 2.5, 1.0), 1.5, m.id_of("tree"));
  tree.sample_weight = 20.0;
  Primitive bush = Primitive::cylinder(7.0, -3.0, 0.8, -1.5, -0.3, m.id_of("bush"));
  bush.sample_weight = 20.0;
  s.primitives.push_back(tree);
  s.primitives.push_back(bush);
  s.noise_fraction = 0.05;
  return s;
}

SyntheticScene SyntheticScene::plane_sphere() {
  SyntheticScene s;
  const LabelMap& m = s.labels;
  s.primitives.push_back(Primitive::plane(0.0, 20.0, -10.0, 10.0, -1.5, m.id_of("grass")));
  Primitive tree = Primitive::sphere(Point3(11.0, 2.5, 1.0), 1.5, m.id_of("tree"));
  tree.sample_weight = 20.0;
  s.primitives.push_back(tree);
  return s;
}

void SyntheticScene::validate() const {
  spec.validate();
  if (trajectory.frames < 1 || !(trajectory.rate_hz > 0.0))
    throw Error(ErrorKind::kPrecondition, "trajectory needs at least one frame and a positive rate");
  if (noise_fraction < 0.0 || noise_fraction >= 1.0)
    throw Error(ErrorKind::kPrecondition, "noise_fraction must be in [0, 1)");
  const Point3 lo = spec.origin, hi = spec.max_corner();
  constexpr double eps = 1e-9;
  for (const auto& p : primitives) {
    if (p.class_id == kEmptyClass || p.class_id == kNoiseClass || !labels.is_valid(p.class_id))
      throw Error(ErrorKind::kPrecondition, "primitive class " + std::to_string(p.class_id) + " is not defined");
    if ((p.bounds_min().array() < lo.array() - eps).any() || (p.bounds_max().array() > hi.array() + eps).any())
      throw Error(ErrorKind::kPrecondition, "primitive extends outside the grid range");
    if (p.area() <= 0.0 || !(p.sample_weight > 0.0))
      throw Error(ErrorKind::kPrecondition, "degenerate primitive");
  }
}

OccupancyGrid analytic_ground_truth(const SyntheticScene& scene) {
  scene.validate();
  OccupancyGrid gt(scene.spec);
  const double s = scene.spec.voxel_size;
  for (const auto& prim : scene.primitives) {
    // Only voxels overlapping the primitive's bounds can be touched.
    Index3 first, last;
    for (int a = 0; a < 3; ++a) {
      first[a] = std::max(0, static_cast<int>(std::floor((prim.bounds_min()[a] - scene.spec.origin[a]) / s)) - 1);
      last[a] = std::min(scene.spec.dims[a] - 1,
                         static_cast<int>(std::floor((prim.bounds_max()[a] - scene.spec.origin[a]) / s)) + 1);
    }
    for (int i = first[0]; i <= last[0]; ++i)
      for (int j = first[1]; j <= last[1]; ++j)
        for (int k = first[2]; k <= last[2]; ++k) {
          const Point3 lo = scene.spec.origin + s * Point3(i, j, k);
          const Point3 hi = scene.spec.origin + s * Point3(i + 1, j + 1, k + 1);
          if (prim.touches(lo, hi)) gt.at({i, j, k}) = prim.class_id;
        }
  }
  return gt;
}

SyntheticData generate_synthetic(const SyntheticScene& scene, std::size_t n_points, double noise_sigma,
                                 std::uint64_t seed) {
  scene.validate();
  if (noise_sigma < 0.0) throw Error(ErrorKind::kPrecondition, "noise_sigma must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const Trajectory& traj = scene.trajectory;
  SyntheticData out;
  out.keyframe = traj.keyframe();
  std::vector<RigidPose> to_ego;
  std::vector<Point3> sensors;
  for (int f = 0; f < traj.frames; ++f) {
    PosedFrame frame;
    frame.pose_world = traj.pose(f);
    frame.timestamp = f / traj.rate_hz;
    frame.frame_index = f;
    sensors.push_back(frame.pose_world.translation());
    to_ego.push_back(frame.pose_world.inverse());
    out.frames.push_back(std::move(frame));
  }

  auto emit = [&](int f, const Point3& world, ClassId label) {
    Point3 p = world;
    if (noise_sigma > 0.0) p += noise_sigma * Point3(gauss(rng), gauss(rng), gauss(rng));
    auto& cloud = out.frames[f].cloud;
    cloud.points.push_back(to_ego[f].apply(p));
    cloud.labels.push_back(label);
  };

  const auto n_noise = static_cast<std::size_t>(std::llround(scene.noise_fraction * n_points));
  const std::size_t n_surface = n_points - n_noise;
  double total = 0.0;
  for (const auto& p : scene.primitives) total += p.area() * p.sample_weight;

  std::vector<Point3> surface;
  std::vector<int> visible;
  for (const auto& prim : scene.primitives) {
    const auto count = static_cast<std::size_t>(std::llround(n_surface * prim.area() * prim.sample_weight / total));
    for (std::size_t n = 0; n < count; ++n) {
      const auto [p, normal] = prim.sample(rng);
      visible.clear();
      for (int f = 0; f < traj.frames; ++f)
        if (normal.dot(sensors[f] - p) > 0.0) visible.push_back(f);
      if (visible.empty()) continue;
      const int f = visible[std::min<std::size_t>(visible.size() - 1, static_cast<std::size_t>(u(rng) * visible.size()))];
      emit(f, p, prim.class_id);
      surface.push_back(p);
    }
  }
  for (std::size_t n = 0; n < n_noise && !surface.empty(); ++n) {
    const Point3& anchor = surface[std::min(surface.size() - 1, static_cast<std::size_t>(u(rng) * surface.size()))];
    Point3 dir(gauss(rng), gauss(rng), gauss(rng));
    dir.normalize();
    const double r = scene.noise_spread * std::cbrt(u(rng));
    const int f = std::min(traj.frames - 1, static_cast<int>(u(rng) * traj.frames));
    emit(f, anchor + r * dir, kNoiseClass);
  }

  out.gt = analytic_ground_truth(scene);
  return out;
}

std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir, const SyntheticScene& scene,
                                              const SyntheticData& data) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  // Class id back to the smallest raw id mapping onto it; noise goes to a
  // raw id the map leaves unmapped.
  std::map<ClassId, std::uint32_t> raw_of;
  for (const auto& [raw, id] : scene.labels.remap_table())
    if (!raw_of.count(id)) raw_of[id] = raw;
  std::uint32_t unmapped = 0;
  while (scene.labels.remap(unmapped) != kNoiseClass) ++unmapped;

  std::ostringstream manifest;
  manifest << "# synthetic sequence, keyframe " << data.keyframe << "\n";
  manifest << "label_map = label_map.txt\nposes = poses.txt\ntimes = times.txt\n";
  manifest << "grid_origin = " << scene.spec.origin.x() << ' ' << scene.spec.origin.y() << ' '
           << scene.spec.origin.z() << "\n";
  manifest << "grid_dims = " << scene.spec.dims[0] << ' ' << scene.spec.dims[1] << ' ' << scene.spec.dims[2] << "\n";
  manifest << "voxel_size = " << scene.spec.voxel_size << "\n";
  manifest << "window = " << data.frames.size() << "\n";

  std::vector<RigidPose> poses;
  std::ostringstream times;
  times.precision(17);
  for (const auto& f : data.frames) {
    char name[32];
    std::snprintf(name, sizeof name, "%06d", f.frame_index);
    io::write_point_bin(dir / (std::string(name) + ".bin"), f.cloud);
    std::vector<std::uint32_t> raw(f.cloud.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      const auto it = raw_of.find(f.cloud.labels[i]);
      raw[i] = it == raw_of.end() ? unmapped : it->second;
    }
    io::write_raw_labels(dir / (std::string(name) + ".label"), raw);
    manifest << "frame = " << name << ".bin " << name << ".label\n";
    poses.push_back(f.pose_world);
    times << f.timestamp << "\n";
  }
  io::atomic_write(dir / "poses.txt", io::format_poses(poses));
  io::atomic_write(dir / "times.txt", times.str());
  io::write_label_map(dir / "label_map.txt", scene.labels);
  io::write_grid(dir / "gt.wocc", data.gt);
  const fs::path path = dir / "sequence.manifest";
  io::atomic_write(path, manifest.str());
  return path;
}

}  // namespace wildocc
