#include "wildocc/pipeline.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <thread>

#include "wildocc/io/grid_file.hpp"
#include "wildocc/io/ply.hpp"
#include "wildocc/io/poses.hpp"
#include "wildocc/io/scan.hpp"
#include "wildocc/recon/coarse_to_fine.hpp"

namespace wildocc {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(ErrorKind::kConfig, "invalid value `" + value + "` for key `" + key + "`");
}

std::vector<std::string> tokens(const std::string& value) {
  std::string v = value;
  for (char& c : v)
    if (c == ',') c = ' ';
  std::istringstream ss(v);
  std::vector<std::string> out;
  for (std::string t; ss >> t;) out.push_back(t);
  return out;
}

double to_double(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) bad_value(key, s);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, s);
  }
}

int to_int(const std::string& key, const std::string& s) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) bad_value(key, s);
    return v;
  } catch (const std::logic_error&) {
    bad_value(key, s);
  }
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  bad_value(key, s);
}

template <typename T>
std::string str(const T& v) {
  std::ostringstream ss;
  ss.precision(12);
  ss << v;
  return ss.str();
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : " ") + p;
  return out;
}

const std::set<std::string> kManifestKeys = {"poses", "times", "label_map", "frame"};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void PipelineConfig::apply(const io::KeyValueFile& kv, const std::set<std::string>& ignore) {
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"window", [&](auto& k, auto& v) { window = to_int(k, v); }},
      {"window_placement",
       [&](auto& k, auto& v) {
         if (v == "centered") placement = WindowPlacement::kCentered;
         else if (v == "trailing") placement = WindowPlacement::kTrailing;
         else bad_value(k, v);
       }},
      {"window_offset", [&](auto& k, auto& v) { window_offset = to_int(k, v); }},
      {"depth_coarse", [&](auto& k, auto& v) { coarse.depth = to_int(k, v); }},
      {"depth_fine", [&](auto& k, auto& v) { fine.depth = to_int(k, v); }},
      {"cg_max_iters", [&](auto& k, auto& v) { coarse.cg_max_iters = fine.cg_max_iters = to_int(k, v); }},
      {"cg_tol", [&](auto& k, auto& v) { coarse.cg_tol = fine.cg_tol = to_double(k, v); }},
      {"splat_radius", [&](auto& k, auto& v) { coarse.splat_radius = fine.splat_radius = to_double(k, v); }},
      {"density_k", [&](auto& k, auto& v) { coarse.density_k = fine.density_k = to_int(k, v); }},
      {"solver",
       [&](auto& k, auto& v) {
         if (v == "cr") coarse.solver = fine.solver = recon::KrylovMethod::kConjugateResidual;
         else if (v == "cg") coarse.solver = fine.solver = recon::KrylovMethod::kConjugateGradient;
         else bad_value(k, v);
       }},
      {"normals_k", [&](auto& k, auto& v) { normals_k = to_int(k, v); }},
      {"knn_k", [&](auto& k, auto& v) { knn.k = to_int(k, v); }},
      {"knn_max_radius",
       [&](auto& k, auto& v) {
         if (v == "none") knn.max_radius.reset();
         else knn.max_radius = to_double(k, v);
       }},
      {"ground_classes", [&](auto&, auto& v) { ground_classes = tokens(v); }},
      {"fill_below_ground", [&](auto& k, auto& v) { voxelize.fill_below_ground = to_bool(k, v); }},
      {"crop_margin", [&](auto& k, auto& v) { crop_margin = to_double(k, v); }},
      {"keyframes",
       [&](auto& k, auto& v) {
         keyframes.clear();
         for (const auto& t : tokens(v)) keyframes.push_back(to_int(k, t));
       }},
      {"keyframe_stride", [&](auto& k, auto& v) { keyframe_stride = to_int(k, v); }},
      {"jobs", [&](auto& k, auto& v) { jobs = to_int(k, v); }},
      {"dump_intermediate", [&](auto& k, auto& v) { dump_intermediate = to_bool(k, v); }},
      {"strict_n_classes", [&](auto& k, auto& v) { strict_n_classes = to_bool(k, v); }},
      {"grid_origin",
       [&](auto& k, auto& v) {
         const auto t = tokens(v);
         if (t.size() != 3) bad_value(k, v);
         for (int a = 0; a < 3; ++a) grid.origin[a] = to_double(k, t[a]);
       }},
      {"grid_dims",
       [&](auto& k, auto& v) {
         const auto t = tokens(v);
         if (t.size() != 3) bad_value(k, v);
         for (int a = 0; a < 3; ++a) grid.dims[a] = to_int(k, t[a]);
       }},
      {"voxel_size", [&](auto& k, auto& v) { grid.voxel_size = to_double(k, v); }},
      {"lambda", [&](auto& k, auto& v) { loss.lambda = to_double(k, v); }},
      {"distill_sign", [&](auto& k, auto& v) { loss.distill_sign = to_int(k, v); }},
      {"temporal_frames", [&](auto& k, auto& v) { temporal.frames = to_int(k, v); }},
      {"temporal_interval", [&](auto& k, auto& v) { temporal.interval = to_double(k, v); }},
  };
  for (const auto& [key, value] : kv.entries()) {
    if (ignore.count(key)) continue;
    const auto it = setters.find(key);
    if (it == setters.end()) throw Error(ErrorKind::kConfig, "unknown configuration key `" + key + "`");
    it->second(key, value);
  }
}

io::KeyValueFile PipelineConfig::to_key_values() const {
  io::KeyValueFile kv;
  kv.set("window", str(window));
  kv.set("window_placement", placement == WindowPlacement::kCentered ? "centered" : "trailing");
  kv.set("window_offset", str(window_offset));
  kv.set("depth_coarse", str(coarse.depth));
  kv.set("depth_fine", str(fine.depth));
  kv.set("cg_max_iters", str(fine.cg_max_iters));
  kv.set("cg_tol", str(fine.cg_tol));
  kv.set("splat_radius", str(fine.splat_radius));
  kv.set("density_k", str(fine.density_k));
  kv.set("solver", fine.solver == recon::KrylovMethod::kConjugateResidual ? "cr" : "cg");
  kv.set("normals_k", str(normals_k));
  kv.set("knn_k", str(knn.k));
  kv.set("knn_max_radius", knn.max_radius ? str(*knn.max_radius) : "none");
  kv.set("ground_classes", join(ground_classes));
  kv.set("fill_below_ground", voxelize.fill_below_ground ? "true" : "false");
  kv.set("crop_margin", str(crop_margin));
  std::vector<std::string> kf;
  for (int k : keyframes) kf.push_back(str(k));
  kv.set("keyframes", join(kf));
  kv.set("keyframe_stride", str(keyframe_stride));
  kv.set("jobs", str(jobs));
  kv.set("dump_intermediate", dump_intermediate ? "true" : "false");
  kv.set("strict_n_classes", strict_n_classes ? "true" : "false");
  kv.set("grid_origin", str(grid.origin.x()) + " " + str(grid.origin.y()) + " " + str(grid.origin.z()));
  kv.set("grid_dims", str(grid.dims[0]) + " " + str(grid.dims[1]) + " " + str(grid.dims[2]));
  kv.set("voxel_size", str(grid.voxel_size));
  kv.set("lambda", str(loss.lambda));
  kv.set("distill_sign", str(loss.distill_sign));
  kv.set("temporal_frames", str(temporal.frames));
  kv.set("temporal_interval", str(temporal.interval));
  return kv;
}

void PipelineConfig::validate() const {
  grid.validate();
  coarse.validate();
  fine.validate();
  knn.validate();
  loss.validate();
  if (window < 1) throw Error(ErrorKind::kConfig, "window must be at least 1");
  if (coarse.depth > fine.depth) throw Error(ErrorKind::kConfig, "depth_coarse must not exceed depth_fine");
  if (normals_k < 3) throw Error(ErrorKind::kConfig, "normals_k must be at least 3");
  if (!(crop_margin >= 0.0)) throw Error(ErrorKind::kConfig, "crop_margin must be non-negative");
  if (keyframe_stride < 1) throw Error(ErrorKind::kConfig, "keyframe_stride must be at least 1");
  if (jobs < 1) throw Error(ErrorKind::kConfig, "jobs must be at least 1");
  if (temporal.frames < 1 || !(temporal.interval > 0.0))
    throw Error(ErrorKind::kConfig, "temporal window needs frames >= 1 and a positive interval");
}

SequenceManifest SequenceManifest::load(const fs::path& path, const io::KeyValueFile* overrides) {
  const io::KeyValueFile kv = io::KeyValueFile::load(path);
  const fs::path base = path.parent_path();
  SequenceManifest m;
  m.config.apply(kv, kManifestKeys);
  if (overrides) m.config.apply(*overrides);

  if (auto lm = kv.get("label_map")) m.labels = io::read_label_map(base / *lm);
  const auto pose_path = kv.get("poses");
  if (!pose_path) throw Error(ErrorKind::kConfig, path.string() + ": missing `poses` entry");
  m.poses = io::read_poses(base / *pose_path, &m.warnings);
  for (const auto& line : kv.get_all("frame")) {
    const auto t = tokens(line);
    if (t.size() != 2)
      throw Error(ErrorKind::kParse, path.string() + ": `frame` needs a scan path and a label path");
    m.frames.push_back({base / t[0], base / t[1]});
  }
  if (auto times = kv.get("times")) {
    m.timestamps = io::read_timestamps(base / *times);
  } else {
    for (std::size_t i = 0; i < m.frames.size(); ++i) m.timestamps.push_back(0.1 * static_cast<double>(i));
  }
  m.validate();
  return m;
}

void SequenceManifest::validate() const {
  if (frames.empty()) throw Error(ErrorKind::kPairing, "manifest lists no frames");
  if (poses.size() != frames.size())
    throw Error(ErrorKind::kPairing, std::to_string(frames.size()) + " frames but " +
                                         std::to_string(poses.size()) + " poses");
  if (timestamps.size() != frames.size())
    throw Error(ErrorKind::kPairing, std::to_string(frames.size()) + " frames but " +
                                         std::to_string(timestamps.size()) + " timestamps");
  for (std::size_t i = 1; i < timestamps.size(); ++i)
    if (!(timestamps[i] > timestamps[i - 1]))
      throw Error(ErrorKind::kPrecondition, "timestamps must increase strictly");
  for (const auto& f : frames)
    for (const auto& p : {f.cloud, f.labels})
      if (!fs::exists(p)) throw Error(ErrorKind::kIo, "missing file " + p.string());
  config.validate();
}

std::vector<PosedFrame> load_frames(const SequenceManifest& manifest) {
  std::vector<PosedFrame> frames(manifest.frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    frames[i].cloud = io::read_labeled_scan(manifest.frames[i].cloud, manifest.frames[i].labels, manifest.labels);
    frames[i].pose_world = manifest.poses[i];
    frames[i].timestamp = manifest.timestamps[i];
    frames[i].frame_index = static_cast<int>(i);
  }
  return frames;
}

std::vector<int> select_keyframes(int frame_count, const PipelineConfig& cfg) {
  std::vector<int> out;
  if (!cfg.keyframes.empty()) {
    for (int k : cfg.keyframes) {
      window_range(frame_count, k, cfg.window, cfg.placement, cfg.window_offset);  // throws if it does not fit
      out.push_back(k);
    }
    return out;
  }
  for (int k = 0; k < frame_count; ++k) {
    try {
      window_range(frame_count, k, cfg.window, cfg.placement, cfg.window_offset);
    } catch (const Error&) {
      continue;
    }
    out.push_back(k);
  }
  std::vector<int> thinned;
  for (std::size_t i = 0; i < out.size(); i += static_cast<std::size_t>(cfg.keyframe_stride))
    thinned.push_back(out[i]);
  return thinned;
}

LabelMap with_ground_classes(const LabelMap& labels, const std::vector<std::string>& names) {
  std::set<ClassId> ground;
  for (const auto& n : names) {
    try {
      ground.insert(labels.id_of(n));
    } catch (const Error&) {
      throw Error(ErrorKind::kConfig, "ground class `" + n + "` is not in the label map");
    }
  }
  LabelMap out = labels;
  out.set_ground(std::move(ground));
  return out;
}

SemanticPointCloud crop_to_grid(const SemanticPointCloud& cloud, const GridSpec& spec, double margin) {
  const Eigen::Array3d lo = spec.origin.array() - margin;
  const Eigen::Array3d hi = spec.max_corner().array() + margin;
  SemanticPointCloud out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.points[i].array();
    if ((p >= lo).all() && (p <= hi).all()) out.push_back_from(cloud, i);
  }
  return out;
}

std::string keyframe_file_name(int keyframe, const std::string& suffix) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06d", keyframe);
  return buf + suffix;
}

KeyframeResult process_keyframe(const std::vector<PosedFrame>& frames, const LabelMap& labels,
                                const PipelineConfig& cfg, int keyframe,
                                const std::optional<fs::path>& dump_dir) {
  KeyframeResult result;
  result.keyframe = keyframe;
  const bool dump = dump_dir && cfg.dump_intermediate;

  auto stage = [&](const std::string& name, auto&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(name, e);
    } catch (const std::exception& e) {
      throw StageError(name, Error(ErrorKind::kIo, e.what()));
    }
    result.timings.push_back({name, seconds_since(t0)});
  };

  SemanticPointCloud cloud;
  std::map<int, Point3> origins;
  stage("aggregate", [&] {
    const auto [first, last] =
        window_range(static_cast<int>(frames.size()), keyframe, cfg.window, cfg.placement, cfg.window_offset);
    const std::vector<PosedFrame> window(frames.begin() + first, frames.begin() + last);
    const RigidPose world_to_current = frames[keyframe].pose_world.inverse();
    cloud = crop_to_grid(aggregate_window(window, world_to_current, static_cast<int>(window.size())), cfg.grid,
                         cfg.crop_margin);
    origins = sensor_origins(window, world_to_current);
    result.aggregated_points = cloud.size();
    if (dump) io::write_cloud_ply(*dump_dir / keyframe_file_name(keyframe, "_aggregated.ply"), cloud,
                                  io::PlyFormat::kBinaryLittleEndian);
  });

  LabelMap map;
  TriangleMesh mesh;
  stage("reconstruct", [&] {
    map = with_ground_classes(labels, cfg.ground_classes);
    auto rec = recon::coarse_to_fine_reconstruct(cloud, map, cfg.coarse, cfg.fine, cfg.normals_k, origins);
    mesh = std::move(rec.mesh);
    result.warnings = std::move(rec.warnings);
    result.mesh_triangles = mesh.triangles.size();
    if (dump) io::write_mesh_ply(*dump_dir / keyframe_file_name(keyframe, "_mesh.ply"), mesh,
                                 io::PlyFormat::kBinaryLittleEndian);
  });

  OccupancyGrid occupancy;
  stage("voxelize", [&] {
    occupancy = recon::voxelize_mesh(mesh, cfg.grid, cfg.voxelize);
    if (dump) io::write_grid(*dump_dir / keyframe_file_name(keyframe, "_occupancy.wocc"), occupancy);
  });

  stage("label", [&] { result.grid = knn_label(occupancy, cloud, cfg.knn, map); });
  return result;
}

std::vector<KeyframeResult> run_pipeline(const SequenceManifest& manifest, const std::optional<fs::path>& out_dir) {
  std::vector<PosedFrame> frames;
  std::vector<int> keyframes;
  try {
    manifest.validate();
    frames = load_frames(manifest);
    keyframes = select_keyframes(static_cast<int>(frames.size()), manifest.config);
    if (keyframes.empty())
      throw Error(ErrorKind::kPairing, "no keyframe has a complete window of " +
                                           std::to_string(manifest.config.window) + " frames");
    if (out_dir) fs::create_directories(*out_dir);
  } catch (const Error& e) {
    throw StageError("load", e);
  }

  const auto& cfg = manifest.config;
  std::vector<KeyframeResult> results(keyframes.size());
  std::vector<std::exception_ptr> errors(keyframes.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < keyframes.size(); i = next++) {
      try {
        results[i] = process_keyframe(frames, manifest.labels, cfg, keyframes[i], out_dir);
        if (out_dir) {
          const auto t0 = std::chrono::steady_clock::now();
          try {
            io::write_grid(*out_dir / keyframe_file_name(keyframes[i]), results[i].grid);
          } catch (const Error& e) {
            throw StageError("write", e);
          }
          results[i].timings.push_back({"write", seconds_since(t0)});
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int jobs = std::min<int>(cfg.jobs, static_cast<int>(keyframes.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return results;
}

}  // namespace wildocc
