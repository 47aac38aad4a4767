#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "wildocc/io/feature_file.hpp"
#include "wildocc/io/grid_file.hpp"
#include "wildocc/io/ply.hpp"
#include "wildocc/io/poses.hpp"
#include "wildocc/io/scan.hpp"
#include "wildocc/metrics.hpp"
#include "wildocc/offmath/encoder.hpp"
#include "wildocc/offmath/fusion.hpp"
#include "wildocc/pipeline.hpp"
#include "wildocc/recon/coarse_to_fine.hpp"
#include "wildocc/synth.hpp"

namespace fs = std::filesystem;
using namespace wildocc;

namespace {

struct ConfigArgs {
  std::string file;
  std::vector<std::string> sets;

  void add_to(CLI::App* app) {
    app->add_option("--config", file, "key = value configuration file")->check(CLI::ExistingFile);
    app->add_option("--set", sets, "configuration override, key=value (repeatable)");
  }

  io::KeyValueFile overrides() const {
    io::KeyValueFile kv;
    if (!file.empty()) kv = io::KeyValueFile::load(file);
    for (const auto& s : sets) {
      const auto parsed = io::KeyValueFile::parse(s, "--set");
      for (const auto& [k, v] : parsed.entries()) kv.set(k, v);
    }
    return kv;
  }

  PipelineConfig config() const {
    PipelineConfig cfg;
    cfg.apply(overrides());
    cfg.validate();
    return cfg;
  }
};

LabelMap load_label_map(const std::string& path) {
  return path.empty() ? LabelMap::default_map() : io::read_label_map(path);
}

io::PlyFormat ply_format(bool ascii) {
  return ascii ? io::PlyFormat::kAscii : io::PlyFormat::kBinaryLittleEndian;
}

RigidPose single_pose(const std::string& path) {
  const auto poses = io::read_poses(path);
  if (poses.size() != 1) throw Error(ErrorKind::kParse, path + ": expected exactly one pose");
  return poses.front();
}

void print_scalar(const std::string& key, double v) { std::printf("%s=%.17g\n", key.c_str(), v); }

// Text weights: c_out c_in, then kernel [o][i][dx][dy][dz], bias, BN mean,
// var, gamma, beta (c_out each) and optionally eps.
offmath::ConvBNReluWeights<double> read_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  int c_out = 0, c_in = 0;
  if (!(in >> c_out >> c_in)) throw Error(ErrorKind::kParse, path + ": missing channel counts");
  offmath::ConvBNReluWeights<double> w(c_out, c_in);
  auto fill = [&](std::vector<double>& v) {
    for (double& x : v)
      if (!(in >> x)) throw Error(ErrorKind::kParse, path + ": too few weight values");
  };
  fill(w.kernel);
  fill(w.bias);
  fill(w.bn_mean);
  fill(w.bn_var);
  fill(w.bn_gamma);
  fill(w.bn_beta);
  double eps;
  if (in >> eps) w.eps = eps;
  return w;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic occupancy label generation from posed, labeled LiDAR sequences"};
  app.require_subcommand(1);
  std::string stage = "cli";

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic sequence with analytic ground truth");
  std::string synth_out, synth_scene = "default";
  std::size_t synth_points = 200000;
  double synth_noise = 0.01;
  std::uint64_t synth_seed = 1;
  int synth_frames = 24;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--scene", synth_scene, "default | plane-sphere")->check(CLI::IsMember({"default", "plane-sphere"}));
  synth->add_option("--points", synth_points, "total points including noise");
  synth->add_option("--noise", synth_noise, "Gaussian position jitter (m)");
  synth->add_option("--seed", synth_seed, "random seed");
  synth->add_option("--frames", synth_frames, "trajectory length");

  // aggregate
  auto* aggregate = app.add_subcommand("aggregate", "stitch a keyframe's window into one labeled cloud");
  std::string agg_manifest, agg_out;
  int agg_keyframe = -1;
  bool agg_ascii = false, agg_crop = false;
  ConfigArgs agg_cfg;
  aggregate->add_option("--manifest", agg_manifest)->required()->check(CLI::ExistingFile);
  aggregate->add_option("--keyframe", agg_keyframe, "frame index (default: first valid)");
  aggregate->add_option("--out", agg_out, "output PLY with a label property")->required();
  aggregate->add_flag("--ascii", agg_ascii);
  aggregate->add_flag("--crop", agg_crop, "drop points beyond the grid box plus crop_margin");
  agg_cfg.add_to(aggregate);

  // reconstruct
  auto* reconstruct = app.add_subcommand("reconstruct", "coarse-to-fine surface reconstruction of a labeled cloud");
  std::string rec_in, rec_out, rec_labels;
  bool rec_ascii = false;
  ConfigArgs rec_cfg;
  reconstruct->add_option("--cloud", rec_in, "PLY points with labels (ego frame, sensor at origin)")
      ->required()
      ->check(CLI::ExistingFile);
  reconstruct->add_option("--out", rec_out, "output mesh PLY")->required();
  reconstruct->add_option("--label-map", rec_labels)->check(CLI::ExistingFile);
  reconstruct->add_flag("--ascii", rec_ascii);
  rec_cfg.add_to(reconstruct);

  // voxelize
  auto* voxelize = app.add_subcommand("voxelize", "mark grid voxels intersected by a mesh");
  std::string vox_in, vox_out;
  ConfigArgs vox_cfg;
  voxelize->add_option("--mesh", vox_in)->required()->check(CLI::ExistingFile);
  voxelize->add_option("--out", vox_out, "boolean WOCC grid")->required();
  vox_cfg.add_to(voxelize);

  // label
  auto* label = app.add_subcommand("label", "k-NN semantic labeling of an occupancy grid");
  std::string lab_occ, lab_cloud, lab_out, lab_labels;
  ConfigArgs lab_cfg;
  label->add_option("--occupancy", lab_occ, "boolean WOCC grid")->required()->check(CLI::ExistingFile);
  label->add_option("--cloud", lab_cloud, "PLY points with labels")->required()->check(CLI::ExistingFile);
  label->add_option("--out", lab_out)->required();
  label->add_option("--label-map", lab_labels)->check(CLI::ExistingFile);
  lab_cfg.add_to(label);

  // pipeline
  auto* pipeline = app.add_subcommand("pipeline", "run every stage for each keyframe of a sequence");
  std::string pipe_manifest, pipe_out;
  int pipe_jobs = 0;
  bool pipe_dump = false;
  ConfigArgs pipe_cfg;
  pipeline->add_option("--manifest", pipe_manifest)->required()->check(CLI::ExistingFile);
  pipeline->add_option("--out", pipe_out, "output directory for <keyframe>.wocc")->required();
  pipeline->add_option("--jobs", pipe_jobs, "worker threads");
  pipeline->add_flag("--dump", pipe_dump, "also write aggregated cloud, mesh and boolean grid");
  pipe_cfg.add_to(pipeline);

  // eval
  auto* eval = app.add_subcommand("eval", "IoU and mIoU of a predicted grid against ground truth");
  std::string ev_pred, ev_gt, ev_labels, ev_json;
  bool ev_strict = false;
  eval->add_option("--pred", ev_pred)->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", ev_gt)->required()->check(CLI::ExistingFile);
  eval->add_option("--label-map", ev_labels)->check(CLI::ExistingFile);
  eval->add_option("--json", ev_json, "also write a JSON report");
  eval->add_flag("--strict", ev_strict, "average over all classes, absent ones counting as 0");

  // kernels
  auto* kernels = app.add_subcommand("kernels", "offmath operators on dumped feature volumes");
  kernels->require_subcommand(1);
  std::string k_in, k_out, k_pose_src, k_pose_tgt, k_cam, k_lidar, k_weight, k_gt, k_weights, k_logits;
  std::vector<std::string> k_inputs, k_poses;
  double k_lambda = 0.8;
  int k_sign = -1;
  auto* k_align = kernels->add_subcommand("align", "re-express a volume in the target frame");
  k_align->add_option("--input", k_in)->required()->check(CLI::ExistingFile);
  k_align->add_option("--pose-src", k_pose_src)->required()->check(CLI::ExistingFile);
  k_align->add_option("--pose-tgt", k_pose_tgt)->required()->check(CLI::ExistingFile);
  k_align->add_option("--out", k_out)->required();
  auto* k_concat = kernels->add_subcommand("concat", "align past volumes to the last one and concatenate");
  k_concat->add_option("--inputs", k_inputs)->required()->check(CLI::ExistingFile);
  k_concat->add_option("--poses", k_poses, "one pose file per input")->required()->check(CLI::ExistingFile);
  k_concat->add_option("--out", k_out)->required();
  auto* k_fuse = kernels->add_subcommand("fuse", "sigmoid-gated fusion");
  k_fuse->add_option("--camera", k_cam)->required()->check(CLI::ExistingFile);
  k_fuse->add_option("--lidar", k_lidar)->required()->check(CLI::ExistingFile);
  k_fuse->add_option("--weight", k_weight)->required()->check(CLI::ExistingFile);
  k_fuse->add_option("--out", k_out)->required();
  auto* k_encode = kernels->add_subcommand("encode", "3x3x3 convolution, batch norm and ReLU");
  k_encode->add_option("--input", k_in)->required()->check(CLI::ExistingFile);
  k_encode->add_option("--weights", k_weights, "text weight file")->required()->check(CLI::ExistingFile);
  k_encode->add_option("--out", k_out)->required();
  auto* k_distill = kernels->add_subcommand("distill", "masked cosine distillation loss");
  k_distill->add_option("--camera", k_cam)->required()->check(CLI::ExistingFile);
  k_distill->add_option("--lidar", k_lidar)->required()->check(CLI::ExistingFile);
  k_distill->add_option("--gt", k_gt, "WOCC grid defining the mask")->required()->check(CLI::ExistingFile);
  k_distill->add_option("--lambda", k_lambda);
  k_distill->add_option("--sign", k_sign);
  auto* k_ce = kernels->add_subcommand("ce", "voxel cross-entropy");
  k_ce->add_option("--logits", k_logits)->required()->check(CLI::ExistingFile);
  k_ce->add_option("--gt", k_gt)->required()->check(CLI::ExistingFile);
  auto* k_random = kernels->add_subcommand("random", "uniformly random volume on the configured grid");
  int k_channels = 1;
  std::uint64_t k_seed = 1;
  double k_lo = -1.0, k_hi = 1.0;
  ConfigArgs k_cfg;
  k_random->add_option("--channels", k_channels)->check(CLI::PositiveNumber);
  k_random->add_option("--seed", k_seed);
  k_random->add_option("--min", k_lo);
  k_random->add_option("--max", k_hi);
  k_random->add_option("--out", k_out)->required();
  k_cfg.add_to(k_random);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      stage = "synth";
      SyntheticScene scene = synth_scene == "default" ? SyntheticScene::default_scene() : SyntheticScene::plane_sphere();
      scene.trajectory.frames = synth_frames;
      const SyntheticData data = generate_synthetic(scene, synth_points, synth_noise, synth_seed);
      const fs::path manifest = write_synthetic_dataset(synth_out, scene, data);
      std::size_t n = 0;
      for (const auto& f : data.frames) n += f.cloud.size();
      std::printf("frames=%zu points=%zu keyframe=%d\nmanifest=%s\ngt=%s\n", data.frames.size(), n, data.keyframe,
                  manifest.string().c_str(), (fs::path(synth_out) / "gt.wocc").string().c_str());
    } else if (aggregate->parsed()) {
      stage = "aggregate";
      const auto kv = agg_cfg.overrides();
      const SequenceManifest m = SequenceManifest::load(agg_manifest, &kv);
      const auto frames = load_frames(m);
      const int kf = agg_keyframe >= 0 ? agg_keyframe : select_keyframes(static_cast<int>(frames.size()), m.config).at(0);
      const auto [first, last] =
          window_range(static_cast<int>(frames.size()), kf, m.config.window, m.config.placement, m.config.window_offset);
      const std::vector<PosedFrame> window(frames.begin() + first, frames.begin() + last);
      SemanticPointCloud cloud = aggregate_window(window, frames[kf].pose_world.inverse(), static_cast<int>(window.size()));
      if (agg_crop) cloud = crop_to_grid(cloud, m.config.grid, m.config.crop_margin);
      io::write_cloud_ply(agg_out, cloud, ply_format(agg_ascii));
      std::printf("keyframe=%d frames=%d points=%zu\n", kf, last - first, cloud.size());
    } else if (reconstruct->parsed()) {
      stage = "reconstruct";
      const PipelineConfig cfg = rec_cfg.config();
      const LabelMap map = with_ground_classes(load_label_map(rec_labels), cfg.ground_classes);
      const SemanticPointCloud cloud = io::read_cloud_ply(rec_in);
      const auto rec = recon::coarse_to_fine_reconstruct(cloud, map, cfg.coarse, cfg.fine, cfg.normals_k, {});
      for (const auto& w : rec.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      io::write_mesh_ply(rec_out, rec.mesh, ply_format(rec_ascii));
      std::printf("vertices=%zu triangles=%zu ground_triangles=%zu non_ground_triangles=%zu\n",
                  rec.mesh.vertices.size(), rec.mesh.triangles.size(), rec.ground.triangles.size(),
                  rec.non_ground.triangles.size());
    } else if (voxelize->parsed()) {
      stage = "voxelize";
      const PipelineConfig cfg = vox_cfg.config();
      const OccupancyGrid occ = recon::voxelize_mesh(io::read_mesh_ply(vox_in), cfg.grid, cfg.voxelize);
      io::write_grid(vox_out, occ);
      std::printf("occupied=%zu\n", occ.occupied_count());
    } else if (label->parsed()) {
      stage = "label";
      const PipelineConfig cfg = lab_cfg.config();
      const LabelMap map = load_label_map(lab_labels);
      const OccupancyGrid grid = knn_label(io::read_grid(lab_occ), io::read_cloud_ply(lab_cloud), cfg.knn, map);
      io::write_grid(lab_out, grid);
      for (const auto& [id, name] : map.classes())
        std::printf("voxels_%s=%zu\n", name.c_str(), grid.count_if_label(id));
    } else if (pipeline->parsed()) {
      stage = "pipeline";
      io::KeyValueFile kv = pipe_cfg.overrides();
      if (pipe_jobs > 0) kv.set("jobs", std::to_string(pipe_jobs));
      if (pipe_dump) kv.set("dump_intermediate", "true");
      SequenceManifest m;
      try {
        m = SequenceManifest::load(pipe_manifest, &kv);
      } catch (const Error& e) {
        throw StageError("load", e);
      }
      for (const auto& w : m.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      const auto results = run_pipeline(m, fs::path(pipe_out));
      for (const auto& r : results) {
        std::printf("keyframe=%d points=%zu triangles=%zu occupied=%zu", r.keyframe, r.aggregated_points,
                    r.mesh_triangles, r.grid.occupied_count());
        for (const auto& t : r.timings) std::printf(" %s_s=%.3f", t.stage.c_str(), t.seconds);
        std::printf(" out=%s\n", (fs::path(pipe_out) / keyframe_file_name(r.keyframe)).string().c_str());
        for (const auto& w : r.warnings) std::fprintf(stderr, "warning: keyframe %d: %s\n", r.keyframe, w.c_str());
      }
    } else if (eval->parsed()) {
      stage = "eval";
      const MetricsReport rep = evaluate(io::read_grid(ev_pred), io::read_grid(ev_gt), load_label_map(ev_labels), ev_strict);
      std::fputs(to_key_value(rep).c_str(), stdout);
      if (!ev_json.empty()) io::atomic_write(ev_json, to_json(rep));
    } else if (kernels->parsed()) {
      stage = "kernels";
      if (k_align->parsed()) {
        const auto out = offmath::align_volume(io::read_feature_volume(k_in), single_pose(k_pose_src), single_pose(k_pose_tgt));
        io::write_feature_volume(k_out, out);
      } else if (k_concat->parsed()) {
        if (k_inputs.size() != k_poses.size())
          throw Error(ErrorKind::kPairing, "need one pose per input volume");
        std::vector<FeatureVolume> vols;
        std::vector<RigidPose> poses;
        for (std::size_t i = 0; i < k_inputs.size(); ++i) {
          vols.push_back(io::read_feature_volume(k_inputs[i]));
          poses.push_back(single_pose(k_poses[i]));
        }
        io::write_feature_volume(k_out, offmath::align_and_concat<double>(vols, poses));
      } else if (k_fuse->parsed()) {
        io::write_feature_volume(k_out, offmath::adaptive_fuse(io::read_feature_volume(k_cam), io::read_feature_volume(k_lidar),
                                                               io::read_feature_volume(k_weight)));
      } else if (k_encode->parsed()) {
        io::write_feature_volume(k_out, offmath::voxel_encoder_forward(io::read_feature_volume(k_in), read_weights(k_weights)));
      } else if (k_distill->parsed()) {
        offmath::LossConfig cfg;
        cfg.lambda = k_lambda;
        cfg.distill_sign = k_sign;
        const auto fi = io::read_feature_volume(k_cam), fl = io::read_feature_volume(k_lidar);
        const auto mask = offmath::occupancy_mask(io::read_grid(k_gt));
        print_scalar("distill_raw", offmath::distill_loss_raw(fi, fl, mask));
        print_scalar("distill", offmath::distill_loss(fi, fl, mask, cfg));
        print_scalar("masked_voxels", static_cast<double>(mask.count()));
      } else if (k_ce->parsed()) {
        print_scalar("cross_entropy", offmath::cross_entropy_loss(io::read_feature_volume(k_logits), io::read_grid(k_gt)));
      } else if (k_random->parsed()) {
        if (!(k_lo < k_hi)) throw Error(ErrorKind::kConfig, "--min must be below --max");
        FeatureVolume v(k_cfg.config().grid, k_channels);
        std::mt19937_64 rng(k_seed);
        std::uniform_real_distribution<double> u(k_lo, k_hi);
        for (double& x : v.storage()) x = u(rng);
        io::write_feature_volume(k_out, v);
      }
    }
  } catch (const StageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: [%s] %s (%s)\n", stage.c_str(), e.what(), std::string(to_string(e.kind())).c_str());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: [%s] %s\n", stage.c_str(), e.what());
    return 1;
  }
  return 0;
}
