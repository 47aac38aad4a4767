#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wildocc/aggregate.hpp"
#include "wildocc/core/grid.hpp"
#include "wildocc/core/label_map.hpp"
#include "wildocc/io/key_value.hpp"
#include "wildocc/label/knn_label.hpp"
#include "wildocc/offmath/align.hpp"
#include "wildocc/offmath/losses.hpp"
#include "wildocc/recon/poisson.hpp"
#include "wildocc/recon/voxelize.hpp"

namespace wildocc {

/// Every tunable of the label-generation pipeline. Field defaults are the
/// desk-scale settings; see README for the key=value names.
struct PipelineConfig {
  GridSpec grid;
  int window = 400;
  WindowPlacement placement = WindowPlacement::kCentered;
  int window_offset = 0;
  recon::PoissonConfig coarse = with_depth(6);
  recon::PoissonConfig fine = with_depth(8);
  int normals_k = 16;
  KnnConfig knn;
  std::vector<std::string> ground_classes{"grass", "puddle", "mud", "rubble"};
  recon::VoxelizeOptions voxelize;
  /// Reconstruction and labeling only see points within this distance of
  /// the grid box.
  double crop_margin = 2.0;
  /// Explicit keyframes; empty means every valid one, thinned by the stride.
  std::vector<int> keyframes;
  int keyframe_stride = 1;
  int jobs = 1;
  bool dump_intermediate = false;
  bool strict_n_classes = false;
  offmath::LossConfig loss;
  offmath::TemporalWindowConfig temporal;

  static recon::PoissonConfig with_depth(int depth) {
    recon::PoissonConfig c;
    c.depth = depth;
    return c;
  }

  /// Overrides fields from recognised keys. Unknown keys throw kConfig
  /// unless listed in `ignore`.
  void apply(const io::KeyValueFile& kv, const std::set<std::string>& ignore = {});
  io::KeyValueFile to_key_values() const;
  void validate() const;
};

struct FrameFiles {
  std::filesystem::path cloud;
  std::filesystem::path labels;
};

/// Parsed sequence description. The manifest file is key=value text:
///   poses = <KITTI pose file>          (required)
///   times = <one timestamp per line>   (optional, else 10 Hz)
///   label_map = <label map file>       (optional, else the default map)
///   frame = <scan.bin> <scan.label>    (one per frame, in order)
/// plus any PipelineConfig key. Paths are relative to the manifest.
struct SequenceManifest {
  std::vector<FrameFiles> frames;
  std::vector<RigidPose> poses;
  std::vector<double> timestamps;
  LabelMap labels = LabelMap::default_map();
  PipelineConfig config;
  std::vector<std::string> warnings;

  /// `overrides` are applied after the manifest's own keys.
  static SequenceManifest load(const std::filesystem::path& path,
                               const io::KeyValueFile* overrides = nullptr);
  /// Throws kPairing on an empty sequence or mismatched pose/timestamp
  /// counts, kIo when a referenced file is missing.
  void validate() const;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct KeyframeResult {
  int keyframe = 0;
  OccupancyGrid grid;
  std::vector<StageTiming> timings;
  std::vector<std::string> warnings;
  std::size_t aggregated_points = 0;
  std::size_t mesh_triangles = 0;
};

/// Reads every frame of the sequence with its pose and timestamp.
std::vector<PosedFrame> load_frames(const SequenceManifest& manifest);

/// Keyframes receiving a grid: the configured list, or every frame whose
/// window fits inside the sequence.
std::vector<int> select_keyframes(int frame_count, const PipelineConfig& cfg);

/// Ground classes by name applied to `labels`; throws kConfig on an unknown
/// name.
LabelMap with_ground_classes(const LabelMap& labels, const std::vector<std::string>& names);

/// Points inside the grid box grown by `margin`.
SemanticPointCloud crop_to_grid(const SemanticPointCloud& cloud, const GridSpec& spec, double margin);

/// aggregate -> split/reconstruct -> voxelize -> label for one keyframe.
/// When `dump_dir` is set and cfg.dump_intermediate is on, the aggregated
/// cloud, mesh and boolean grid are written there. Failures are rethrown as
/// StageError naming the stage.
KeyframeResult process_keyframe(const std::vector<PosedFrame>& frames, const LabelMap& labels,
                                const PipelineConfig& cfg, int keyframe,
                                const std::optional<std::filesystem::path>& dump_dir = std::nullopt);

/// Runs all selected keyframes on cfg.jobs workers. With `out_dir`, each
/// grid is written to <out_dir>/<keyframe:06d>.wocc. Results are ordered
/// by keyframe regardless of scheduling.
std::vector<KeyframeResult> run_pipeline(const SequenceManifest& manifest,
                                         const std::optional<std::filesystem::path>& out_dir = std::nullopt);

std::string keyframe_file_name(int keyframe, const std::string& suffix = ".wocc");

}  // namespace wildocc
