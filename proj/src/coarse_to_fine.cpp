#include "wildocc/recon/coarse_to_fine.hpp"

namespace wildocc::recon {

std::pair<SemanticPointCloud, SemanticPointCloud> split_ground(const SemanticPointCloud& cloud,
                                                               const LabelMap& labels) {
  cloud.validate();
  SemanticPointCloud ground, other;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const ClassId c = cloud.labels[i];
    if (c == kNoiseClass) continue;
    if (!labels.is_valid(c)) {
      throw Error(ErrorKind::kPrecondition, "point label " + std::to_string(c) +
                                                " is not in the label map");
    }
    (labels.is_ground(c) ? ground : other).push_back_from(cloud, i);
  }
  return {std::move(ground), std::move(other)};
}

namespace {

constexpr std::size_t kMinPartition = 100;

TriangleMesh reconstruct_partition(const SemanticPointCloud& part, const PoissonConfig& cfg,
                                   int k_n, const std::map<int, Point3>& sensor_origins,
                                   const char* name, std::vector<std::string>& warnings) {
  if (part.size() < kMinPartition) {
    warnings.push_back(std::string(name) + " partition has only " +
                       std::to_string(part.size()) + " points; skipped");
    return {};
  }
  return poisson_reconstruct(estimate_normals(part, k_n, sensor_origins), cfg);
}

}  // namespace

CoarseToFineResult coarse_to_fine_reconstruct(const SemanticPointCloud& cloud,
                                              const LabelMap& labels,
                                              const PoissonConfig& coarse,
                                              const PoissonConfig& fine, int k_n,
                                              const std::map<int, Point3>& sensor_origins) {
  if (coarse.depth > fine.depth) {
    throw Error(ErrorKind::kPrecondition, "coarse depth " + std::to_string(coarse.depth) +
                                              " exceeds fine depth " + std::to_string(fine.depth));
  }
  coarse.validate();
  fine.validate();
  auto [ground, other] = split_ground(cloud, labels);
  if (ground.empty() && other.empty()) {
    throw Error(ErrorKind::kInsufficientPoints, "no non-noise points to reconstruct");
  }
  // Both partitions share the lattice cube of the whole cloud, so a depth
  // means the same cell size on either side.
  Eigen::AlignedBox3d scene;
  for (const auto* part : {&ground, &other})
    for (const auto& p : part->points) scene.extend(p);
  PoissonConfig coarse_cfg = coarse, fine_cfg = fine;
  if (!coarse_cfg.domain) coarse_cfg.domain = scene;
  if (!fine_cfg.domain) fine_cfg.domain = scene;

  CoarseToFineResult out;
  out.ground = reconstruct_partition(ground, coarse_cfg, k_n, sensor_origins, "ground", out.warnings);
  out.non_ground =
      reconstruct_partition(other, fine_cfg, k_n, sensor_origins, "non-ground", out.warnings);
  out.mesh = concat(out.ground, out.non_ground);
  return out;
}

}  // namespace wildocc::recon
