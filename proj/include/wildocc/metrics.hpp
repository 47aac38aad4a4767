#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wildocc/core/grid.hpp"
#include "wildocc/core/label_map.hpp"

namespace wildocc {

/// counts[g][p] over classes {0 = empty, 1..N}; gt noise voxels are only
/// tallied in ignored_count.
struct ConfusionMatrix {
  int num_classes = 0;  // N, excluding empty
  std::vector<std::uint64_t> counts;  // (N+1) x (N+1), row = gt
  std::uint64_t ignored_count = 0;

  explicit ConfusionMatrix(int n = 0)
      : num_classes(n), counts(static_cast<std::size_t>(n + 1) * (n + 1), 0) {}

  std::uint64_t& at(int gt, int pred) { return counts[gt * (num_classes + 1) + pred]; }
  std::uint64_t at(int gt, int pred) const { return counts[gt * (num_classes + 1) + pred]; }
  std::uint64_t total() const;
};

ConfusionMatrix confusion(const OccupancyGrid& pred, const OccupancyGrid& gt, int num_classes);

/// Occupied-vs-empty IoU. Two grids with no occupancy at all score 1.
double geometric_iou(const ConfusionMatrix& cm);

struct MeanIou {
  double miou = 0.0;
  /// Per class 1..N; NaN for classes absent from both pred and gt.
  std::vector<double> per_class;
  int classes_counted = 0;
};

/// Mean per-class IoU over classes 1..N. Absent classes are skipped unless
/// `strict_n_classes`, in which case they count as 0 and the mean is over N.
/// Throws kUndefinedMetric when no class is present and not strict.
MeanIou mean_iou(const ConfusionMatrix& cm, const LabelMap& labels, bool strict_n_classes = false);

struct MetricsReport {
  double iou = 0.0;
  MeanIou miou;
  ConfusionMatrix cm;
  std::vector<std::string> class_names;
};

MetricsReport evaluate(const OccupancyGrid& pred, const OccupancyGrid& gt, const LabelMap& labels,
                       bool strict_n_classes = false);

/// One `key=value` per line: iou, miou, classes_counted, ignored, total,
/// then iou_<class> for every class (nan when absent).
std::string to_key_value(const MetricsReport& report);
/// {"iou":..,"miou":..,"classes_counted":..,"ignored":..,"total":..,
///  "per_class":{"grass":..},"confusion":[[..]]}; absent classes are null.
std::string to_json(const MetricsReport& report);

}  // namespace wildocc
