#include "wildocc/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include "json.hpp"
#include <sstream>

namespace wildocc {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = ignored_count;
  for (auto c : counts) t += c;
  return t;
}

ConfusionMatrix confusion(const OccupancyGrid& pred, const OccupancyGrid& gt, int num_classes) {
  if (!(pred.spec == gt.spec) || pred.labels.size() != gt.labels.size()) {
    throw Error(ErrorKind::kIncompatibleGrid, "prediction and ground truth lattices differ");
  }
  ConfusionMatrix cm(num_classes);
  for (std::size_t v = 0; v < gt.labels.size(); ++v) {
    const int g = gt.labels[v];
    const int p = pred.labels[v];
    if (g == kNoiseClass) {
      ++cm.ignored_count;
      continue;
    }
    if (p == kNoiseClass) {
      throw Error(ErrorKind::kPrecondition, "prediction contains noise labels");
    }
    if (g > num_classes || p > num_classes) {
      throw Error(ErrorKind::kRange, "label outside the " + std::to_string(num_classes) +
                                         "-class map");
    }
    ++cm.at(g, p);
  }
  return cm;
}

double geometric_iou(const ConfusionMatrix& cm) {
  std::uint64_t tp = 0, fp = 0, fn = 0;
  for (int g = 0; g <= cm.num_classes; ++g) {
    for (int p = 0; p <= cm.num_classes; ++p) {
      const auto n = cm.at(g, p);
      if (g != 0 && p != 0) tp += n;
      else if (g == 0 && p != 0) fp += n;
      else if (g != 0 && p == 0) fn += n;
    }
  }
  const std::uint64_t denom = tp + fp + fn;
  return denom == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(denom);
}

MeanIou mean_iou(const ConfusionMatrix& cm, const LabelMap& labels, bool strict_n_classes) {
  const int n = cm.num_classes;
  if (labels.num_classes() != n) {
    throw Error(ErrorKind::kIncompatibleGrid, "confusion matrix and label map class counts differ");
  }
  MeanIou out;
  out.per_class.assign(n, std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  for (int c = 1; c <= n; ++c) {
    std::uint64_t tp = cm.at(c, c), row = 0, col = 0;
    for (int o = 0; o <= n; ++o) {
      row += cm.at(c, o);
      col += cm.at(o, c);
    }
    const std::uint64_t denom = row + col - tp;  // tp + fn + fp
    if (denom == 0) {
      if (strict_n_classes) ++out.classes_counted;
      continue;
    }
    out.per_class[c - 1] = static_cast<double>(tp) / static_cast<double>(denom);
    sum += out.per_class[c - 1];
    ++out.classes_counted;
  }
  if (out.classes_counted == 0) {
    throw Error(ErrorKind::kUndefinedMetric, "no semantic class present in prediction or truth");
  }
  out.miou = sum / static_cast<double>(out.classes_counted);
  return out;
}

MetricsReport evaluate(const OccupancyGrid& pred, const OccupancyGrid& gt, const LabelMap& labels,
                       bool strict_n_classes) {
  MetricsReport r;
  r.cm = confusion(pred, gt, labels.num_classes());
  r.iou = geometric_iou(r.cm);
  r.miou = mean_iou(r.cm, labels, strict_n_classes);
  for (const auto& [id, name] : labels.classes()) r.class_names.push_back(name);
  return r;
}

std::string to_key_value(const MetricsReport& r) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "iou=" << r.iou << "\n";
  os << "miou=" << r.miou.miou << "\n";
  os << "classes_counted=" << r.miou.classes_counted << "\n";
  os << "ignored=" << r.cm.ignored_count << "\n";
  os << "total=" << r.cm.total() << "\n";
  for (std::size_t c = 0; c < r.class_names.size(); ++c) {
    os << "iou_" << r.class_names[c] << "=";
    if (std::isnan(r.miou.per_class[c])) os << "nan";
    else os << r.miou.per_class[c];
    os << "\n";
  }
  return os.str();
}

std::string to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["iou"] = r.iou;
  j["miou"] = r.miou.miou;
  j["classes_counted"] = r.miou.classes_counted;
  j["ignored"] = r.cm.ignored_count;
  j["total"] = r.cm.total();
  nlohmann::ordered_json per = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < r.class_names.size(); ++c) {
    if (std::isnan(r.miou.per_class[c])) per[r.class_names[c]] = nullptr;
    else per[r.class_names[c]] = r.miou.per_class[c];
  }
  j["per_class"] = per;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int g = 0; g <= r.cm.num_classes; ++g) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int p = 0; p <= r.cm.num_classes; ++p) row.push_back(r.cm.at(g, p));
    rows.push_back(row);
  }
  j["confusion"] = rows;
  return j.dump(2) + "\n";
}

}  // namespace wildocc
