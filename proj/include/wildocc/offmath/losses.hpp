#pragma once

#include <cmath>
#include <algorithm>
#include <limits>
#include <string>

#include "wildocc/core/feature_volume.hpp"

namespace wildocc::offmath {

struct LossConfig {
  double lambda = 0.8;
  /// Multiplies the masked cosine mean. -1 turns it into a quantity to
  /// minimize.
  int distill_sign = -1;

  void validate() const {
    if (!std::isfinite(lambda) || lambda < 0.0) {
      throw Error(ErrorKind::kConfig, "lambda must be finite and non-negative");
    }
    if (distill_sign != 1 && distill_sign != -1) {
      throw Error(ErrorKind::kConfig, "distill_sign must be +1 or -1");
    }
  }
};

/// Vectors shorter than this count as zero in the cosine term.
inline constexpr double kMinFeatureNorm = 1e-12;

/// 1 where the ground-truth voxel is a class (not empty, not noise).
inline BoolVolume occupancy_mask(const OccupancyGrid& gt) {
  BoolVolume mask{gt.spec, std::vector<std::uint8_t>(gt.labels.size(), 0)};
  for (std::size_t v = 0; v < gt.labels.size(); ++v) {
    mask.values[v] = gt.labels[v] != kEmptyClass && gt.labels[v] != kNoiseClass;
  }
  return mask;
}

namespace detail {

template <typename Scalar>
void check_distill_shapes(const FeatureVolumeT<Scalar>& f_i, const FeatureVolumeT<Scalar>& f_l,
                          const BoolVolume& mask) {
  if (!f_i.same_shape(f_l)) {
    throw Error(ErrorKind::kIncompatibleShape, "distillation features differ in shape");
  }
  if (!(mask.spec == f_i.spec()) || mask.values.size() != f_i.voxels()) {
    throw Error(ErrorKind::kIncompatibleShape, "distillation mask does not match features");
  }
}

}  // namespace detail

/// (1 / HWD) * sum over masked voxels of cos(f_i, f_l). Voxels where either
/// vector is (near) zero contribute 0.
template <typename Scalar>
Scalar distill_loss_raw(const FeatureVolumeT<Scalar>& f_i, const FeatureVolumeT<Scalar>& f_l,
                        const BoolVolume& mask) {
  detail::check_distill_shapes(f_i, f_l, mask);
  const std::size_t n = f_i.voxels();
  const int channels = f_i.channels();
  Scalar sum(0);
  for (std::size_t v = 0; v < n; ++v) {
    if (!mask.values[v]) continue;
    Scalar dot(0), na(0), nb(0);
    for (int c = 0; c < channels; ++c) {
      const Scalar a = f_i(c, v), b = f_l(c, v);
      dot += a * b;
      na += a * a;
      nb += b * b;
    }
    if (std::sqrt(na) < Scalar(kMinFeatureNorm) || std::sqrt(nb) < Scalar(kMinFeatureNorm)) continue;
    // sqrt(x * x) == x exactly, so identical vectors give a cosine of exactly 1.
    sum += std::clamp(dot / std::sqrt(na * nb), Scalar(-1), Scalar(1));
  }
  return sum / static_cast<Scalar>(n);
}

template <typename Scalar>
Scalar distill_loss(const FeatureVolumeT<Scalar>& f_i, const FeatureVolumeT<Scalar>& f_l,
                    const BoolVolume& mask, const LossConfig& cfg) {
  cfg.validate();
  return static_cast<Scalar>(cfg.distill_sign) * distill_loss_raw(f_i, f_l, mask);
}

/// d distill_loss / d f_i.
template <typename Scalar>
FeatureVolumeT<Scalar> distill_loss_gradient(const FeatureVolumeT<Scalar>& f_i,
                                             const FeatureVolumeT<Scalar>& f_l,
                                             const BoolVolume& mask, const LossConfig& cfg) {
  cfg.validate();
  detail::check_distill_shapes(f_i, f_l, mask);
  const std::size_t n = f_i.voxels();
  const int channels = f_i.channels();
  const Scalar scale = static_cast<Scalar>(cfg.distill_sign) / static_cast<Scalar>(n);
  FeatureVolumeT<Scalar> grad(f_i.spec(), channels);
  for (std::size_t v = 0; v < n; ++v) {
    if (!mask.values[v]) continue;
    Scalar dot(0), na(0), nb(0);
    for (int c = 0; c < channels; ++c) {
      dot += f_i(c, v) * f_l(c, v);
      na += f_i(c, v) * f_i(c, v);
      nb += f_l(c, v) * f_l(c, v);
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na < Scalar(kMinFeatureNorm) || nb < Scalar(kMinFeatureNorm)) continue;
    const Scalar cosine = dot / (na * nb);
    for (int c = 0; c < channels; ++c) {
      grad(c, v) = scale * (f_l(c, v) / (na * nb) - cosine * f_i(c, v) / (na * na));
    }
  }
  return grad;
}

namespace detail {

template <typename Scalar>
void check_ce_shapes(const FeatureVolumeT<Scalar>& logits, const OccupancyGrid& gt) {
  if (!(logits.spec() == gt.spec)) {
    throw Error(ErrorKind::kIncompatibleShape, "logits and labels use different lattices");
  }
  for (ClassId l : gt.labels) {
    if (l != kNoiseClass && l >= logits.channels()) {
      throw Error(ErrorKind::kIncompatibleShape, "label " + std::to_string(l) + " exceeds " +
                                                     std::to_string(logits.channels()) +
                                                     " logit channels");
    }
  }
}

}  // namespace detail

/// Mean -log softmax(logits)[label] over voxels whose label is not noise.
/// Channel 0 is the empty class.
template <typename Scalar>
Scalar cross_entropy_loss(const FeatureVolumeT<Scalar>& logits, const OccupancyGrid& gt) {
  detail::check_ce_shapes(logits, gt);
  const int channels = logits.channels();
  Scalar sum(0);
  std::size_t count = 0;
  for (std::size_t v = 0; v < gt.labels.size(); ++v) {
    const ClassId l = gt.labels[v];
    if (l == kNoiseClass) continue;
    Scalar mx = -std::numeric_limits<Scalar>::infinity();
    for (int c = 0; c < channels; ++c) mx = std::max(mx, logits(c, v));
    Scalar z(0);
    for (int c = 0; c < channels; ++c) z += std::exp(logits(c, v) - mx);
    sum += std::log(z) + mx - logits(l, v);
    ++count;
  }
  if (count == 0) throw Error(ErrorKind::kUndefinedLoss, "every voxel is ignored");
  return sum / static_cast<Scalar>(count);
}

/// d cross_entropy_loss / d logits.
template <typename Scalar>
FeatureVolumeT<Scalar> cross_entropy_gradient(const FeatureVolumeT<Scalar>& logits,
                                              const OccupancyGrid& gt) {
  detail::check_ce_shapes(logits, gt);
  const int channels = logits.channels();
  std::size_t count = 0;
  for (ClassId l : gt.labels) count += l != kNoiseClass;
  if (count == 0) throw Error(ErrorKind::kUndefinedLoss, "every voxel is ignored");
  FeatureVolumeT<Scalar> grad(logits.spec(), channels);
  const Scalar inv = Scalar(1) / static_cast<Scalar>(count);
  for (std::size_t v = 0; v < gt.labels.size(); ++v) {
    const ClassId l = gt.labels[v];
    if (l == kNoiseClass) continue;
    Scalar mx = -std::numeric_limits<Scalar>::infinity();
    for (int c = 0; c < channels; ++c) mx = std::max(mx, logits(c, v));
    Scalar z(0);
    for (int c = 0; c < channels; ++c) z += std::exp(logits(c, v) - mx);
    for (int c = 0; c < channels; ++c) {
      const Scalar p = std::exp(logits(c, v) - mx) / z;
      grad(c, v) = inv * (p - (c == l ? Scalar(1) : Scalar(0)));
    }
  }
  return grad;
}

/// ce + ls + lambda * distill + d. ls and d come from outside.
inline double total_loss(double ce, double ls, double distill, double d, const LossConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(ce) || !std::isfinite(ls) || !std::isfinite(distill) || !std::isfinite(d)) {
    throw Error(ErrorKind::kInvalidLoss, "loss terms must be finite");
  }
  return ce + ls + cfg.lambda * distill + d;
}

}  // namespace wildocc::offmath
