#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "wildocc/core/grid.hpp"

namespace wildocc {

/// C x nx x ny x nz dense tensor bound to a lattice. Storage is channel-major,
/// then i, j, k with k fastest, so each channel is one contiguous block of
/// spec.voxel_count() values.
template <typename Scalar>
class FeatureVolumeT {
 public:
  using Channel = Eigen::Map<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>;
  using ConstChannel = Eigen::Map<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>;

  FeatureVolumeT() = default;
  FeatureVolumeT(const GridSpec& spec, int channels, Scalar fill = Scalar(0))
      : spec_(spec), channels_(channels) {
    if (channels <= 0) {
      throw Error(ErrorKind::kIncompatibleShape, "feature volume needs at least one channel");
    }
    spec.validate();
    data_.assign(static_cast<std::size_t>(channels) * spec.voxel_count(), fill);
  }

  const GridSpec& spec() const { return spec_; }
  int channels() const { return channels_; }
  std::size_t voxels() const { return spec_.voxel_count(); }
  std::size_t size() const { return data_.size(); }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }
  std::vector<Scalar>& storage() { return data_; }
  const std::vector<Scalar>& storage() const { return data_; }

  Scalar& operator()(int c, std::size_t voxel) { return data_[c * voxels() + voxel]; }
  Scalar operator()(int c, std::size_t voxel) const { return data_[c * voxels() + voxel]; }
  Scalar& operator()(int c, const Index3& idx) { return (*this)(c, spec_.linear(idx)); }
  Scalar operator()(int c, const Index3& idx) const { return (*this)(c, spec_.linear(idx)); }

  Channel channel(int c) {
    return Channel(data_.data() + c * voxels(), static_cast<Eigen::Index>(voxels()));
  }
  ConstChannel channel(int c) const {
    return ConstChannel(data_.data() + c * voxels(), static_cast<Eigen::Index>(voxels()));
  }

  /// Gathers the C-vector stored at one voxel.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> feature(std::size_t voxel) const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> f(channels_);
    for (int c = 0; c < channels_; ++c) f[c] = (*this)(c, voxel);
    return f;
  }

  bool same_shape(const FeatureVolumeT& o) const {
    return spec_ == o.spec_ && channels_ == o.channels_;
  }

  bool all_finite() const {
    for (const Scalar v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  bool operator==(const FeatureVolumeT& o) const {
    return same_shape(o) && data_ == o.data_;
  }

 private:
  GridSpec spec_;
  int channels_ = 0;
  std::vector<Scalar> data_;
};

using FeatureVolume = FeatureVolumeT<double>;

/// Per-voxel boolean volume (e.g. the distillation mask).
struct BoolVolume {
  GridSpec spec;
  std::vector<std::uint8_t> values;

  std::size_t count() const {
    std::size_t n = 0;
    for (auto v : values) n += v != 0;
    return n;
  }
};

}  // namespace wildocc
