#pragma once

#include <cmath>
#include <vector>

#include "wildocc/core/feature_volume.hpp"

namespace wildocc::offmath {

/// 3x3x3 convolution followed by inference-mode batch norm and ReLU.
/// kernel is laid out [out][in][dx][dy][dz] and applied as a correlation:
/// y(x) = sum_d w[d] * v(x + d - 1).
template <typename Scalar>
struct ConvBNReluWeights {
  int c_out = 0;
  int c_in = 0;
  std::vector<Scalar> kernel;
  std::vector<Scalar> bias;
  std::vector<Scalar> bn_mean, bn_var, bn_gamma, bn_beta;
  Scalar eps = Scalar(1e-5);

  ConvBNReluWeights() = default;
  ConvBNReluWeights(int out, int in)
      : c_out(out),
        c_in(in),
        kernel(static_cast<std::size_t>(out) * in * 27, Scalar(0)),
        bias(out, Scalar(0)),
        bn_mean(out, Scalar(0)),
        bn_var(out, Scalar(1)),
        bn_gamma(out, Scalar(1)),
        bn_beta(out, Scalar(0)) {}

  Scalar& tap(int o, int i, int dx, int dy, int dz) {
    return kernel[(((static_cast<std::size_t>(o) * c_in + i) * 3 + dx) * 3 + dy) * 3 + dz];
  }
  Scalar tap(int o, int i, int dx, int dy, int dz) const {
    return kernel[(((static_cast<std::size_t>(o) * c_in + i) * 3 + dx) * 3 + dy) * 3 + dz];
  }

  void validate() const {
    const auto out = static_cast<std::size_t>(c_out);
    if (c_out < 1 || c_in < 1 || kernel.size() != out * c_in * 27 || bias.size() != out ||
        bn_mean.size() != out || bn_var.size() != out || bn_gamma.size() != out ||
        bn_beta.size() != out) {
      throw Error(ErrorKind::kIncompatibleShape, "conv-bn-relu weight shapes are inconsistent");
    }
    for (Scalar v : bn_var) {
      if (!(v >= Scalar(0))) throw Error(ErrorKind::kPrecondition, "bn variance must be >= 0");
    }
  }
};

/// Stride-1, zero-padded 3x3x3 convolution + BN (running stats) + ReLU.
template <typename Scalar>
FeatureVolumeT<Scalar> voxel_encoder_forward(const FeatureVolumeT<Scalar>& v,
                                             const ConvBNReluWeights<Scalar>& w) {
  w.validate();
  if (v.channels() != w.c_in) {
    throw Error(ErrorKind::kIncompatibleShape,
                "encoder expects " + std::to_string(w.c_in) + " channels, got " +
                    std::to_string(v.channels()));
  }
  const GridSpec& spec = v.spec();
  const int nx = spec.dims[0], ny = spec.dims[1], nz = spec.dims[2];
  FeatureVolumeT<Scalar> out(spec, w.c_out);
  for (int o = 0; o < w.c_out; ++o) {
    Scalar* dst = out.data() + o * out.voxels();
    for (int c = 0; c < w.c_in; ++c) {
      const Scalar* src = v.data() + c * v.voxels();
      for (int dx = 0; dx < 3; ++dx) {
        for (int dy = 0; dy < 3; ++dy) {
          for (int dz = 0; dz < 3; ++dz) {
            const Scalar weight = w.tap(o, c, dx, dy, dz);
            if (weight == Scalar(0)) continue;
            const int ox = dx - 1, oy = dy - 1, oz = dz - 1;
            for (int i = std::max(0, -ox); i < std::min(nx, nx - ox); ++i) {
              for (int j = std::max(0, -oy); j < std::min(ny, ny - oy); ++j) {
                const std::size_t row = (static_cast<std::size_t>(i) * ny + j) * nz;
                const std::size_t src_row =
                    (static_cast<std::size_t>(i + ox) * ny + (j + oy)) * nz + oz;
                for (int k = std::max(0, -oz); k < std::min(nz, nz - oz); ++k) {
                  dst[row + k] += weight * src[src_row + k];
                }
              }
            }
          }
        }
      }
    }
    const Scalar scale = w.bn_gamma[o] / std::sqrt(w.bn_var[o] + w.eps);
    for (std::size_t n = 0; n < out.voxels(); ++n) {
      const Scalar y = scale * (dst[n] + w.bias[o] - w.bn_mean[o]) + w.bn_beta[o];
      dst[n] = y > Scalar(0) ? y : Scalar(0);
    }
  }
  return out;
}

}  // namespace wildocc::offmath
