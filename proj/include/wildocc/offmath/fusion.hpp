#pragma once

#include <algorithm>
#include <cmath>

#include "wildocc/core/feature_volume.hpp"

namespace wildocc::offmath {

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

/// Gated convex combination sigmoid(w) * f_l + (1 - sigmoid(w)) * f_i,
/// elementwise over identically shaped volumes.
template <typename Scalar>
FeatureVolumeT<Scalar> adaptive_fuse(const FeatureVolumeT<Scalar>& f_i,
                                     const FeatureVolumeT<Scalar>& f_l,
                                     const FeatureVolumeT<Scalar>& w) {
  if (!f_i.same_shape(f_l) || !f_i.same_shape(w)) {
    throw Error(ErrorKind::kIncompatibleShape, "fusion inputs must share shape");
  }
  FeatureVolumeT<Scalar> out(f_i.spec(), f_i.channels());
  for (std::size_t n = 0; n < out.size(); ++n) {
    const Scalar g = sigmoid(w.data()[n]);
    const Scalar a = f_i.data()[n], b = f_l.data()[n];
    // Rounding may land one ulp outside [a, b]; clamping keeps the result a
    // convex combination and makes a == b a fixed point.
    out.data()[n] = std::clamp(g * b + (Scalar(1) - g) * a, std::min(a, b), std::max(a, b));
  }
  return out;
}

}  // namespace wildocc::offmath
