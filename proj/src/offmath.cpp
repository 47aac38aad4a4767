#include <algorithm>

#include "wildocc/offmath/align.hpp"

namespace wildocc::offmath {

std::vector<int> select_history(std::span<const double> timestamps, int current,
                                const TemporalWindowConfig& cfg) {
  cfg.validate();
  if (current < 0 || current >= static_cast<int>(timestamps.size())) {
    throw Error(ErrorKind::kRange, "current frame outside the timestamp list");
  }
  std::vector<int> picked(cfg.frames);
  picked.back() = current;
  const double t0 = timestamps[current];
  for (int step = 1; step < cfg.frames; ++step) {
    const double target = t0 - step * cfg.interval + 1e-9;
    // Latest frame not after the target time; timestamps are increasing.
    auto it = std::upper_bound(timestamps.begin(), timestamps.begin() + current + 1, target);
    picked[cfg.frames - 1 - step] =
        it == timestamps.begin() ? 0 : static_cast<int>(it - timestamps.begin()) - 1;
  }
  return picked;
}

}  // namespace wildocc::offmath
