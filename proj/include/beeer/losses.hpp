// Loss suite: dice over the four error channels, binary cross-entropy for
// foreground, MSE for the center map, masked L1 for offsets, and their
// weighted combination.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "beeer/core.hpp"
#include "beeer/errors.hpp"
#include "beeer/represent.hpp"

namespace beeer {

struct LossWeights {
  double err = 1.0;
  double fg = 1.0;
  double ctr = 200.0;
  double off = 0.01;
};

struct LossBreakdown {
  double err = 0.0;
  double fg = 0.0;
  double ctr = 0.0;
  double off = 0.0;
  double total = 0.0;
};

/// Mean over the four channels of 1 - (2 sum(p t) + eps) / (sum p + sum t + eps),
/// eps = 1 for smoothness at empty channels.
inline double dice_loss(const ErrorProbabilities& pred, const ErrorMaps& target) {
  constexpr double eps = 1.0;
  double acc = 0.0;
  for (int c = 0; c < 4; ++c) {
    require_same_size(pred[c].size(), target.size(), "dice_loss");
    const auto& p = pred[c].values();
    const auto& codes = target.codes().values();
    double inter = 0.0, psum = 0.0, tsum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double t = (codes[i] == c) ? 1.0 : 0.0;
      inter += p[i] * t;
      psum += p[i];
      tsum += t;
    }
    acc += 1.0 - (2.0 * inter + eps) / (psum + tsum + eps);
  }
  return acc / 4.0;
}

/// Mean binary cross-entropy; predictions clamp to [1e-7, 1 - 1e-7].
inline double cross_entropy_fg(const Grid<double>& pred, const BinaryMask& target) {
  require_same_size(pred.size(), target.size(), "cross_entropy_fg");
  constexpr double lo = 1e-7, hi = 1.0 - 1e-7;
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.values().size(); ++i) {
    const double p = std::clamp(pred.values()[i], lo, hi);
    acc -= target.values()[i] ? std::log(p) : std::log(1.0 - p);
  }
  return acc / static_cast<double>(pred.values().size());
}

/// Mean squared error over all pixels.
inline double mse_center(const CenterMap& pred, const CenterMap& target) {
  require_same_size(pred.size(), target.size(), "mse_center");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.values().size(); ++i) {
    const double d = pred.values()[i] - target.values()[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.values().size());
}

/// Mean absolute error over foreground pixels and both components; offsets
/// are undefined on background, so those pixels do not participate. Empty
/// foreground yields 0.
inline double l1_offset(const OffsetMap& pred, const OffsetMap& target, const BinaryMask& fg) {
  require_same_size(pred.size(), target.size(), "l1_offset");
  require_same_size(pred.size(), fg.size(), "l1_offset");
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < fg.values().size(); ++i) {
    if (!fg.values()[i]) continue;
    acc += std::abs(pred.dx.values()[i] - target.dx.values()[i]);
    acc += std::abs(pred.dy.values()[i] - target.dy.values()[i]);
    ++n;
  }
  if (n == 0) return 0.0;
  return acc / static_cast<double>(2 * n);
}

inline LossBreakdown total_loss(double err, double fg, double ctr, double off,
                                const LossWeights& w = {}) {
  LossBreakdown b;
  b.err = err;
  b.fg = fg;
  b.ctr = ctr;
  b.off = off;
  b.total = w.err * err + w.fg * fg + w.ctr * ctr + w.off * off;
  return b;
}

}  // namespace beeer
