// Segmentation error representations: instance-boundary extraction and the
// per-pixel TP/TN/FP/FN maps comparing an initial segmentation against
// ground truth, for boundaries and for whole masks.
#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

#include "beeer/core.hpp"
#include "beeer/morphology.hpp"

namespace beeer {

enum class ErrorClass : std::uint8_t { TP = 0, TN = 1, FP = 2, FN = 3 };

/// Four binary channels, exactly one set per pixel. Stored as a single
/// class-code grid so the one-hot invariant holds by construction.
class ErrorMaps {
 public:
  ErrorMaps() = default;

  explicit ErrorMaps(Grid<std::uint8_t> codes) : codes_(std::move(codes)) {
    for (auto v : codes_.values())
      if (v > 3) throw std::invalid_argument("ErrorMaps: class code out of range");
  }

  ErrorMaps(const BinaryMask& tp, const BinaryMask& tn, const BinaryMask& fp,
            const BinaryMask& fn)
      : codes_(tp.size(), 0) {
    require_same_size(tp.size(), tn.size(), "ErrorMaps");
    require_same_size(tp.size(), fp.size(), "ErrorMaps");
    require_same_size(tp.size(), fn.size(), "ErrorMaps");
    for (std::size_t i = 0; i < codes_.values().size(); ++i) {
      const int set = (tp.values()[i] != 0) + (tn.values()[i] != 0) + (fp.values()[i] != 0) +
                      (fn.values()[i] != 0);
      if (set != 1) {
        throw std::invalid_argument("ErrorMaps: channels must be one-hot at every pixel");
      }
      std::uint8_t code = 0;
      if (tn.values()[i]) code = 1;
      if (fp.values()[i]) code = 2;
      if (fn.values()[i]) code = 3;
      codes_.values()[i] = code;
    }
  }

  ImageSize size() const { return codes_.size(); }
  ErrorClass at(int x, int y) const { return static_cast<ErrorClass>(codes_.at(x, y)); }
  const Grid<std::uint8_t>& codes() const { return codes_; }

  BinaryMask channel(ErrorClass c) const {
    BinaryMask m(codes_.size(), 0);
    const auto code = static_cast<std::uint8_t>(c);
    for (std::size_t i = 0; i < codes_.values().size(); ++i)
      m.values()[i] = (codes_.values()[i] == code);
    return m;
  }

  std::array<std::size_t, 4> counts() const {
    std::array<std::size_t, 4> n{0, 0, 0, 0};
    for (auto v : codes_.values()) ++n[v];
    return n;
  }

  bool operator==(const ErrorMaps&) const = default;

 private:
  Grid<std::uint8_t> codes_;
};

struct BoundaryConfig {
  int dilation_radius = 2;
  int connectivity = 4;

  void validate() const {
    if (dilation_radius < 0) {
      throw std::invalid_argument("BoundaryConfig: dilation_radius must be >= 0");
    }
    if (connectivity != 4 && connectivity != 8) {
      throw std::invalid_argument("BoundaryConfig: connectivity must be 4 or 8");
    }
  }
};

/// Union of instance contours, dilated. A contour pixel is a foreground
/// pixel with a neighbor (under cfg.connectivity) of a different label;
/// background, other instances, and the image border all count as different.
inline BinaryMask extract_boundary(const LabelMap& lm, const BoundaryConfig& cfg = {}) {
  cfg.validate();
  static constexpr int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int ndirs = (cfg.connectivity == 4) ? 4 : 8;

  BinaryMask contour(lm.size(), 0);
  for (int y = 0; y < lm.height(); ++y) {
    for (int x = 0; x < lm.width(); ++x) {
      const std::uint32_t v = lm.at(x, y);
      if (v == 0) continue;
      for (int d = 0; d < ndirs; ++d) {
        const int nx = x + dx8[d], ny = y + dy8[d];
        if (!lm.in_bounds(nx, ny) || lm.at(nx, ny) != v) {
          contour.at(x, y) = 1;
          break;
        }
      }
    }
  }
  return dilate(contour, cfg.dilation_radius);
}

namespace detail {

inline ErrorMaps explicit_error_from_masks(const BinaryMask& pred, const BinaryMask& gt) {
  Grid<std::uint8_t> codes(pred.size(), 0);
  for (std::size_t i = 0; i < codes.values().size(); ++i) {
    const bool p = pred.values()[i] != 0;
    const bool g = gt.values()[i] != 0;
    codes.values()[i] = p ? (g ? 0 : 2) : (g ? 3 : 1);
  }
  return ErrorMaps(std::move(codes));
}

}  // namespace detail

/// TP/TN/FP/FN between the boundary masks of an initial segmentation and
/// the ground truth.
inline ErrorMaps boundary_explicit_error(const LabelMap& init, const LabelMap& gt,
                                         const BoundaryConfig& cfg = {}) {
  require_same_size(init.size(), gt.size(), "boundary_explicit_error");
  return detail::explicit_error_from_masks(extract_boundary(init, cfg),
                                           extract_boundary(gt, cfg));
}

/// Same algebra on whole foreground masks instead of boundaries.
inline ErrorMaps mask_explicit_error(const LabelMap& init, const LabelMap& gt) {
  require_same_size(init.size(), gt.size(), "mask_explicit_error");
  return detail::explicit_error_from_masks(init.foreground(), gt.foreground());
}

/// Two-class collapse: true wherever the segmentation is wrong (fp or fn).
inline BinaryMask binary_error(const ErrorMaps& e) {
  BinaryMask m(e.size(), 0);
  for (std::size_t i = 0; i < e.codes().values().size(); ++i)
    m.values()[i] = (e.codes().values()[i] >= 2);
  return m;
}

/// Per-pixel probabilities for the four error classes, order TP, TN, FP, FN.
using ErrorProbabilities = std::array<Grid<double>, 4>;

/// Collapse class probabilities to hard classes by per-pixel argmax; ties
/// resolve to the lower channel index.
inline ErrorMaps classify_errors(const ErrorProbabilities& probs) {
  for (int c = 1; c < 4; ++c) require_same_size(probs[0].size(), probs[c].size(), "classify_errors");
  Grid<std::uint8_t> codes(probs[0].size(), 0);
  for (std::size_t i = 0; i < codes.values().size(); ++i) {
    int best = 0;
    double best_v = probs[0].values()[i];
    for (int c = 1; c < 4; ++c) {
      if (probs[c].values()[i] > best_v) {
        best_v = probs[c].values()[i];
        best = c;
      }
    }
    codes.values()[i] = static_cast<std::uint8_t>(best);
  }
  return ErrorMaps(std::move(codes));
}

}  // namespace beeer
