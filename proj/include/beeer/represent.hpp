// Center/offset instance representation: encode a LabelMap into a Gaussian
// center heatmap plus per-pixel offsets to the instance centroid, and decode
// predicted planes back into instances (NMS + hard threshold on centers,
// nearest-center grouping of foreground pixels, small-instance removal).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "beeer/core.hpp"

namespace beeer {

/// Per-pixel likelihood of being an instance center, values in [0, 1].
using CenterMap = Grid<double>;

struct OffsetMap {
  Grid<double> dx;
  Grid<double> dy;

  OffsetMap() = default;
  explicit OffsetMap(ImageSize size) : dx(size, 0.0), dy(size, 0.0) {}
  OffsetMap(Grid<double> dx_, Grid<double> dy_) : dx(std::move(dx_)), dy(std::move(dy_)) {
    require_same_size(dx.size(), dy.size(), "OffsetMap");
  }

  ImageSize size() const { return dx.size(); }
  bool operator==(const OffsetMap&) const = default;
};

struct EncodedIS {
  CenterMap center;
  OffsetMap offset;
};

struct DecodeConfig {
  double center_threshold = 0.3;
  int nms_window = 7;
  int min_instance_px = 500;

  void validate() const {
    if (!(center_threshold > 0.0 && center_threshold < 1.0)) {
      throw std::invalid_argument("DecodeConfig: center_threshold must be in (0,1)");
    }
    if (nms_window < 3 || nms_window % 2 == 0) {
      throw std::invalid_argument("DecodeConfig: nms_window must be odd and >= 3");
    }
    if (min_instance_px < 0) {
      throw std::invalid_argument("DecodeConfig: min_instance_px must be >= 0");
    }
  }
};

struct CenterPoint {
  int x = 0;
  int y = 0;
  double score = 0.0;
};

/// Mean pixel coordinate of the instance's pixels.
inline std::pair<double, double> instance_center(const LabelMap& lm, std::uint32_t id) {
  if (!lm.has_id(id)) {
    throw std::invalid_argument("instance_center: id " + std::to_string(id) +
                                " not present in label map");
  }
  double sx = 0, sy = 0;
  std::size_t n = 0;
  for (int y = 0; y < lm.height(); ++y)
    for (int x = 0; x < lm.width(); ++x)
      if (lm.at(x, y) == id) {
        sx += x;
        sy += y;
        ++n;
      }
  return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

namespace detail {

/// Centroids for all instances, aligned with lm.ids(), in one image pass.
inline std::vector<std::pair<double, double>> all_centroids(const LabelMap& lm) {
  const auto& ids = lm.ids();
  std::vector<double> sx(ids.size(), 0), sy(ids.size(), 0);
  std::vector<std::size_t> n(ids.size(), 0);
  for (int y = 0; y < lm.height(); ++y)
    for (int x = 0; x < lm.width(); ++x) {
      const std::uint32_t v = lm.at(x, y);
      if (v == 0) continue;
      const std::size_t k =
          static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), v) - ids.begin());
      sx[k] += x;
      sy[k] += y;
      ++n[k];
    }
  std::vector<std::pair<double, double>> out(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k)
    out[k] = {sx[k] / static_cast<double>(n[k]), sy[k] / static_cast<double>(n[k])};
  return out;
}

}  // namespace detail

/// Gaussian bump exp(-d^2 / (2 sigma^2)) around each instance centroid,
/// combined across instances by per-pixel max. Bumps are evaluated at pixel
/// centers within a 5-sigma box; beyond it the value (< 4e-6) is left at 0.
inline CenterMap encode_centers(const LabelMap& lm, double sigma = 8.0) {
  if (!(sigma > 0.0)) throw std::invalid_argument("encode_centers: sigma must be > 0");
  CenterMap c(lm.size(), 0.0);
  const auto centroids = detail::all_centroids(lm);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  const int reach = static_cast<int>(std::ceil(5.0 * sigma));
  for (const auto& [cx, cy] : centroids) {
    const int x0 = std::max(0, static_cast<int>(std::floor(cx)) - reach);
    const int x1 = std::min(lm.width() - 1, static_cast<int>(std::ceil(cx)) + reach);
    const int y0 = std::max(0, static_cast<int>(std::floor(cy)) - reach);
    const int y1 = std::min(lm.height() - 1, static_cast<int>(std::ceil(cy)) + reach);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        const double v = std::exp(-d2 * inv);
        if (v > c.at(x, y)) c.at(x, y) = v;
      }
  }
  return c;
}

/// Each foreground pixel stores the vector to its own instance's centroid;
/// background pixels store (0, 0).
inline OffsetMap encode_offsets(const LabelMap& lm) {
  OffsetMap o(lm.size());
  const auto& ids = lm.ids();
  const auto centroids = detail::all_centroids(lm);
  for (int y = 0; y < lm.height(); ++y)
    for (int x = 0; x < lm.width(); ++x) {
      const std::uint32_t v = lm.at(x, y);
      if (v == 0) continue;
      const std::size_t k =
          static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), v) - ids.begin());
      o.dx.at(x, y) = centroids[k].first - x;
      o.dy.at(x, y) = centroids[k].second - y;
    }
  return o;
}

inline EncodedIS encode(const LabelMap& lm, double sigma = 8.0) {
  return EncodedIS{encode_centers(lm, sigma), encode_offsets(lm)};
}

/// Windowed local maxima of the center map at or above the hard threshold,
/// sorted by descending score, ties by raster order. On a plateau only the
/// raster-first pixel survives, so no two results share an nms_window.
inline std::vector<CenterPoint> nms_centers(const CenterMap& c, const DecodeConfig& cfg) {
  cfg.validate();
  const int r = cfg.nms_window / 2;
  std::vector<CenterPoint> out;
  for (int y = 0; y < c.height(); ++y) {
    for (int x = 0; x < c.width(); ++x) {
      const double v = c.at(x, y);
      if (v < cfg.center_threshold) continue;
      bool keep = true;
      for (int wy = std::max(0, y - r); keep && wy <= std::min(c.height() - 1, y + r); ++wy) {
        for (int wx = std::max(0, x - r); wx <= std::min(c.width() - 1, x + r); ++wx) {
          if (wx == x && wy == y) continue;
          const double u = c.at(wx, wy);
          const bool earlier = (wy < y) || (wy == y && wx < x);
          if (u > v || (u == v && earlier)) {
            keep = false;
            break;
          }
        }
      }
      if (keep) out.push_back({x, y, v});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const CenterPoint& a, const CenterPoint& b) { return a.score > b.score; });
  return out;
}

/// Group each foreground pixel with the center nearest to p + offset(p);
/// equidistant centers resolve to the lower index in the NMS ordering.
/// Instances below min_instance_px are dropped; ids are canonical.
inline LabelMap decode(const CenterMap& c, const OffsetMap& o, const BinaryMask& fg,
                       const DecodeConfig& cfg) {
  cfg.validate();
  require_same_size(c.size(), o.size(), "decode");
  require_same_size(c.size(), fg.size(), "decode");

  const std::vector<CenterPoint> centers = nms_centers(c, cfg);
  if (centers.empty()) return LabelMap(c.size());

  Grid<std::uint32_t> raw(c.size(), 0u);
  std::vector<std::size_t> counts(centers.size(), 0);
  for (int y = 0; y < c.height(); ++y) {
    for (int x = 0; x < c.width(); ++x) {
      if (!fg.at(x, y)) continue;
      const double qx = x + o.dx.at(x, y);
      const double qy = y + o.dy.at(x, y);
      std::size_t best = 0;
      double best_d2 = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < centers.size(); ++k) {
        const double d2 = (qx - centers[k].x) * (qx - centers[k].x) +
                          (qy - centers[k].y) * (qy - centers[k].y);
        if (d2 < best_d2) {
          best_d2 = d2;
          best = k;
        }
      }
      raw.at(x, y) = static_cast<std::uint32_t>(best) + 1;
      ++counts[best];
    }
  }
  for (auto& v : raw.values()) {
    if (v != 0 && counts[v - 1] < static_cast<std::size_t>(cfg.min_instance_px)) v = 0;
  }
  return relabel_canonical(LabelMap(std::move(raw)));
}

}  // namespace beeer
