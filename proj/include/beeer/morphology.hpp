// Binary-mask morphology: Euclidean-disk dilation/erosion, Moore contour
// tracing, and scanline polygon filling. Everything outside the image is
// treated as background.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <utility>
#include <vector>

#include "beeer/core.hpp"

namespace beeer {

struct PixelCoord {
  int x = 0;
  int y = 0;
  bool operator==(const PixelCoord&) const = default;
};

/// Offsets of the closed Euclidean disk of the given radius: all (dx, dy)
/// with dx*dx + dy*dy <= radius*radius.
inline std::vector<PixelCoord> disk_offsets(int radius) {
  if (radius < 0) throw std::invalid_argument("disk_offsets: negative radius");
  std::vector<PixelCoord> offs;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) offs.push_back({dx, dy});
  return offs;
}

inline BinaryMask dilate(const BinaryMask& mask, int radius) {
  if (radius == 0) return mask;
  const auto offs = disk_offsets(radius);
  BinaryMask out(mask.size(), 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      for (const auto& o : offs) {
        const int nx = x + o.x, ny = y + o.y;
        if (out.in_bounds(nx, ny)) out.at(nx, ny) = 1;
      }
    }
  }
  return out;
}

inline BinaryMask erode(const BinaryMask& mask, int radius) {
  if (radius == 0) return mask;
  const auto offs = disk_offsets(radius);
  BinaryMask out(mask.size(), 0);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.at(x, y)) continue;
      bool keep = true;
      for (const auto& o : offs) {
        const int nx = x + o.x, ny = y + o.y;
        if (!mask.in_bounds(nx, ny) || !mask.at(nx, ny)) {
          keep = false;
          break;
        }
      }
      out.at(x, y) = keep;
    }
  }
  return out;
}

/// Trace the outer contour of the connected region containing its
/// topmost-then-leftmost pixel, using Moore-neighbor tracing. Returns the
/// boundary pixels in clockwise order (image coordinates, y down), starting
/// at that pixel. Pixels may repeat where the region is one pixel wide.
/// Expects a mask holding a single connected component; an empty mask
/// returns an empty contour.
inline std::vector<PixelCoord> trace_contour(const BinaryMask& mask) {
  // Clockwise Moore neighborhood starting West.
  static constexpr int dx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};
  static constexpr int dy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

  PixelCoord start{-1, -1};
  for (int y = 0; y < mask.height() && start.x < 0; ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y)) {
        start = {x, y};
        break;
      }
  if (start.x < 0) return {};

  auto is_set = [&](int x, int y) { return mask.in_bounds(x, y) && mask.at(x, y) != 0; };

  std::vector<PixelCoord> contour{start};
  PixelCoord cur = start;
  // The W neighbor of the start is background (start is leftmost in the
  // topmost occupied row), so the trace begins as if it entered from there.
  PixelCoord backtrack{start.x - 1, start.y};
  int first_move = -1;
  const std::size_t cap = 4 * mask.size().pixel_count() + 8;
  while (contour.size() < cap) {
    int from = 0;
    for (int k = 0; k < 8; ++k)
      if (PixelCoord{cur.x + dx[k], cur.y + dy[k]} == backtrack) {
        from = k;
        break;
      }
    int move = -1;
    for (int step = 1; step <= 8; ++step) {
      const int d = (from + step) % 8;
      if (is_set(cur.x + dx[d], cur.y + dy[d])) {
        move = d;
        break;
      }
      backtrack = {cur.x + dx[d], cur.y + dy[d]};
    }
    if (move < 0) break;  // isolated pixel
    // Stop when about to leave the start the same way the trace began.
    if (cur == start) {
      if (first_move < 0) {
        first_move = move;
      } else if (move == first_move) {
        break;
      }
    }
    cur = {cur.x + dx[move], cur.y + dy[move]};
    contour.push_back(cur);
  }
  // The loop records the closing arrival back at the start; list it once.
  if (contour.size() > 1 && contour.back() == start) contour.pop_back();
  return contour;
}

/// Draw the straight segment from a to b (inclusive) into the mask.
inline void draw_line(BinaryMask& mask, PixelCoord a, PixelCoord b) {
  int x0 = a.x, y0 = a.y;
  const int dx = std::abs(b.x - x0), dy = -std::abs(b.y - y0);
  const int sx = x0 < b.x ? 1 : -1, sy = y0 < b.y ? 1 : -1;
  int err = dx + dy;
  while (true) {
    if (mask.in_bounds(x0, y0)) mask.at(x0, y0) = 1;
    if (x0 == b.x && y0 == b.y) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

/// Rasterize a closed polygon: even-odd scanline fill of the interior plus
/// the outline itself. Vertices are pixel coordinates; fewer than three
/// vertices degenerate to a point or segment.
inline BinaryMask fill_polygon(ImageSize size, const std::vector<PixelCoord>& poly) {
  BinaryMask out(size, 0);
  if (poly.empty()) return out;
  if (poly.size() == 1) {
    if (out.in_bounds(poly[0].x, poly[0].y)) out.at(poly[0].x, poly[0].y) = 1;
    return out;
  }

  if (poly.size() >= 3) {
    std::vector<double> xs;
    for (int y = 0; y < size.height; ++y) {
      xs.clear();
      for (std::size_t i = 0; i < poly.size(); ++i) {
        const PixelCoord& p = poly[i];
        const PixelCoord& q = poly[(i + 1) % poly.size()];
        if (p.y == q.y) continue;
        const int ylo = std::min(p.y, q.y), yhi = std::max(p.y, q.y);
        if (y < ylo || y >= yhi) continue;  // half-open so shared vertices count once
        xs.push_back(p.x + static_cast<double>(y - p.y) * (q.x - p.x) / (q.y - p.y));
      }
      std::sort(xs.begin(), xs.end());
      for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
        const int x0 = static_cast<int>(std::ceil(xs[i]));
        const int x1 = static_cast<int>(std::floor(xs[i + 1]));
        for (int x = std::max(0, x0); x <= std::min(size.width - 1, x1); ++x) out.at(x, y) = 1;
      }
    }
  }

  for (std::size_t i = 0; i < poly.size(); ++i) {
    draw_line(out, poly[i], poly[(i + 1) % poly.size()]);
  }
  return out;
}

}  // namespace beeer
