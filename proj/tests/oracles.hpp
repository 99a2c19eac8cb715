// Independent reference implementations used to cross-check the library:
// exhaustive assignment enumeration, distance-scan boundary dilation, and
// set-algebra instance metrics. Deliberately slow and structure-free.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <vector>

#include "beeer/core.hpp"
#include "beeer/errors.hpp"
#include "beeer/metrics.hpp"
#include "beeer/represent.hpp"

namespace oracle {

/// Every matching of size min(n, m), by exhaustive recursion. Returns the
/// lexicographically smallest row-ascending pair list among matchings whose
/// total is within tie_eps of the maximum.
inline beeer::Assignment assignment_bruteforce(const std::vector<std::vector<double>>& score,
                                               double tie_eps = 1e-7) {
  beeer::Assignment out;
  out.n_pred = static_cast<int>(score.size());
  out.n_gt = score.empty() ? 0 : static_cast<int>(score[0].size());
  const int n = out.n_pred, m = out.n_gt;
  if (n == 0 || m == 0) return out;
  const int want = std::min(n, m);

  std::vector<std::pair<double, std::vector<std::pair<int, int>>>> complete;
  std::vector<char> used(m, 0);
  std::vector<std::pair<int, int>> cur;
  double total = 0.0;

  auto recurse = [&](auto&& self, int row) -> void {
    if (static_cast<int>(cur.size()) == want) {
      complete.emplace_back(total, cur);
      return;
    }
    if (row == n) return;
    for (int c = 0; c < m; ++c) {
      if (used[c]) continue;
      used[c] = 1;
      cur.emplace_back(row, c);
      total += score[row][c];
      self(self, row + 1);
      total -= score[row][c];
      cur.pop_back();
      used[c] = 0;
    }
    // Skipping a row is possible only while enough rows remain to fill the
    // matching, i.e. only when rows outnumber columns.
    if (n - row - 1 >= want - static_cast<int>(cur.size())) self(self, row + 1);
  };
  recurse(recurse, 0);

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [t, pairs] : complete) best = std::max(best, t);
  const std::vector<std::pair<int, int>>* lex_min = nullptr;
  for (const auto& [t, pairs] : complete) {
    if (t < best - tie_eps) continue;
    if (!lex_min || pairs < *lex_min) lex_min = &pairs;
  }
  out.pairs = *lex_min;
  return out;
}

/// Dilated instance contour by direct definition: a contour pixel is a set
/// pixel with an unset or out-of-image neighbor; the output marks every
/// pixel within Euclidean distance radius of some contour pixel.
inline beeer::BinaryMask boundary_mask_bruteforce(const beeer::BinaryMask& mask, int radius,
                                                  int connectivity) {
  const int w = mask.width(), h = mask.height();
  std::vector<beeer::PixelCoord> contour;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      bool edge = false;
      for (int dy = -1; dy <= 1 && !edge; ++dy) {
        for (int dx = -1; dx <= 1 && !edge; ++dx) {
          if (dx == 0 && dy == 0) continue;
          if (connectivity == 4 && dx != 0 && dy != 0) continue;
          const int nx = x + dx, ny = y + dy;
          if (!mask.in_bounds(nx, ny) || !mask.at(nx, ny)) edge = true;
        }
      }
      if (edge) contour.push_back({x, y});
    }
  }
  beeer::BinaryMask out(mask.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (const auto& c : contour) {
        const int dx = x - c.x, dy = y - c.y;
        if (dx * dx + dy * dy <= radius * radius) {
          out.at(x, y) = 1;
          break;
        }
      }
    }
  }
  return out;
}

/// Four error channels from separate full-image passes.
struct ErrorMasks {
  beeer::BinaryMask tp, tn, fp, fn;
};

inline ErrorMasks binary_error_bruteforce(const beeer::BinaryMask& pred,
                                          const beeer::BinaryMask& gt) {
  ErrorMasks em{beeer::BinaryMask(pred.size(), 0), beeer::BinaryMask(pred.size(), 0),
                beeer::BinaryMask(pred.size(), 0), beeer::BinaryMask(pred.size(), 0)};
  for (std::size_t i = 0; i < pred.values().size(); ++i) {
    const bool p = pred.values()[i] != 0, g = gt.values()[i] != 0;
    if (p && g) em.tp.values()[i] = 1;
    if (!p && !g) em.tn.values()[i] = 1;
    if (p && !g) em.fp.values()[i] = 1;
    if (!p && g) em.fn.values()[i] = 1;
  }
  return em;
}

struct OsnResult {
  beeer::Prf overlap;
  beeer::Prf boundary;
  double f75 = 0.0;
};

/// Instance metrics from per-id pixel sets and the exhaustive assignment.
inline OsnResult osn_bruteforce(const beeer::LabelMap& pred, const beeer::LabelMap& gt,
                                const beeer::BoundaryConfig& cfg) {
  OsnResult res;
  if (pred.empty() && gt.empty()) {
    res.overlap = res.boundary = {1.0, 1.0, 1.0};
    res.f75 = 1.0;
    return res;
  }
  if (pred.empty() || gt.empty()) return res;

  std::map<std::uint32_t, std::vector<std::size_t>> psets, gsets;
  for (std::size_t i = 0; i < pred.labels().size(); ++i) {
    if (pred.labels()[i]) psets[pred.labels()[i]].push_back(i);
    if (gt.labels()[i]) gsets[gt.labels()[i]].push_back(i);
  }
  std::vector<std::uint32_t> pids, gids;
  for (const auto& [id, s] : psets) pids.push_back(id);
  for (const auto& [id, s] : gsets) gids.push_back(id);
  const int n = static_cast<int>(pids.size()), m = static_cast<int>(gids.size());

  auto set_inter = [](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::size_t count = 0, ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
      if (a[ia] < b[ib]) {
        ++ia;
      } else if (b[ib] < a[ia]) {
        ++ib;
      } else {
        ++count, ++ia, ++ib;
      }
    }
    return count;
  };

  std::vector<std::vector<beeer::Prf>> omat(n, std::vector<beeer::Prf>(m));
  std::vector<std::vector<double>> fmat(n, std::vector<double>(m, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      const std::size_t inter = set_inter(psets[pids[i]], gsets[gids[j]]);
      const double p =
          psets[pids[i]].empty() ? 0.0 : static_cast<double>(inter) / psets[pids[i]].size();
      const double r =
          gsets[gids[j]].empty() ? 0.0 : static_cast<double>(inter) / gsets[gids[j]].size();
      const double f = (p + r > 0.0) ? 2.0 * p * r / (p + r) : 0.0;
      omat[i][j] = {p, r, f};
      fmat[i][j] = f;
    }
  }

  const beeer::Assignment a = assignment_bruteforce(fmat);

  std::vector<beeer::BinaryMask> pb, gb;
  for (int i = 0; i < n; ++i)
    pb.push_back(boundary_mask_bruteforce(pred.instance_mask(pids[i]), cfg.dilation_radius,
                                          cfg.connectivity));
  for (int j = 0; j < m; ++j)
    gb.push_back(boundary_mask_bruteforce(gt.instance_mask(gids[j]), cfg.dilation_radius,
                                          cfg.connectivity));

  std::size_t hits = 0;
  for (const auto& [i, j] : a.pairs) {
    res.overlap.p += omat[i][j].p;
    res.overlap.r += omat[i][j].r;
    res.overlap.f += omat[i][j].f;
    hits += (omat[i][j].f >= 0.75);

    std::size_t inter = 0, pa = 0, ga = 0;
    for (std::size_t k = 0; k < pb[i].values().size(); ++k) {
      inter += (pb[i].values()[k] && gb[j].values()[k]);
    }
    for (std::size_t k = 0; k < pb[i].values().size(); ++k) pa += pb[i].values()[k];
    for (std::size_t k = 0; k < gb[j].values().size(); ++k) ga += gb[j].values()[k];
    const double p = pa ? static_cast<double>(inter) / pa : 0.0;
    const double r = ga ? static_cast<double>(inter) / ga : 0.0;
    res.boundary.p += p;
    res.boundary.r += r;
    res.boundary.f += (p + r > 0.0) ? 2.0 * p * r / (p + r) : 0.0;
  }
  res.overlap.p /= n;
  res.overlap.r /= m;
  res.overlap.f /= std::max(n, m);
  res.boundary.p /= n;
  res.boundary.r /= m;
  res.boundary.f /= std::max(n, m);
  res.f75 = static_cast<double>(hits) / std::max(n, m);
  return res;
}

/// Peak filter by direct window rescan: keep a pixel when no window neighbor
/// beats it and no equal-valued neighbor precedes it in raster order.
inline std::vector<beeer::CenterPoint> nms_bruteforce(const beeer::CenterMap& cm,
                                                      double threshold, int window) {
  const int r = window / 2;
  std::vector<beeer::CenterPoint> out;
  for (int y = 0; y < cm.height(); ++y) {
    for (int x = 0; x < cm.width(); ++x) {
      const double v = cm.at(x, y);
      if (v < threshold) continue;
      bool keep = true;
      for (int ny = y - r; ny <= y + r && keep; ++ny) {
        for (int nx = x - r; nx <= x + r && keep; ++nx) {
          if (!cm.in_bounds(nx, ny) || (nx == x && ny == y)) continue;
          const double u = cm.at(nx, ny);
          if (u > v || (u == v && (ny < y || (ny == y && nx < x)))) keep = false;
        }
      }
      if (keep) out.push_back({x, y, v});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const beeer::CenterPoint& a, const beeer::CenterPoint& b) {
                     return a.score > b.score;
                   });
  return out;
}

}  // namespace oracle
