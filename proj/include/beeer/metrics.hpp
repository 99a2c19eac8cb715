// Object-size-normalized evaluation: pairwise P/R/F between instance masks,
// an exact Hungarian assignment over the pairwise-F matrix, overlap and
// boundary OSN metrics, and the F@.75 detection fraction.
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "beeer/core.hpp"
#include "beeer/errors.hpp"
#include "beeer/morphology.hpp"

namespace beeer {

struct Assignment {
  std::vector<std::pair<int, int>> pairs;  // (pred index, gt index), row-ascending
  int n_pred = 0;
  int n_gt = 0;
};

struct Prf {
  double p = 0.0;
  double r = 0.0;
  double f = 0.0;
};

struct MetricsReport {
  double overlap_p = 0.0, overlap_r = 0.0, overlap_f = 0.0;
  double boundary_p = 0.0, boundary_r = 0.0, boundary_f = 0.0;
  double f_at_75 = 0.0;
  int n_pred = 0;
  int n_gt = 0;
};

inline Prf pairwise_prf_counts(std::size_t inter, std::size_t pred_area, std::size_t gt_area) {
  Prf out;
  out.p = pred_area ? static_cast<double>(inter) / static_cast<double>(pred_area) : 0.0;
  out.r = gt_area ? static_cast<double>(inter) / static_cast<double>(gt_area) : 0.0;
  out.f = (out.p + out.r > 0.0) ? 2.0 * out.p * out.r / (out.p + out.r) : 0.0;
  return out;
}

inline Prf pairwise_prf(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_size(pred.size(), gt.size(), "pairwise_prf");
  std::size_t inter = 0, pa = 0, ga = 0;
  for (std::size_t i = 0; i < pred.values().size(); ++i) {
    const bool p = pred.values()[i] != 0, g = gt.values()[i] != 0;
    inter += (p && g);
    pa += p;
    ga += g;
  }
  return pairwise_prf_counts(inter, pa, ga);
}

namespace detail {

/// Exact rectangular Kuhn-Munkres (potentials form). Maximizes the summed
/// score over full-size matchings (every row matched when rows <= cols).
/// Returns col -> row (-1 for unmatched cols).
inline std::vector<int> km_solve_rows_le_cols(const std::vector<std::vector<double>>& score,
                                              int n, int m) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = -score[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> col_to_row(m, -1);
  for (int j = 1; j <= m; ++j)
    if (p[j] != 0) col_to_row[j - 1] = p[j] - 1;
  return col_to_row;
}

/// Maximum total score of a matching of size min(|rows|, |cols|) over the
/// given row/col subsets.
inline double km_value(const std::vector<std::vector<double>>& score,
                       const std::vector<int>& rows, const std::vector<int>& cols) {
  if (rows.empty() || cols.empty()) return 0.0;
  const int n = static_cast<int>(rows.size());
  const int m = static_cast<int>(cols.size());
  std::vector<std::vector<double>> sub(std::min(n, m),
                                       std::vector<double>(std::max(n, m), 0.0));
  const bool transposed = n > m;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const double s = score[rows[i]][cols[j]];
      if (transposed) {
        sub[j][i] = s;
      } else {
        sub[i][j] = s;
      }
    }
  const auto col_to_row = km_solve_rows_le_cols(sub, static_cast<int>(sub.size()),
                                                static_cast<int>(sub[0].size()));
  double total = 0.0;
  for (std::size_t j = 0; j < col_to_row.size(); ++j)
    if (col_to_row[j] >= 0) total += sub[col_to_row[j]][j];
  return total;
}

}  // namespace detail

/// Assignment maximizing the summed score over one-to-one matchings of size
/// min(N, M). Among assignments whose total is within tie_eps of the
/// maximum, the lexicographically smallest row-ascending pair list is
/// returned, so equal-scoring matchings resolve identically everywhere.
inline Assignment hungarian_max(const std::vector<std::vector<double>>& score,
                                double tie_eps = 1e-7) {
  Assignment out;
  out.n_pred = static_cast<int>(score.size());
  out.n_gt = score.empty() ? 0 : static_cast<int>(score[0].size());
  const int n = out.n_pred, m = out.n_gt;
  if (n == 0 || m == 0) return out;
  for (const auto& row : score) {
    if (static_cast<int>(row.size()) != m) {
      throw std::invalid_argument("hungarian_max: ragged score matrix");
    }
  }

  std::vector<int> all_rows(n), all_cols(m);
  for (int i = 0; i < n; ++i) all_rows[i] = i;
  for (int j = 0; j < m; ++j) all_cols[j] = j;
  const double best = detail::km_value(score, all_rows, all_cols);

  // Fix pairs greedily: row by row, the smallest column that still admits a
  // completion within tie_eps of the optimum. A row stays unmatched only
  // when no column does (possible only while rows outnumber columns).
  std::vector<int> free_cols = all_cols;
  double fixed_sum = 0.0;
  for (int r = 0; r < n; ++r) {
    std::vector<int> rest_rows;
    for (int i = r + 1; i < n; ++i) rest_rows.push_back(i);
    int chosen = -1;
    for (std::size_t ci = 0; ci < free_cols.size(); ++ci) {
      const int c = free_cols[ci];
      std::vector<int> rest_cols;
      for (std::size_t cj = 0; cj < free_cols.size(); ++cj)
        if (cj != ci) rest_cols.push_back(free_cols[cj]);
      const double total =
          fixed_sum + score[r][c] + detail::km_value(score, rest_rows, rest_cols);
      if (total >= best - tie_eps) {
        chosen = c;
        break;
      }
    }
    if (chosen >= 0) {
      out.pairs.emplace_back(r, chosen);
      fixed_sum += score[r][chosen];
      free_cols.erase(std::find(free_cols.begin(), free_cols.end(), chosen));
    }
  }
  return out;
}

namespace detail {

struct PairCounts {
  std::vector<std::size_t> pred_area;          // aligned with pred.ids()
  std::vector<std::size_t> gt_area;            // aligned with gt.ids()
  std::vector<std::vector<std::size_t>> inter; // [pred][gt]
};

/// Maps instance ids to their rank in the sorted roster. Dense table for
/// the usual small canonical ids, binary search otherwise.
class IdRank {
 public:
  explicit IdRank(const std::vector<std::uint32_t>& ids) : ids_(ids) {
    if (!ids.empty() && ids.back() <= 65535) {
      dense_.assign(ids.back() + 1, 0);
      for (std::size_t k = 0; k < ids.size(); ++k) dense_[ids[k]] = static_cast<std::uint32_t>(k);
    }
  }
  std::size_t operator()(std::uint32_t id) const {
    if (!dense_.empty()) return dense_[id];
    return static_cast<std::size_t>(std::lower_bound(ids_.begin(), ids_.end(), id) -
                                    ids_.begin());
  }

 private:
  const std::vector<std::uint32_t>& ids_;
  std::vector<std::uint32_t> dense_;
};

inline PairCounts overlap_counts(const LabelMap& pred, const LabelMap& gt) {
  PairCounts pc;
  pc.pred_area.assign(pred.ids().size(), 0);
  pc.gt_area.assign(gt.ids().size(), 0);
  pc.inter.assign(pred.ids().size(), std::vector<std::size_t>(gt.ids().size(), 0));
  const IdRank prank(pred.ids()), grank(gt.ids());

  for (std::size_t i = 0; i < pred.labels().size(); ++i) {
    const std::uint32_t pv = pred.labels()[i];
    const std::uint32_t gv = gt.labels()[i];
    if (pv != 0) ++pc.pred_area[prank(pv)];
    if (gv != 0) ++pc.gt_area[grank(gv)];
    if (pv != 0 && gv != 0) ++pc.inter[prank(pv)][grank(gv)];
  }
  return pc;
}

/// One dilated-contour bitmap per instance, plus the covered pixel indices.
/// A pixel is on its instance's contour when a cfg.connectivity neighbor
/// has a different label or lies outside the image.
struct InstanceBoundaries {
  std::vector<BinaryMask> bitmap;
  std::vector<std::vector<std::uint32_t>> pixels;
};

inline InstanceBoundaries instance_boundaries(const LabelMap& lm, const BoundaryConfig& cfg) {
  cfg.validate();
  static constexpr int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int ndirs = (cfg.connectivity == 4) ? 4 : 8;
  const IdRank rank(lm.ids());

  std::vector<std::vector<PixelCoord>> contours(lm.ids().size());
  for (int y = 0; y < lm.height(); ++y) {
    for (int x = 0; x < lm.width(); ++x) {
      const std::uint32_t v = lm.at(x, y);
      if (v == 0) continue;
      for (int d = 0; d < ndirs; ++d) {
        const int nx = x + dx8[d], ny = y + dy8[d];
        if (!lm.in_bounds(nx, ny) || lm.at(nx, ny) != v) {
          contours[rank(v)].push_back({x, y});
          break;
        }
      }
    }
  }

  const auto offs = disk_offsets(cfg.dilation_radius);
  InstanceBoundaries out;
  out.bitmap.assign(lm.ids().size(), BinaryMask(lm.size(), 0));
  out.pixels.resize(lm.ids().size());
  for (std::size_t k = 0; k < contours.size(); ++k) {
    BinaryMask& bm = out.bitmap[k];
    for (const PixelCoord& p : contours[k]) {
      for (const PixelCoord& o : offs) {
        const int nx = p.x + o.x, ny = p.y + o.y;
        if (!bm.in_bounds(nx, ny) || bm.at(nx, ny)) continue;
        bm.at(nx, ny) = 1;
        out.pixels[k].push_back(static_cast<std::uint32_t>(bm.index(nx, ny)));
      }
    }
  }
  return out;
}

inline PairCounts boundary_counts(const LabelMap& pred, const LabelMap& gt,
                                  const BoundaryConfig& cfg) {
  const InstanceBoundaries pb = instance_boundaries(pred, cfg);
  const InstanceBoundaries gb = instance_boundaries(gt, cfg);
  PairCounts pc;
  pc.pred_area.resize(pb.pixels.size());
  pc.gt_area.resize(gb.pixels.size());
  pc.inter.assign(pb.pixels.size(), std::vector<std::size_t>(gb.pixels.size(), 0));
  for (std::size_t i = 0; i < pb.pixels.size(); ++i) pc.pred_area[i] = pb.pixels[i].size();
  for (std::size_t j = 0; j < gb.pixels.size(); ++j) pc.gt_area[j] = gb.pixels[j].size();
  for (std::size_t i = 0; i < pb.pixels.size(); ++i) {
    for (std::size_t j = 0; j < gb.pixels.size(); ++j) {
      const auto& bits = gb.bitmap[j].values();
      std::size_t n = 0;
      for (const std::uint32_t idx : pb.pixels[i]) n += bits[idx];
      pc.inter[i][j] = n;
    }
  }
  return pc;
}

inline std::vector<std::vector<Prf>> prf_matrix(const PairCounts& pc) {
  std::vector<std::vector<Prf>> m(pc.pred_area.size(),
                                  std::vector<Prf>(pc.gt_area.size()));
  for (std::size_t i = 0; i < pc.pred_area.size(); ++i)
    for (std::size_t j = 0; j < pc.gt_area.size(); ++j)
      m[i][j] = pairwise_prf_counts(pc.inter[i][j], pc.pred_area[i], pc.gt_area[j]);
  return m;
}

/// OSN normalization of assigned pairwise sums: P by N, R by M, F by max.
inline Prf osn_from_pairs(const std::vector<std::vector<Prf>>& prf, const Assignment& a) {
  Prf out;
  for (const auto& [i, j] : a.pairs) {
    out.p += prf[i][j].p;
    out.r += prf[i][j].r;
    out.f += prf[i][j].f;
  }
  out.p /= static_cast<double>(a.n_pred);
  out.r /= static_cast<double>(a.n_gt);
  out.f /= static_cast<double>(std::max(a.n_pred, a.n_gt));
  return out;
}

inline Assignment assignment_on_f(const std::vector<std::vector<Prf>>& prf) {
  std::vector<std::vector<double>> f(prf.size());
  for (std::size_t i = 0; i < prf.size(); ++i) {
    f[i].resize(prf[i].size());
    for (std::size_t j = 0; j < prf[i].size(); ++j) f[i][j] = prf[i][j].f;
  }
  return hungarian_max(f);
}

}  // namespace detail

/// Full metric suite in one pass: the Hungarian assignment is computed once
/// on overlap F and reused for the boundary sums and F@.75.
inline MetricsReport compute_metrics(const LabelMap& pred, const LabelMap& gt,
                                     const BoundaryConfig& cfg = {}) {
  require_same_size(pred.size(), gt.size(), "compute_metrics");
  MetricsReport rep;
  rep.n_pred = static_cast<int>(pred.instance_count());
  rep.n_gt = static_cast<int>(gt.instance_count());
  if (rep.n_pred == 0 && rep.n_gt == 0) {
    rep.overlap_p = rep.overlap_r = rep.overlap_f = 1.0;
    rep.boundary_p = rep.boundary_r = rep.boundary_f = 1.0;
    rep.f_at_75 = 1.0;
    return rep;
  }
  if (rep.n_pred == 0 || rep.n_gt == 0) return rep;

  const auto overlap_prf = detail::prf_matrix(detail::overlap_counts(pred, gt));
  const Assignment a = detail::assignment_on_f(overlap_prf);
  const Prf o = detail::osn_from_pairs(overlap_prf, a);
  rep.overlap_p = o.p;
  rep.overlap_r = o.r;
  rep.overlap_f = o.f;

  const auto boundary_prf = detail::prf_matrix(detail::boundary_counts(pred, gt, cfg));
  const Prf b = detail::osn_from_pairs(boundary_prf, a);
  rep.boundary_p = b.p;
  rep.boundary_r = b.r;
  rep.boundary_f = b.f;

  std::size_t hits = 0;
  for (const auto& [i, j] : a.pairs) hits += (overlap_prf[i][j].f >= 0.75);
  rep.f_at_75 = static_cast<double>(hits) / static_cast<double>(std::max(rep.n_pred, rep.n_gt));
  return rep;
}

/// Overlap-based OSN precision/recall/F. Empty vs empty scores (1,1,1);
/// exactly one side empty scores (0,0,0).
inline Prf osn_overlap(const LabelMap& pred, const LabelMap& gt) {
  require_same_size(pred.size(), gt.size(), "osn_overlap");
  if (pred.empty() && gt.empty()) return {1.0, 1.0, 1.0};
  if (pred.empty() || gt.empty()) return {0.0, 0.0, 0.0};
  const auto prf = detail::prf_matrix(detail::overlap_counts(pred, gt));
  return detail::osn_from_pairs(prf, detail::assignment_on_f(prf));
}

/// Boundary OSN metrics on per-instance dilated contours; the assignment is
/// the overlap-F assignment so the two rows describe the same matching.
inline Prf osn_boundary(const LabelMap& pred, const LabelMap& gt,
                        const BoundaryConfig& cfg = {}) {
  require_same_size(pred.size(), gt.size(), "osn_boundary");
  if (pred.empty() && gt.empty()) return {1.0, 1.0, 1.0};
  if (pred.empty() || gt.empty()) return {0.0, 0.0, 0.0};
  const auto overlap_prf = detail::prf_matrix(detail::overlap_counts(pred, gt));
  const Assignment a = detail::assignment_on_f(overlap_prf);
  const auto boundary_prf = detail::prf_matrix(detail::boundary_counts(pred, gt, cfg));
  return detail::osn_from_pairs(boundary_prf, a);
}

/// Fraction of assigned pairs with pairwise overlap F >= 0.75, normalized by
/// max(M, N). Empty vs empty is a perfect 1.
inline double f_at_75(const LabelMap& pred, const LabelMap& gt) {
  require_same_size(pred.size(), gt.size(), "f_at_75");
  if (pred.empty() && gt.empty()) return 1.0;
  if (pred.empty() || gt.empty()) return 0.0;
  const auto prf = detail::prf_matrix(detail::overlap_counts(pred, gt));
  const Assignment a = detail::assignment_on_f(prf);
  std::size_t hits = 0;
  for (const auto& [i, j] : a.pairs) hits += (prf[i][j].f >= 0.75);
  return static_cast<double>(hits) /
         static_cast<double>(std::max(pred.instance_count(), gt.instance_count()));
}

}  // namespace beeer
