// Ground-truth perturbation: synthesizes flawed initial segmentations by
// removing instances, splitting them along random lines, corrupting their
// boundaries (contour subsampling plus random dilation or erosion), and
// injecting false positives taken from a Felzenszwalb-Huttenlocher graph
// segmentation of the RGB image.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "beeer/core.hpp"
#include "beeer/morphology.hpp"

namespace beeer {

struct FelzParams {
  double k = 500.0;
  int min_size = 200;
  double smoothing_sigma = 0.8;

  void validate() const {
    if (!(k > 0.0)) throw std::invalid_argument("FelzParams: k must be > 0");
    if (min_size < 1) throw std::invalid_argument("FelzParams: min_size must be >= 1");
  }
};

struct PerturbConfig {
  double p_boundary = 0.5;
  double subsample_keep_min = 0.1;
  double subsample_keep_max = 0.5;
  int morph_radius_min = 1;
  int morph_radius_max = 5;
  double p_remove = 0.15;
  double p_split = 0.15;
  double p_add_fp = 0.5;
  int max_added_fp = 2;
  double fp_max_overlap = 0.1;
  FelzParams felz;
  std::uint64_t seed = 0;

  void validate() const {
    auto prob = [](double p, const char* name) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument(std::string("PerturbConfig: ") + name +
                                    " must be in [0,1]");
      }
    };
    prob(p_boundary, "p_boundary");
    prob(p_remove, "p_remove");
    prob(p_split, "p_split");
    prob(p_add_fp, "p_add_fp");
    prob(fp_max_overlap, "fp_max_overlap");
    if (!(subsample_keep_min > 0.0 && subsample_keep_min <= subsample_keep_max &&
          subsample_keep_max <= 1.0)) {
      throw std::invalid_argument("PerturbConfig: subsample_keep range must satisfy 0 < min <= max <= 1");
    }
    if (morph_radius_min < 0 || morph_radius_min > morph_radius_max) {
      throw std::invalid_argument("PerturbConfig: morph_radius range must satisfy 0 <= min <= max");
    }
    if (max_added_fp < 1) {
      throw std::invalid_argument("PerturbConfig: max_added_fp must be >= 1");
    }
    felz.validate();
  }
};

// ---------------------------------------------------------------------------
// Felzenszwalb-Huttenlocher graph segmentation
// ---------------------------------------------------------------------------

namespace detail {

/// Separable Gaussian smoothing with replicated borders. sigma <= 0 is a
/// no-op. Kernel support is 4 sigma on each side.
inline void gaussian_smooth(std::vector<double>& plane, ImageSize size, double sigma) {
  if (!(sigma > 0.0)) return;
  const int half = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> kernel(half + 1);
  for (int i = 0; i <= half; ++i) kernel[i] = std::exp(-0.5 * (i / sigma) * (i / sigma));
  double norm = kernel[0];
  for (int i = 1; i <= half; ++i) norm += 2.0 * kernel[i];
  for (auto& v : kernel) v /= norm;

  const int w = size.width, h = size.height;
  std::vector<double> tmp(plane.size());
  for (int y = 0; y < h; ++y) {
    const double* row = plane.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      double acc = kernel[0] * row[x];
      for (int i = 1; i <= half; ++i) {
        acc += kernel[i] * (row[std::clamp(x - i, 0, w - 1)] + row[std::clamp(x + i, 0, w - 1)]);
      }
      tmp[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) {
      double acc = kernel[0] * tmp[static_cast<std::size_t>(y) * w + x];
      for (int i = 1; i <= half; ++i) {
        acc += kernel[i] * (tmp[static_cast<std::size_t>(std::clamp(y - i, 0, h - 1)) * w + x] +
                            tmp[static_cast<std::size_t>(std::clamp(y + i, 0, h - 1)) * w + x]);
      }
      plane[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
}

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n), rank_(n, 0), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  std::size_t unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    if (rank_[a] == rank_[b]) ++rank_[a];
    parent_[b] = a;
    size_[a] += size_[b];
    return a;
  }

  std::size_t size(std::size_t x) { return size_[find(x)]; }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
  std::vector<std::size_t> size_;
};

struct FelzEdge {
  std::uint32_t a, b;
  float weight;
};

}  // namespace detail

/// Graph-based segmentation: 8-connected pixel graph, RGB Euclidean edge
/// weights after Gaussian smoothing, edges merged in ascending weight when
/// the weight does not exceed either component's internal threshold
/// (min internal difference + k / size), then components below min_size
/// merged in a second pass. Output labels are canonical; ties follow the
/// fixed edge construction order, so results are fully deterministic.
inline LabelMap felzenszwalb(const RgbImage& rgb, const FelzParams& p = {}) {
  p.validate();
  const int w = rgb.width(), h = rgb.height();
  const std::size_t n = rgb.size().pixel_count();

  std::vector<double> r(n), g(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = rgb.values()[i].r;
    g[i] = rgb.values()[i].g;
    b[i] = rgb.values()[i].b;
  }
  detail::gaussian_smooth(r, rgb.size(), p.smoothing_sigma);
  detail::gaussian_smooth(g, rgb.size(), p.smoothing_sigma);
  detail::gaussian_smooth(b, rgb.size(), p.smoothing_sigma);

  auto weight = [&](std::size_t i, std::size_t j) {
    const double dr = r[i] - r[j], dg = g[i] - g[j], db = b[i] - b[j];
    return static_cast<float>(std::sqrt(dr * dr + dg * dg + db * db));
  };

  // Each 8-neighborhood edge exactly once: E, S, SE, SW per pixel.
  std::vector<detail::FelzEdge> edges;
  edges.reserve(4 * n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint32_t i = static_cast<std::uint32_t>(y) * w + x;
      if (x + 1 < w) edges.push_back({i, i + 1, weight(i, i + 1)});
      if (y + 1 < h) edges.push_back({i, i + w, weight(i, i + w)});
      if (x + 1 < w && y + 1 < h) edges.push_back({i, i + w + 1, weight(i, i + w + 1)});
      if (x > 0 && y + 1 < h) edges.push_back({i, i + w - 1, weight(i, i + w - 1)});
    }
  }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const detail::FelzEdge& a, const detail::FelzEdge& b) {
                     return a.weight < b.weight;
                   });

  detail::DisjointSet dsu(n);
  std::vector<double> threshold(n, p.k);
  for (const auto& e : edges) {
    const std::size_t ra = dsu.find(e.a), rb = dsu.find(e.b);
    if (ra == rb) continue;
    if (e.weight <= threshold[ra] && e.weight <= threshold[rb]) {
      const std::size_t root = dsu.unite(ra, rb);
      threshold[root] = e.weight + p.k / static_cast<double>(dsu.size(root));
    }
  }
  for (const auto& e : edges) {
    const std::size_t ra = dsu.find(e.a), rb = dsu.find(e.b);
    if (ra == rb) continue;
    if (dsu.size(ra) < static_cast<std::size_t>(p.min_size) ||
        dsu.size(rb) < static_cast<std::size_t>(p.min_size)) {
      dsu.unite(ra, rb);
    }
  }

  Grid<std::uint32_t> out(rgb.size(), 0u);
  std::unordered_map<std::size_t, std::uint32_t> remap;
  std::uint32_t next_id = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t root = dsu.find(i);
    auto it = remap.find(root);
    if (it == remap.end()) it = remap.emplace(root, ++next_id).first;
    out.values()[i] = it->second;
  }
  return LabelMap(std::move(out));
}

// ---------------------------------------------------------------------------
// Perturbation primitives
// ---------------------------------------------------------------------------

/// Corrupt a mask's boundary: per connected component, trace the contour,
/// keep every ceil(1/keep)-th vertex (never fewer than three), refill the
/// simplified polygon; then apply one random dilation or erosion with radius
/// drawn from [radius_min, radius_max]. A mask whose components all have
/// fewer than three contour points returns unchanged without consuming
/// randomness.
inline BinaryMask perturb_boundary(const BinaryMask& mask, double keep, int radius_min,
                                   int radius_max, Rng& rng) {
  if (!(keep > 0.0 && keep <= 1.0)) {
    throw std::invalid_argument("perturb_boundary: keep must be in (0,1]");
  }
  if (radius_min < 0 || radius_min > radius_max) {
    throw std::invalid_argument("perturb_boundary: bad radius range");
  }

  BinaryMask simplified(mask.size(), 0);
  bool any_polygon = false;
  if (keep >= 1.0) {
    simplified = mask;
    any_polygon = count_true(mask) > 0;
  } else {
    const LabelMap comps = connected_components(mask, 8);
    for (std::uint32_t id : comps.ids()) {
      const BinaryMask comp = comps.instance_mask(id);
      const std::vector<PixelCoord> contour = trace_contour(comp);
      if (contour.size() < 3) {
        for (std::size_t i = 0; i < comp.values().size(); ++i)
          if (comp.values()[i]) simplified.values()[i] = 1;
        continue;
      }
      any_polygon = true;
      std::size_t step = static_cast<std::size_t>(std::ceil(1.0 / keep));
      step = std::min(step, std::max<std::size_t>(1, contour.size() / 3));
      std::vector<PixelCoord> poly;
      for (std::size_t i = 0; i < contour.size(); i += step) poly.push_back(contour[i]);
      const BinaryMask filled = fill_polygon(mask.size(), poly);
      for (std::size_t i = 0; i < filled.values().size(); ++i)
        if (filled.values()[i]) simplified.values()[i] = 1;
    }
  }
  if (!any_polygon) return mask;

  const bool grow = rng.bernoulli(0.5);
  const int radius = static_cast<int>(rng.uniform_int(radius_min, radius_max));
  return grow ? dilate(simplified, radius) : erode(simplified, radius);
}

/// Partition one instance along a random line through its centroid (angle
/// uniform in [0, pi)); the half on the negative side of the line normal
/// becomes a new instance with id max+1. A split that would leave either
/// side empty is a no-op.
inline LabelMap split_instance(const LabelMap& lm, std::uint32_t id, Rng& rng) {
  if (!lm.has_id(id)) {
    throw std::invalid_argument("split_instance: id " + std::to_string(id) +
                                " not present in label map");
  }
  double cx = 0, cy = 0;
  std::size_t n = 0;
  for (int y = 0; y < lm.height(); ++y)
    for (int x = 0; x < lm.width(); ++x)
      if (lm.at(x, y) == id) {
        cx += x;
        cy += y;
        ++n;
      }
  cx /= static_cast<double>(n);
  cy /= static_cast<double>(n);

  const double angle = rng.uniform(0.0, std::numbers::pi);
  const double nx = -std::sin(angle), ny = std::cos(angle);

  const std::uint32_t new_id = lm.ids().back() + 1;
  Grid<std::uint32_t> out(lm.size(), 0u);
  out.values() = lm.labels();
  std::size_t moved = 0;
  for (int y = 0; y < lm.height(); ++y)
    for (int x = 0; x < lm.width(); ++x) {
      if (lm.at(x, y) != id) continue;
      if (nx * (x - cx) + ny * (y - cy) < 0.0) {
        out.at(x, y) = new_id;
        ++moved;
      }
    }
  if (moved == 0 || moved == n) return lm;
  return LabelMap(std::move(out));
}

namespace detail {

/// Add up to one segment of a precomputed segmentation as a new instance.
/// Candidates overlap the current foreground on less than max_overlap of
/// their own area; one is chosen uniformly. Returns false when no candidate
/// exists (no randomness consumed).
inline bool add_fp_from_segments(LabelMap& lm, const LabelMap& segments, double max_overlap,
                                 Rng& rng) {
  const auto& ids = segments.ids();
  std::vector<std::size_t> seg_area(ids.size(), 0), seg_fg(ids.size(), 0);
  for (std::size_t i = 0; i < segments.labels().size(); ++i) {
    const std::uint32_t s = segments.labels()[i];
    if (s == 0) continue;
    const std::size_t k =
        static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), s) - ids.begin());
    ++seg_area[k];
    if (lm.labels()[i] != 0) ++seg_fg[k];
  }
  std::vector<std::uint32_t> candidates;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (static_cast<double>(seg_fg[k]) < max_overlap * static_cast<double>(seg_area[k])) {
      candidates.push_back(ids[k]);
    }
  }
  if (candidates.empty()) return false;

  const std::uint32_t pick =
      candidates[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(candidates.size()) - 1))];
  const std::uint32_t new_id = lm.empty() ? 1 : lm.ids().back() + 1;
  Grid<std::uint32_t> out = lm.grid();
  for (std::size_t i = 0; i < out.values().size(); ++i) {
    if (segments.labels()[i] == pick && out.values()[i] == 0) out.values()[i] = new_id;
  }
  lm = LabelMap(std::move(out));
  return true;
}

}  // namespace detail

/// Segment the RGB image and graft one low-foreground-overlap segment onto
/// the label map as a spurious instance. No qualifying segment leaves the
/// map unchanged.
inline LabelMap add_false_positive(const LabelMap& lm, const RgbImage& rgb, const FelzParams& p,
                                   Rng& rng, double max_overlap = 0.1) {
  require_same_size(lm.size(), rgb.size(), "add_false_positive");
  LabelMap out = lm;
  detail::add_fp_from_segments(out, felzenszwalb(rgb, p), max_overlap, rng);
  return out;
}

/// Full perturbation pipeline over one scene, in fixed stage order:
/// per-instance removal, per-instance splitting, per-instance boundary
/// corruption, then image-level false-positive injection. Instance masks are
/// re-rasterized in ascending id order with later writers winning overlaps;
/// the result is canonical-relabeled. One Rng seeded from cfg.seed drives
/// every draw, so identical inputs give identical outputs.
inline LabelMap perturb(const LabelMap& gt, const RgbImage& rgb, const PerturbConfig& cfg) {
  cfg.validate();
  require_same_size(gt.size(), rgb.size(), "perturb");
  Rng rng(cfg.seed);

  Grid<std::uint32_t> kept(gt.size(), 0u);
  kept.values() = gt.labels();
  for (std::uint32_t id : gt.ids()) {
    if (rng.bernoulli(cfg.p_remove)) {
      for (auto& v : kept.values())
        if (v == id) v = 0;
    }
  }
  LabelMap current(std::move(kept));

  for (std::uint32_t id : std::vector<std::uint32_t>(current.ids())) {
    if (rng.bernoulli(cfg.p_split)) current = split_instance(current, id, rng);
  }

  Grid<std::uint32_t> canvas(gt.size(), 0u);
  for (std::uint32_t id : current.ids()) {
    BinaryMask mask = current.instance_mask(id);
    if (rng.bernoulli(cfg.p_boundary)) {
      const double keep = rng.uniform(cfg.subsample_keep_min, cfg.subsample_keep_max);
      mask = perturb_boundary(mask, keep, cfg.morph_radius_min, cfg.morph_radius_max, rng);
    }
    for (std::size_t i = 0; i < mask.values().size(); ++i)
      if (mask.values()[i]) canvas.values()[i] = id;
  }
  current = LabelMap(std::move(canvas));

  if (rng.bernoulli(cfg.p_add_fp)) {
    const int count = static_cast<int>(rng.uniform_int(1, cfg.max_added_fp));
    const LabelMap segments = felzenszwalb(rgb, cfg.felz);
    for (int i = 0; i < count; ++i) {
      if (!detail::add_fp_from_segments(current, segments, cfg.fp_max_overlap, rng)) break;
    }
  }

  return relabel_canonical(current);
}

}  // namespace beeer
