// Core raster types shared by every module: grids, label maps, binary masks,
// and the deterministic RNG used for reproducible perturbations.
//
// Raster convention: row-major, origin at the top-left, x grows rightward,
// y grows downward. Instance ids are non-negative, 0 is background.
#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace beeer {

struct ImageSize {
  int width = 0;
  int height = 0;

  bool operator==(const ImageSize&) const = default;
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  std::string str() const {
    return std::to_string(width) + "x" + std::to_string(height);
  }
};

inline void require_same_size(const ImageSize& a, const ImageSize& b, const char* what) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string(what) + ": size mismatch (" + a.str() +
                                " vs " + b.str() + ")");
  }
}

/// Dense row-major grid of T. Value type; equality compares contents.
template <typename T>
class Grid {
 public:
  Grid() = default;

  explicit Grid(ImageSize size, T fill = T{}) : size_(size) {
    check_size(size);
    values_.assign(size.pixel_count(), fill);
  }

  Grid(ImageSize size, std::vector<T> values) : size_(size), values_(std::move(values)) {
    check_size(size);
    if (values_.size() != size.pixel_count()) {
      throw std::invalid_argument("Grid: value count does not match " + size.str());
    }
  }

  ImageSize size() const { return size_; }
  int width() const { return size_.width; }
  int height() const { return size_.height; }

  bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < size_.width && y < size_.height;
  }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * size_.width + x;
  }

  T at(int x, int y) const { return values_[index(x, y)]; }
  T& at(int x, int y) { return values_[index(x, y)]; }

  const std::vector<T>& values() const { return values_; }
  std::vector<T>& values() { return values_; }

  bool operator==(const Grid&) const = default;

 private:
  static void check_size(const ImageSize& size) {
    if (size.width < 1 || size.height < 1) {
      throw std::invalid_argument("Grid: dimensions must be at least 1x1, got " + size.str());
    }
  }

  ImageSize size_;
  std::vector<T> values_;
};

/// 0/1 per pixel. Kept as bytes (not vector<bool>) for sane iteration.
using BinaryMask = Grid<std::uint8_t>;

inline std::size_t count_true(const BinaryMask& m) {
  std::size_t n = 0;
  for (auto v : m.values()) n += (v != 0);
  return n;
}

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

using RgbImage = Grid<Rgb>;

/// Depth in millimeters.
using DepthImage = Grid<std::uint16_t>;

/// Per-pixel instance-id grid. The id roster (sorted distinct nonzero ids)
/// is computed at construction; the map is immutable afterwards.
class LabelMap {
 public:
  LabelMap() = default;

  explicit LabelMap(ImageSize size) : grid_(size, 0u) {}

  LabelMap(ImageSize size, std::vector<std::uint32_t> labels)
      : grid_(size, std::move(labels)) {
    rebuild_roster();
  }

  explicit LabelMap(Grid<std::uint32_t> grid) : grid_(std::move(grid)) { rebuild_roster(); }

  ImageSize size() const { return grid_.size(); }
  int width() const { return grid_.width(); }
  int height() const { return grid_.height(); }

  std::uint32_t at(int x, int y) const { return grid_.at(x, y); }
  std::size_t index(int x, int y) const { return grid_.index(x, y); }
  bool in_bounds(int x, int y) const { return grid_.in_bounds(x, y); }

  const std::vector<std::uint32_t>& labels() const { return grid_.values(); }
  const Grid<std::uint32_t>& grid() const { return grid_; }

  /// Sorted distinct nonzero ids present in the map.
  const std::vector<std::uint32_t>& ids() const { return ids_; }
  std::size_t instance_count() const { return ids_.size(); }
  bool has_id(std::uint32_t id) const {
    return std::binary_search(ids_.begin(), ids_.end(), id);
  }
  bool empty() const { return ids_.empty(); }

  BinaryMask instance_mask(std::uint32_t id) const {
    BinaryMask m(size(), 0);
    for (std::size_t i = 0; i < labels().size(); ++i) m.values()[i] = (labels()[i] == id);
    return m;
  }

  /// Foreground = any nonzero id.
  BinaryMask foreground() const {
    BinaryMask m(size(), 0);
    for (std::size_t i = 0; i < labels().size(); ++i) m.values()[i] = (labels()[i] != 0);
    return m;
  }

  bool operator==(const LabelMap& other) const { return grid_ == other.grid_; }

 private:
  void rebuild_roster() {
    std::unordered_set<std::uint32_t> seen;
    for (auto v : grid_.values())
      if (v != 0) seen.insert(v);
    ids_.assign(seen.begin(), seen.end());
    std::sort(ids_.begin(), ids_.end());
  }

  Grid<std::uint32_t> grid_;
  std::vector<std::uint32_t> ids_;
};

/// Pixel counts per instance id, aligned with lm.ids().
inline std::vector<std::size_t> instance_sizes(const LabelMap& lm) {
  std::vector<std::size_t> sizes(lm.ids().size(), 0);
  const auto& ids = lm.ids();
  for (auto v : lm.labels()) {
    if (v == 0) continue;
    auto it = std::lower_bound(ids.begin(), ids.end(), v);
    sizes[static_cast<std::size_t>(it - ids.begin())]++;
  }
  return sizes;
}

// ---------------------------------------------------------------------------
// Deterministic randomness
// ---------------------------------------------------------------------------

/// Deterministic RNG with a platform-stable stream. The core generator is
/// std::mt19937_64 (bit-exact across platforms by the standard); all derived
/// draws (uniform reals, bounded ints, coin flips) are defined here rather
/// than through std <random> distributions, whose streams are
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + uniform01() * (hi - lo); }

  /// Uniform integer in [lo, hi], inclusive. Unbiased via rejection: a draw
  /// whose bucket of `range` values would wrap past 2^64 is discarded.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw std::invalid_argument("Rng::uniform_int: empty range");
    const std::uint64_t range = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(next_u64());  // full 64-bit span
    std::uint64_t x, rem;
    do {
      x = next_u64();
      rem = x % range;
    } while (x - rem > UINT64_MAX - (range - 1));
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + rem);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Child stream for (seed, stream_index); independent of draws taken so far.
  Rng derive(std::uint64_t stream_index) const {
    return Rng(splitmix64(seed_ + 0x9E3779B97F4A7C15ULL * (stream_index + 1)));
  }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Label-map operations
// ---------------------------------------------------------------------------

/// Label maximal connected true-regions with ids 1..K, in raster order of
/// first occurrence. connectivity is 4 or 8.
inline LabelMap connected_components(const BinaryMask& mask, int connectivity = 8) {
  if (connectivity != 4 && connectivity != 8) {
    throw std::invalid_argument("connected_components: connectivity must be 4 or 8");
  }
  const int w = mask.width(), h = mask.height();
  Grid<std::uint32_t> out(mask.size(), 0u);
  static constexpr int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int ndirs = (connectivity == 4) ? 4 : 8;

  std::uint32_t next_id = 0;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y) || out.at(x, y) != 0) continue;
      ++next_id;
      out.at(x, y) = next_id;
      stack.push_back({x, y});
      while (!stack.empty()) {
        auto [cx, cy] = stack.back();
        stack.pop_back();
        for (int d = 0; d < ndirs; ++d) {
          const int nx = cx + dx8[d], ny = cy + dy8[d];
          if (!mask.in_bounds(nx, ny) || !mask.at(nx, ny) || out.at(nx, ny) != 0) continue;
          out.at(nx, ny) = next_id;
          stack.push_back({nx, ny});
        }
      }
    }
  }
  return LabelMap(std::move(out));
}

/// Renumber ids to 1..K by raster order of first occurrence. The pixel
/// partition is unchanged; idempotent.
inline LabelMap relabel_canonical(const LabelMap& lm) {
  Grid<std::uint32_t> out(lm.size(), 0u);
  std::unordered_map<std::uint32_t, std::uint32_t> remap;
  remap.reserve(lm.ids().size());
  std::uint32_t next_id = 0;
  const auto& in = lm.labels();
  auto& dst = out.values();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const std::uint32_t v = in[i];
    if (v == 0) continue;
    auto it = remap.find(v);
    if (it == remap.end()) it = remap.emplace(v, ++next_id).first;
    dst[i] = it->second;
  }
  return LabelMap(std::move(out));
}

}  // namespace beeer
