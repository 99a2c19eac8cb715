// Dataset plumbing: scene loading, the post-processing filters, bundle
// refinement, the multi-threaded evaluation runner with CSV/Markdown
// reports, and overlay rendering.
//
// On-disk scene layout: `<id>_rgb.png` (8-bit RGB), `<id>_label.png`
// (16-bit gray, pixel value = instance id), optional `<id>_depth.png`
// (16-bit gray, millimeters) and `<id>_fg.png` (nonzero = foreground).
// Predictions are either `<id>.bundle` files or `<id>_label.png` maps.
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "beeer/bundle.hpp"
#include "beeer/core.hpp"
#include "beeer/errors.hpp"
#include "beeer/metrics.hpp"
#include "beeer/png_io.hpp"
#include "beeer/represent.hpp"

namespace beeer {

struct Scene {
  std::string id;
  RgbImage rgb;
  std::optional<DepthImage> depth;
  LabelMap gt;
  std::optional<BinaryMask> fg_mask;
};

struct RunConfig {
  DecodeConfig decode;
  BoundaryConfig boundary;
  double fg_overlap_ratio = 0.3;
  double fg_threshold = 0.5;
  int parallel_workers = 1;

  void validate() const {
    decode.validate();
    boundary.validate();
    if (!(fg_overlap_ratio >= 0.0 && fg_overlap_ratio <= 1.0)) {
      throw std::invalid_argument("RunConfig: fg_overlap_ratio must be in [0,1]");
    }
    if (!(fg_threshold >= 0.0 && fg_threshold <= 1.0)) {
      throw std::invalid_argument("RunConfig: fg_threshold must be in [0,1]");
    }
    if (parallel_workers < 1) {
      throw std::invalid_argument("RunConfig: parallel_workers must be >= 1");
    }
  }
};

inline Scene load_scene(const std::string& dir, const std::string& id) {
  namespace fs = std::filesystem;
  const std::string rgb_path = (fs::path(dir) / (id + "_rgb.png")).string();
  const std::string label_path = (fs::path(dir) / (id + "_label.png")).string();
  if (!fs::exists(rgb_path)) throw IoError("missing scene file " + rgb_path);
  if (!fs::exists(label_path)) throw IoError("missing scene file " + label_path);

  Scene s;
  s.id = id;
  s.rgb = read_png_rgb8(rgb_path);
  s.gt = read_label_map(label_path);
  require_same_size(s.rgb.size(), s.gt.size(), ("scene " + id).c_str());

  const std::string depth_path = (fs::path(dir) / (id + "_depth.png")).string();
  if (fs::exists(depth_path)) {
    s.depth = read_depth(depth_path);
    require_same_size(s.rgb.size(), s.depth->size(), ("scene " + id).c_str());
  }
  const std::string fg_path = (fs::path(dir) / (id + "_fg.png")).string();
  if (fs::exists(fg_path)) {
    s.fg_mask = read_mask(fg_path);
    require_same_size(s.rgb.size(), s.fg_mask->size(), ("scene " + id).c_str());
  }
  return s;
}

/// Drop instances whose fraction of pixels inside fg falls below ratio;
/// exactly the ratio keeps. Output ids are canonical.
inline LabelMap filter_foreground(const LabelMap& lm, const BinaryMask& fg, double ratio) {
  require_same_size(lm.size(), fg.size(), "filter_foreground");
  const auto& ids = lm.ids();
  const detail::IdRank rank(ids);
  std::vector<std::size_t> area(ids.size(), 0), inside(ids.size(), 0);
  for (std::size_t i = 0; i < lm.labels().size(); ++i) {
    const std::uint32_t v = lm.labels()[i];
    if (v == 0) continue;
    const std::size_t k = rank(v);
    ++area[k];
    if (fg.values()[i]) ++inside[k];
  }
  std::vector<char> keep(ids.size());
  for (std::size_t k = 0; k < ids.size(); ++k) {
    keep[k] = static_cast<double>(inside[k]) >= ratio * static_cast<double>(area[k]);
  }
  Grid<std::uint32_t> out(lm.size(), 0u);
  for (std::size_t i = 0; i < lm.labels().size(); ++i) {
    const std::uint32_t v = lm.labels()[i];
    if (v != 0 && keep[rank(v)]) out.values()[i] = v;
  }
  return relabel_canonical(LabelMap(std::move(out)));
}

/// Drop instances strictly smaller than min_px pixels. Output ids are
/// canonical.
inline LabelMap remove_small(const LabelMap& lm, int min_px) {
  const auto& ids = lm.ids();
  const detail::IdRank rank(ids);
  std::vector<std::size_t> area(ids.size(), 0);
  for (const std::uint32_t v : lm.labels()) {
    if (v != 0) ++area[rank(v)];
  }
  Grid<std::uint32_t> out(lm.size(), 0u);
  for (std::size_t i = 0; i < lm.labels().size(); ++i) {
    const std::uint32_t v = lm.labels()[i];
    if (v != 0 && area[rank(v)] >= static_cast<std::size_t>(min_px)) out.values()[i] = v;
  }
  return relabel_canonical(LabelMap(std::move(out)));
}

/// Decode a prediction bundle into refined instances: threshold the
/// foreground plane, group pixels by nearest center, then apply the
/// foreground-overlap filter (when a mask is supplied) and the small-mask
/// filter.
inline LabelMap refine(const PredictionBundle& b, const std::optional<BinaryMask>& fg_mask,
                       const RunConfig& cfg) {
  cfg.validate();
  const BinaryMask fg = foreground_mask(b, cfg.fg_threshold);
  LabelMap lm = decode(to_center_map(b), to_offset_map(b), fg, cfg.decode);
  if (fg_mask) {
    require_same_size(lm.size(), fg_mask->size(), "refine");
    lm = filter_foreground(lm, *fg_mask, cfg.fg_overlap_ratio);
  }
  return remove_small(lm, cfg.decode.min_instance_px);
}

inline LabelMap refine_from_bundle(const PredictionBundle& b, const Scene& scene,
                                   const RunConfig& cfg) {
  require_same_size(b.size, scene.gt.size(), ("scene " + scene.id).c_str());
  return refine(b, scene.fg_mask, cfg);
}

// ---------------------------------------------------------------------------
// Dataset evaluation
// ---------------------------------------------------------------------------

struct EvalRow {
  std::string image;
  double n_pred = 0, n_gt = 0;
  double overlap_p = 0, overlap_r = 0, overlap_f = 0;
  double boundary_p = 0, boundary_r = 0, boundary_f = 0;
  double f_at_75 = 0;
  double ms = 0;
};

struct DatasetReport {
  std::vector<EvalRow> rows;  // ordered by image id
  EvalRow mean;               // unweighted column means, image == "mean"
  std::vector<std::string> skipped;  // ids present on only one side
  bool partial = false;
};

namespace detail {

inline std::set<std::string> ids_with_suffix(const std::string& dir, const std::string& suffix) {
  namespace fs = std::filesystem;
  std::set<std::string> ids;
  if (!fs::is_directory(dir)) throw IoError(dir + " is not a directory");
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      ids.insert(name.substr(0, name.size() - suffix.size()));
    }
  }
  return ids;
}

inline EvalRow row_from_metrics(const std::string& image, const MetricsReport& m, double ms) {
  EvalRow r;
  r.image = image;
  r.n_pred = m.n_pred;
  r.n_gt = m.n_gt;
  r.overlap_p = m.overlap_p;
  r.overlap_r = m.overlap_r;
  r.overlap_f = m.overlap_f;
  r.boundary_p = m.boundary_p;
  r.boundary_r = m.boundary_r;
  r.boundary_f = m.boundary_f;
  r.f_at_75 = m.f_at_75;
  r.ms = ms;
  return r;
}

}  // namespace detail

/// Unweighted arithmetic mean of every numeric column.
inline EvalRow mean_row(const std::vector<EvalRow>& rows) {
  EvalRow m;
  m.image = "mean";
  if (rows.empty()) return m;
  for (const EvalRow& r : rows) {
    m.n_pred += r.n_pred;
    m.n_gt += r.n_gt;
    m.overlap_p += r.overlap_p;
    m.overlap_r += r.overlap_r;
    m.overlap_f += r.overlap_f;
    m.boundary_p += r.boundary_p;
    m.boundary_r += r.boundary_r;
    m.boundary_f += r.boundary_f;
    m.f_at_75 += r.f_at_75;
    m.ms += r.ms;
  }
  const double n = static_cast<double>(rows.size());
  m.n_pred /= n;
  m.n_gt /= n;
  m.overlap_p /= n;
  m.overlap_r /= n;
  m.overlap_f /= n;
  m.boundary_p /= n;
  m.boundary_r /= n;
  m.boundary_f /= n;
  m.f_at_75 /= n;
  m.ms /= n;
  return m;
}

/// Score a directory of predictions against a directory of ground truths.
/// Ground truths are `<id>_label.png` (+ optional `<id>_fg.png` consumed by
/// bundle refinement). A prediction is `<id>.bundle` when present, else
/// `<id>_label.png` taken as-is. Ids present on only one side are skipped
/// and reported. Per-image wall time covers refinement and metrics, not
/// file I/O. Row order and all values are independent of worker count.
inline DatasetReport evaluate_dataset(const std::string& pred_dir, const std::string& gt_dir,
                                      const RunConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  const std::set<std::string> gt_ids = detail::ids_with_suffix(gt_dir, "_label.png");
  const std::set<std::string> pred_bundles = detail::ids_with_suffix(pred_dir, ".bundle");
  std::set<std::string> pred_ids = detail::ids_with_suffix(pred_dir, "_label.png");
  pred_ids.insert(pred_bundles.begin(), pred_bundles.end());

  DatasetReport report;
  std::vector<std::string> paired;
  for (const std::string& id : gt_ids) {
    if (pred_ids.count(id)) {
      paired.push_back(id);
    } else {
      report.skipped.push_back(id);
    }
  }
  for (const std::string& id : pred_ids) {
    if (!gt_ids.count(id)) report.skipped.push_back(id);
  }
  std::sort(report.skipped.begin(), report.skipped.end());
  report.partial = !report.skipped.empty();

  report.rows.resize(paired.size());
  std::vector<std::exception_ptr> failures(paired.size());
  std::atomic<std::size_t> cursor{0};

  auto worker = [&]() {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= paired.size()) return;
      const std::string& id = paired[i];
      try {
        const LabelMap gt =
            read_label_map((fs::path(gt_dir) / (id + "_label.png")).string());
        std::optional<BinaryMask> fg_mask;
        const std::string fg_path = (fs::path(gt_dir) / (id + "_fg.png")).string();
        if (fs::exists(fg_path)) {
          fg_mask = read_mask(fg_path);
          require_same_size(gt.size(), fg_mask->size(), ("scene " + id).c_str());
        }

        MetricsReport metrics;
        double ms = 0.0;
        if (pred_bundles.count(id)) {
          const PredictionBundle b =
              read_bundle((fs::path(pred_dir) / (id + ".bundle")).string());
          require_same_size(b.size, gt.size(), ("scene " + id).c_str());
          const auto t0 = std::chrono::steady_clock::now();
          const LabelMap pred = refine(b, fg_mask, cfg);
          metrics = compute_metrics(pred, gt, cfg.boundary);
          const auto t1 = std::chrono::steady_clock::now();
          ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        } else {
          const LabelMap pred =
              read_label_map((fs::path(pred_dir) / (id + "_label.png")).string());
          require_same_size(pred.size(), gt.size(), ("scene " + id).c_str());
          const auto t0 = std::chrono::steady_clock::now();
          metrics = compute_metrics(pred, gt, cfg.boundary);
          const auto t1 = std::chrono::steady_clock::now();
          ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        }
        report.rows[i] = detail::row_from_metrics(id, metrics, ms);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };

  const int nworkers = std::max(1, std::min<int>(cfg.parallel_workers,
                                                 static_cast<int>(paired.size() ? paired.size() : 1)));
  if (nworkers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(nworkers);
    for (int t = 0; t < nworkers; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  report.mean = mean_row(report.rows);
  return report;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

}  // namespace detail

inline constexpr const char* kCsvHeader =
    "image,n_pred,n_gt,P_O,R_O,F_O,P_B,R_B,F_B,F_at_75,ms";

inline std::string csv_line(const EvalRow& r) {
  std::string out = r.image;
  for (const double v : {r.n_pred, r.n_gt, r.overlap_p, r.overlap_r, r.overlap_f, r.boundary_p,
                         r.boundary_r, r.boundary_f, r.f_at_75, r.ms}) {
    out += ',';
    out += detail::format_num(v);
  }
  return out;
}

inline void write_csv(const DatasetReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << kCsvHeader << '\n';
  for (const EvalRow& r : report.rows) out << csv_line(r) << '\n';
  out << csv_line(report.mean) << '\n';
  if (!out) throw IoError("short write to " + path);
}

inline void write_markdown(const DatasetReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "| image | n_pred | n_gt | P_O | R_O | F_O | P_B | R_B | F_B | F@.75 | ms |\n";
  out << "|---|---|---|---|---|---|---|---|---|---|---|\n";
  auto line = [&out](const EvalRow& r) {
    out << "| " << r.image;
    char buf[40];
    for (const double v : {r.n_pred, r.n_gt}) {
      std::snprintf(buf, sizeof(buf), "%.4g", v);
      out << " | " << buf;
    }
    for (const double v : {r.overlap_p, r.overlap_r, r.overlap_f, r.boundary_p, r.boundary_r,
                           r.boundary_f, r.f_at_75}) {
      std::snprintf(buf, sizeof(buf), "%.4f", v);
      out << " | " << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.2f", r.ms);
    out << " | " << buf << " |\n";
  };
  for (const EvalRow& r : report.rows) line(r);
  line(report.mean);
  if (!report.skipped.empty()) {
    out << "\nSkipped (unpaired): ";
    for (std::size_t i = 0; i < report.skipped.size(); ++i) {
      if (i) out << ", ";
      out << report.skipped[i];
    }
    out << "\n";
  }
  if (!out) throw IoError("short write to " + path);
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace detail {

inline Rgb palette_color(std::uint32_t id) {
  static constexpr Rgb palette[20] = {
      {230, 25, 75},   {60, 180, 75},   {255, 225, 25}, {0, 130, 200},  {245, 130, 48},
      {145, 30, 180},  {70, 240, 240},  {240, 50, 230}, {210, 245, 60}, {250, 190, 212},
      {0, 128, 128},   {220, 190, 255}, {170, 110, 40}, {255, 250, 200}, {128, 0, 0},
      {170, 255, 195}, {128, 128, 0},   {255, 215, 180}, {0, 0, 128},    {128, 128, 128}};
  return palette[(id - 1) % 20];
}

inline std::uint8_t blend(std::uint8_t a, std::uint8_t b) {
  return static_cast<std::uint8_t>((static_cast<int>(a) + b + 1) / 2);
}

}  // namespace detail

/// Instance masks tinted with a fixed palette at 50% over the image; when
/// error maps are given, TP pixels tint green, FP red, FN blue on top.
inline RgbImage render_overlay(const RgbImage& rgb, const LabelMap& lm,
                               const ErrorMaps* err = nullptr) {
  require_same_size(rgb.size(), lm.size(), "render_overlay");
  if (err) require_same_size(rgb.size(), err->size(), "render_overlay");
  RgbImage out = rgb;
  for (std::size_t i = 0; i < out.values().size(); ++i) {
    const std::uint32_t v = lm.labels()[i];
    if (v == 0) continue;
    const Rgb c = detail::palette_color(v);
    Rgb& px = out.values()[i];
    px = {detail::blend(px.r, c.r), detail::blend(px.g, c.g), detail::blend(px.b, c.b)};
  }
  if (err) {
    for (std::size_t i = 0; i < out.values().size(); ++i) {
      const auto cls = static_cast<ErrorClass>(err->codes().values()[i]);
      if (cls == ErrorClass::TN) continue;
      Rgb c{0, 0, 0};
      if (cls == ErrorClass::TP) c = {0, 255, 0};
      if (cls == ErrorClass::FP) c = {255, 0, 0};
      if (cls == ErrorClass::FN) c = {0, 0, 255};
      Rgb& px = out.values()[i];
      px = {detail::blend(px.r, c.r), detail::blend(px.g, c.g), detail::blend(px.b, c.b)};
    }
  }
  return out;
}

inline void render_overlay(const Scene& scene, const LabelMap& lm, const ErrorMaps* err,
                           const std::string& path) {
  write_png_rgb8(path, render_overlay(scene.rgb, lm, err));
}

/// Standalone error visualization: TP green, FP red, FN blue, TN transparent.
inline RgbaImage error_viz(const ErrorMaps& err) {
  RgbaImage out(err.size(), Rgba{0, 0, 0, 0});
  for (std::size_t i = 0; i < out.values().size(); ++i) {
    switch (static_cast<ErrorClass>(err.codes().values()[i])) {
      case ErrorClass::TP: out.values()[i] = {0, 255, 0, 255}; break;
      case ErrorClass::FP: out.values()[i] = {255, 0, 0, 255}; break;
      case ErrorClass::FN: out.values()[i] = {0, 0, 255, 255}; break;
      case ErrorClass::TN: break;
    }
  }
  return out;
}

}  // namespace beeer
