// Command-line surface of the toolkit: representation codecs, perturbation,
// error maps, graph segmentation, dataset evaluation, and rendering.
//
// Exit status: 0 success, 1 usage error, 2 data error, 3 partial evaluation.
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "beeer/beeer.hpp"

namespace {

struct GlobalOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool verbose = false;
};

beeer::ToolConfig resolve_config(const GlobalOpts& g) {
  beeer::ToolConfig cfg;
  if (!g.config_path.empty()) {
    cfg = beeer::parse_tool_config(beeer::load_json_file(g.config_path));
  }
  if (g.workers) cfg.run.parallel_workers = *g.workers;
  if (g.seed) cfg.perturb.seed = *g.seed;
  cfg.run.validate();
  cfg.perturb.validate();
  return cfg;
}

int run_selftest() {
  int failures = 0;
  auto check = [&failures](bool ok, const std::string& what) {
    std::cout << (ok ? "[ok]   " : "[fail] ") << what << "\n";
    if (!ok) ++failures;
  };
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-9; };

  {
    beeer::CenterMap half(beeer::ImageSize{4, 4}, 0.5);
    beeer::BinaryMask target(beeer::ImageSize{4, 4}, 0);
    check(near(beeer::cross_entropy_fg(half, target), std::log(2.0)),
          "cross entropy of a coin-flip prediction is ln 2");
  }
  {
    const beeer::LossBreakdown b = beeer::total_loss(0.1, 0.2, 0.001, 10.0);
    check(near(b.total, 0.6), "weighted loss total composes to 0.6");
  }
  {
    const beeer::Assignment a = beeer::hungarian_max({{0.9, 0.1}, {0.2, 0.8}});
    check(a.pairs == std::vector<std::pair<int, int>>{{0, 0}, {1, 1}},
          "hungarian assignment picks the diagonal of a diagonal-dominant matrix");
  }
  {
    beeer::Grid<std::uint32_t> g(beeer::ImageSize{64, 64}, 0u);
    for (int y = 8; y < 40; ++y)
      for (int x = 8; x < 40; ++x) g.at(x, y) = 5;
    const beeer::LabelMap lm{std::move(g)};
    beeer::DecodeConfig cfg;
    cfg.min_instance_px = 100;
    const beeer::EncodedIS enc = beeer::encode(lm);
    const beeer::LabelMap round = beeer::decode(enc.center, enc.offset, lm.foreground(), cfg);
    check(round == beeer::relabel_canonical(lm), "encode/decode roundtrip reproduces the input");
  }
  {
    const beeer::Rng a(42), b(42);
    beeer::Rng x = a, y = b;
    bool same = true;
    for (int i = 0; i < 1000; ++i) same = same && (x.next_u64() == y.next_u64());
    check(same, "rng streams with equal seeds agree");
  }
  if (failures) {
    std::cerr << failures << " selftest check(s) failed\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instance-segmentation refinement toolkit: center/offset codecs, "
               "boundary error maps, perturbation, OSN metrics"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed override for randomized commands");
  app.add_option("--workers", g.workers, "Worker thread count for eval");
  app.add_flag("--verbose", g.verbose, "Chatty progress output");

  auto* enc = app.add_subcommand("encode", "Encode a label map into a prediction bundle");
  std::string enc_labels, enc_out;
  double enc_sigma = 8.0;
  enc->add_option("--labels", enc_labels, "Input label PNG")->required()->check(CLI::ExistingFile);
  enc->add_option("--out", enc_out, "Output bundle path")->required();
  enc->add_option("--sigma", enc_sigma, "Gaussian sigma for the center map");

  auto* dec = app.add_subcommand("decode", "Decode a prediction bundle into a label map");
  std::string dec_bundle, dec_out, dec_fg;
  dec->add_option("--bundle", dec_bundle, "Input bundle")->required()->check(CLI::ExistingFile);
  dec->add_option("--out", dec_out, "Output label PNG")->required();
  dec->add_option("--fg", dec_fg, "External foreground mask PNG for the overlap filter")
      ->check(CLI::ExistingFile);

  auto* per = app.add_subcommand("perturb", "Perturb a ground-truth label map");
  std::string per_gt, per_rgb, per_out;
  per->add_option("--gt", per_gt, "Ground-truth label PNG")->required()->check(CLI::ExistingFile);
  per->add_option("--rgb", per_rgb, "RGB image for false-positive segments")
      ->required()
      ->check(CLI::ExistingFile);
  per->add_option("--out", per_out, "Output label PNG")->required();

  auto* err = app.add_subcommand("errors", "Boundary explicit error maps between two label maps");
  std::string err_init, err_gt, err_out, err_viz;
  std::optional<int> err_radius, err_conn;
  err->add_option("--init", err_init, "Initial segmentation PNG")
      ->required()
      ->check(CLI::ExistingFile);
  err->add_option("--gt", err_gt, "Ground-truth label PNG")->required()->check(CLI::ExistingFile);
  err->add_option("--radius", err_radius, "Contour dilation radius");
  err->add_option("--connectivity", err_conn, "Contour neighborhood (4 or 8)");
  err->add_option("--out", err_out, "Output bundle holding the four error planes");
  err->add_option("--viz", err_viz, "Output RGBA visualization PNG");

  auto* felz = app.add_subcommand("segment-felz", "Graph-based segmentation of an RGB image");
  std::string felz_rgb, felz_out;
  beeer::FelzParams felz_params;
  felz->add_option("--rgb", felz_rgb, "Input RGB PNG")->required()->check(CLI::ExistingFile);
  felz->add_option("--out", felz_out, "Output label PNG")->required();
  felz->add_option("--k", felz_params.k, "Scale constant");
  felz->add_option("--min-size", felz_params.min_size, "Minimum segment size");
  felz->add_option("--sigma", felz_params.smoothing_sigma, "Pre-smoothing sigma");

  auto* ev = app.add_subcommand("eval", "Score a prediction directory against ground truth");
  std::string ev_pred, ev_gt, ev_out, ev_md;
  ev->add_option("--pred", ev_pred, "Prediction directory (bundles or label PNGs)")
      ->required()
      ->check(CLI::ExistingDirectory);
  ev->add_option("--gt", ev_gt, "Ground-truth directory")->required()->check(CLI::ExistingDirectory);
  ev->add_option("--out", ev_out, "Output CSV report")->required();
  ev->add_option("--md", ev_md, "Optional Markdown report");

  auto* ren = app.add_subcommand("render", "Render an instance overlay");
  std::string ren_rgb, ren_labels, ren_errors, ren_out;
  ren->add_option("--rgb", ren_rgb, "Input RGB PNG")->required()->check(CLI::ExistingFile);
  ren->add_option("--labels", ren_labels, "Label PNG to overlay")
      ->required()
      ->check(CLI::ExistingFile);
  ren->add_option("--errors", ren_errors, "Bundle with error planes to overlay")
      ->check(CLI::ExistingFile);
  ren->add_option("--out", ren_out, "Output PNG")->required();

  auto* self = app.add_subcommand("selftest", "Run built-in sanity checks");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (enc->parsed()) {
      const beeer::LabelMap lm = beeer::read_label_map(enc_labels);
      beeer::write_bundle(beeer::make_bundle(lm, enc_sigma), enc_out);
      if (g.verbose) {
        std::cout << "encoded " << lm.instance_count() << " instance(s) from " << enc_labels
                  << " into " << enc_out << "\n";
      }
    } else if (dec->parsed()) {
      const beeer::ToolConfig cfg = resolve_config(g);
      const beeer::PredictionBundle b = beeer::read_bundle(dec_bundle);
      std::optional<beeer::BinaryMask> fg_mask;
      if (!dec_fg.empty()) fg_mask = beeer::read_mask(dec_fg);
      const beeer::LabelMap lm = beeer::refine(b, fg_mask, cfg.run);
      beeer::write_label_map(dec_out, lm);
      if (g.verbose) {
        std::cout << "decoded " << lm.instance_count() << " instance(s) into " << dec_out << "\n";
      }
    } else if (per->parsed()) {
      beeer::PerturbConfig cfg;
      if (!g.config_path.empty()) {
        cfg = beeer::parse_perturb_config_file(beeer::load_json_file(g.config_path));
      }
      if (g.seed) cfg.seed = *g.seed;
      const beeer::LabelMap gt = beeer::read_label_map(per_gt);
      const beeer::RgbImage rgb = beeer::read_png_rgb8(per_rgb);
      const beeer::LabelMap out = beeer::perturb(gt, rgb, cfg);
      beeer::write_label_map(per_out, out);
      if (g.verbose) {
        std::cout << "perturbed " << gt.instance_count() << " -> " << out.instance_count()
                  << " instance(s), seed " << cfg.seed << "\n";
      }
    } else if (err->parsed()) {
      if (err_out.empty() && err_viz.empty()) {
        std::cerr << "errors: need --out and/or --viz\n";
        return 1;
      }
      beeer::ToolConfig cfg = resolve_config(g);
      if (err_radius) cfg.run.boundary.dilation_radius = *err_radius;
      if (err_conn) cfg.run.boundary.connectivity = *err_conn;
      cfg.run.boundary.validate();
      const beeer::LabelMap init = beeer::read_label_map(err_init);
      const beeer::LabelMap gt = beeer::read_label_map(err_gt);
      const beeer::ErrorMaps maps = beeer::boundary_explicit_error(init, gt, cfg.run.boundary);
      if (!err_out.empty()) {
        beeer::PredictionBundle b;
        b.size = maps.size();
        std::array<std::vector<float>, 4> planes;
        for (int c = 0; c < 4; ++c) {
          planes[c].resize(maps.codes().values().size());
          for (std::size_t i = 0; i < planes[c].size(); ++i) {
            planes[c][i] = (maps.codes().values()[i] == c) ? 1.0f : 0.0f;
          }
        }
        b.error = std::move(planes);
        beeer::write_bundle(b, err_out);
      }
      if (!err_viz.empty()) beeer::write_png_rgba8(err_viz, beeer::error_viz(maps));
    } else if (felz->parsed()) {
      felz_params.validate();
      const beeer::RgbImage rgb = beeer::read_png_rgb8(felz_rgb);
      const beeer::LabelMap seg = beeer::felzenszwalb(rgb, felz_params);
      beeer::write_label_map(felz_out, seg);
      if (g.verbose) std::cout << seg.instance_count() << " segment(s) into " << felz_out << "\n";
    } else if (ev->parsed()) {
      const beeer::ToolConfig cfg = resolve_config(g);
      const beeer::DatasetReport report = beeer::evaluate_dataset(ev_pred, ev_gt, cfg.run);
      beeer::write_csv(report, ev_out);
      if (!ev_md.empty()) beeer::write_markdown(report, ev_md);
      if (g.verbose) {
        for (const beeer::EvalRow& r : report.rows) std::cout << beeer::csv_line(r) << "\n";
      }
      std::cout << "evaluated " << report.rows.size() << " image(s); mean F_O "
                << report.mean.overlap_f << ", mean F_B " << report.mean.boundary_f << "\n";
      for (const std::string& id : report.skipped) {
        std::cerr << "warning: skipped unpaired id " << id << "\n";
      }
      if (report.partial) return 3;
    } else if (ren->parsed()) {
      const beeer::RgbImage rgb = beeer::read_png_rgb8(ren_rgb);
      const beeer::LabelMap lm = beeer::read_label_map(ren_labels);
      std::optional<beeer::ErrorMaps> maps;
      if (!ren_errors.empty()) {
        maps = beeer::classify_errors(
            beeer::to_error_probabilities(beeer::read_bundle(ren_errors)));
      }
      beeer::write_png_rgb8(ren_out,
                            beeer::render_overlay(rgb, lm, maps ? &*maps : nullptr));
    } else if (self->parsed()) {
      return run_selftest();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
