// Writes the scene fixtures the CLI smoke script drives the tool with:
// a standalone scene, a small evaluation dataset (complete and partial
// prediction sets), a corrupt bundle, and a perturbation config.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "beeer/beeer.hpp"
#include "test_util.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: mkfixture <out-dir>\n");
    return 1;
  }
  namespace fs = std::filesystem;
  const fs::path out = argv[1];
  fs::create_directories(out / "gt");
  fs::create_directories(out / "pred_ok");
  fs::create_directories(out / "pred_partial");

  beeer::Rng rng(77);

  const beeer::LabelMap alpha = beeer::relabel_canonical(
      testutil::well_separated_scene(rng, 96, 96, 3, 500, 15.0));
  beeer::write_label_map((out / "alpha_label.png").string(), alpha);
  beeer::write_png_rgb8((out / "alpha_rgb.png").string(), testutil::synth_rgb(rng, 96, 96));
  beeer::write_mask((out / "alpha_fg.png").string(), alpha.foreground());

  for (int i = 0; i < 2; ++i) {
    const std::string id = i == 0 ? "s00" : "s01";
    const beeer::LabelMap gt = beeer::relabel_canonical(
        testutil::well_separated_scene(rng, 96, 96, 2, 500, 15.0));
    beeer::write_label_map((out / "gt" / (id + "_label.png")).string(), gt);
    if (i == 0) {
      beeer::write_mask((out / "gt" / (id + "_fg.png")).string(), gt.foreground());
      const beeer::PredictionBundle b = beeer::make_bundle(gt);
      beeer::write_bundle(b, (out / "pred_ok" / (id + ".bundle")).string());
      beeer::write_bundle(b, (out / "pred_partial" / (id + ".bundle")).string());
    } else {
      beeer::write_label_map((out / "pred_ok" / (id + "_label.png")).string(), gt);
      beeer::write_label_map((out / "pred_partial" / (id + "_label.png")).string(), gt);
    }
  }
  beeer::write_label_map((out / "pred_partial" / "zz_label.png").string(), alpha);

  {
    std::ofstream corrupt(out / "corrupt.bundle", std::ios::binary);
    for (int i = 0; i < 32; ++i) corrupt.put('X');
  }
  {
    std::ofstream cfg(out / "perturb.json");
    cfg << "{\"p_remove\": 0.3, \"p_split\": 0.3, \"seed\": 7}\n";
  }
  return 0;
}
