#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "beeer/represent.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace beeer;
using Catch::Matchers::WithinAbs;

TEST_CASE("instance_center") {
  const auto square = testutil::rect_instance(ImageSize{8, 8}, 0, 0, 2, 2);
  const auto [cx, cy] = instance_center(square, 1);
  CHECK_THAT(cx, WithinAbs(1.0, 1e-12));
  CHECK_THAT(cy, WithinAbs(1.0, 1e-12));

  const auto px = testutil::rect_instance(ImageSize{8, 8}, 4, 7, 4, 7);
  const auto [sx, sy] = instance_center(px, 1);
  CHECK_THAT(sx, WithinAbs(4.0, 1e-12));
  CHECK_THAT(sy, WithinAbs(7.0, 1e-12));

  auto ell = testutil::label_map_from({{1, 1, 0},
                                       {1, 0, 0},
                                       {0, 0, 0}});
  const auto [lx, ly] = instance_center(ell, 1);
  CHECK_THAT(lx, WithinAbs(1.0 / 3.0, 1e-12));
  CHECK_THAT(ly, WithinAbs(1.0 / 3.0, 1e-12));

  CHECK_THROWS_AS(instance_center(ell, 9), std::invalid_argument);
}

TEST_CASE("encode_centers values") {
  CHECK(encode_centers(LabelMap(ImageSize{8, 8})) == CenterMap(ImageSize{8, 8}, 0.0));

  const auto lone = testutil::rect_instance(ImageSize{64, 64}, 20, 20, 20, 20);
  const CenterMap c = encode_centers(lone, 8.0);
  CHECK_THAT(c.at(20, 20), WithinAbs(1.0, 1e-12));
  CHECK_THAT(c.at(28, 20), WithinAbs(std::exp(-0.5), 1e-12));
  CHECK_THAT(c.at(20, 28), WithinAbs(std::exp(-0.5), 1e-12));
  for (const double v : c.values()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }

  CHECK_THROWS_AS(encode_centers(lone, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(encode_centers(lone, -1.0), std::invalid_argument);
}

TEST_CASE("encode_centers overlapping bumps take the max") {
  Grid<std::uint32_t> g(ImageSize{64, 16}, 0u);
  g.at(20, 8) = 1;
  g.at(26, 8) = 2;
  const CenterMap c = encode_centers(LabelMap(std::move(g)), 8.0);
  // Midway pixel: same distance 3 to both centroids; value is one bump's.
  CHECK_THAT(c.at(23, 8), WithinAbs(std::exp(-9.0 / 128.0), 1e-12));
  CHECK_THAT(c.at(20, 8), WithinAbs(1.0, 1e-12));
  CHECK_THAT(c.at(26, 8), WithinAbs(1.0, 1e-12));
}

TEST_CASE("encode_offsets values") {
  const auto block = testutil::rect_instance(ImageSize{8, 8}, 0, 0, 2, 2);
  const OffsetMap o = encode_offsets(block);
  CHECK_THAT(o.dx.at(1, 1), WithinAbs(0.0, 1e-12));
  CHECK_THAT(o.dy.at(1, 1), WithinAbs(0.0, 1e-12));
  CHECK_THAT(o.dx.at(0, 0), WithinAbs(1.0, 1e-12));
  CHECK_THAT(o.dy.at(0, 0), WithinAbs(1.0, 1e-12));
  CHECK(o.dx.at(5, 5) == 0.0);
  CHECK(o.dy.at(5, 5) == 0.0);

  // Horizontal 7-px bar: centroid (5,2); offset at (2,2) is (3,0).
  const auto bar = testutil::rect_instance(ImageSize{12, 6}, 2, 2, 8, 2);
  const OffsetMap ob = encode_offsets(bar);
  CHECK_THAT(ob.dx.at(2, 2), WithinAbs(3.0, 1e-12));
  CHECK_THAT(ob.dy.at(2, 2), WithinAbs(0.0, 1e-12));

  CHECK(encode_offsets(LabelMap(ImageSize{4, 4})) == OffsetMap(ImageSize{4, 4}));
}

TEST_CASE("encode_offsets points every foreground pixel at its centroid") {
  beeer::Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto lm = testutil::random_label_map(rng, 24, 24, 4);
    const OffsetMap o = encode_offsets(lm);
    for (int y = 0; y < lm.height(); ++y)
      for (int x = 0; x < lm.width(); ++x) {
        const std::uint32_t id = lm.at(x, y);
        if (id == 0) {
          CHECK(o.dx.at(x, y) == 0.0);
          CHECK(o.dy.at(x, y) == 0.0);
          continue;
        }
        const auto [cx, cy] = instance_center(lm, id);
        CHECK_THAT(x + o.dx.at(x, y), WithinAbs(cx, 1e-6));
        CHECK_THAT(y + o.dy.at(x, y), WithinAbs(cy, 1e-6));
      }
  }
}

TEST_CASE("nms_centers basic") {
  const DecodeConfig cfg;
  CHECK(nms_centers(CenterMap(ImageSize{20, 20}, 0.0), cfg).empty());

  CenterMap one(ImageSize{20, 20}, 0.0);
  one.at(10, 7) = 0.9;
  const auto peaks = nms_centers(one, cfg);
  REQUIRE(peaks.size() == 1u);
  CHECK(peaks[0].x == 10);
  CHECK(peaks[0].y == 7);
  CHECK(peaks[0].score == 0.9);

  // Two peaks 3 px apart share a 7-px window: only the higher survives.
  CenterMap two(ImageSize{20, 20}, 0.0);
  two.at(8, 8) = 0.9;
  two.at(11, 8) = 0.8;
  const auto survivors = nms_centers(two, cfg);
  REQUIRE(survivors.size() == 1u);
  CHECK(survivors[0].x == 8);
  CHECK(survivors[0].score == 0.9);
}

TEST_CASE("nms_centers config validation") {
  DecodeConfig bad;
  bad.nms_window = 4;
  CHECK_THROWS_AS(nms_centers(CenterMap(ImageSize{4, 4}, 0.0), bad), std::invalid_argument);
  bad.nms_window = 1;
  CHECK_THROWS_AS(nms_centers(CenterMap(ImageSize{4, 4}, 0.0), bad), std::invalid_argument);
  bad = DecodeConfig{};
  bad.center_threshold = 0.0;
  CHECK_THROWS_AS(nms_centers(CenterMap(ImageSize{4, 4}, 0.0), bad), std::invalid_argument);
  bad = DecodeConfig{};
  bad.min_instance_px = -1;
  CHECK_THROWS_AS(nms_centers(CenterMap(ImageSize{4, 4}, 0.0), bad), std::invalid_argument);
}

TEST_CASE("nms_centers matches the window rescan, plateaus included") {
  beeer::Rng rng(17);
  DecodeConfig cfg;
  cfg.nms_window = 5;
  for (int trial = 0; trial < 40; ++trial) {
    CenterMap c(ImageSize{16, 16}, 0.0);
    for (auto& v : c.values()) {
      // Coarse quantization forces equal-valued plateaus.
      v = std::floor(rng.uniform01() * 5.0) / 5.0;
    }
    const auto got = nms_centers(c, cfg);
    const auto want = oracle::nms_bruteforce(c, cfg.center_threshold, cfg.nms_window);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].x == want[i].x);
      CHECK(got[i].y == want[i].y);
      CHECK(got[i].score == want[i].score);
    }
    // No two survivors share a window.
    const int r = cfg.nms_window / 2;
    for (std::size_t i = 0; i < got.size(); ++i)
      for (std::size_t j = i + 1; j < got.size(); ++j) {
        const bool same_window =
            std::abs(got[i].x - got[j].x) <= r && std::abs(got[i].y - got[j].y) <= r;
        CHECK_FALSE(same_window);
      }
  }
}

TEST_CASE("nms_centers sorts by descending score with raster ties") {
  CenterMap c(ImageSize{30, 10}, 0.0);
  c.at(3, 3) = 0.5;
  c.at(20, 3) = 0.9;
  c.at(12, 8) = 0.5;
  const auto peaks = nms_centers(c, DecodeConfig{});
  REQUIRE(peaks.size() == 3u);
  CHECK(peaks[0].x == 20);
  CHECK(peaks[1].x == 3);   // score tie: raster-earlier first
  CHECK(peaks[2].x == 12);
}

TEST_CASE("decode edge cases") {
  const DecodeConfig cfg;
  beeer::Rng rng(1);
  const auto two = testutil::well_separated_scene(rng, 256, 256, 2, 500, 15.0);
  const EncodedIS enc = encode(two);

  CHECK(decode(enc.center, enc.offset, BinaryMask(two.size(), 0), cfg).empty());

  // A lone 499-px blob under one center dies to the size filter.
  Grid<std::uint32_t> g(ImageSize{64, 64}, 0u);
  int placed = 0;
  for (int y = 10; y < 35 && placed < 499; ++y)
    for (int x = 10; x < 30 && placed < 499; ++x) {
      g.at(x, y) = 1;
      ++placed;
    }
  REQUIRE(placed == 499);
  const LabelMap blob(std::move(g));
  const EncodedIS enc_blob = encode(blob);
  CHECK(decode(enc_blob.center, enc_blob.offset, blob.foreground(), cfg).empty());
}

TEST_CASE("decode roundtrip on two well-separated squares") {
  Grid<std::uint32_t> g(ImageSize{256, 256}, 0u);
  for (int y = 40; y < 80; ++y)
    for (int x = 30; x < 70; ++x) g.at(x, y) = 3;
  for (int y = 150; y < 190; ++y)
    for (int x = 160; x < 200; ++x) g.at(x, y) = 1;
  const LabelMap lm(std::move(g));
  const EncodedIS enc = encode(lm);
  const LabelMap out = decode(enc.center, enc.offset, lm.foreground(), DecodeConfig{});
  CHECK(out == relabel_canonical(lm));
}

TEST_CASE("decode roundtrip property on well-separated scenes") {
  beeer::Rng rng(77);
  const DecodeConfig cfg;
  for (int trial = 0; trial < 15; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 4));
    const LabelMap lm = testutil::well_separated_scene(rng, 320, 320, n, cfg.min_instance_px,
                                                       2.0 * cfg.nms_window + 1.0);
    REQUIRE(static_cast<int>(lm.instance_count()) == n);
    const EncodedIS enc = encode(lm);
    const LabelMap out = decode(enc.center, enc.offset, lm.foreground(), cfg);
    CHECK(out == relabel_canonical(lm));
  }
}

TEST_CASE("decode never keeps instances below the minimum size") {
  beeer::Rng rng(101);
  DecodeConfig cfg;
  cfg.min_instance_px = 30;
  for (int trial = 0; trial < 10; ++trial) {
    const LabelMap lm = testutil::random_label_map(rng, 48, 48, 5);
    const EncodedIS enc = encode(lm);
    const LabelMap out = decode(enc.center, enc.offset, lm.foreground(), cfg);
    for (const std::size_t sz : instance_sizes(out)) {
      CHECK(sz >= 30u);
    }
  }
}
