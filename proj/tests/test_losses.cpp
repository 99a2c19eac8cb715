#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "beeer/errors.hpp"
#include "beeer/losses.hpp"
#include "test_util.hpp"

using namespace beeer;
using Catch::Matchers::WithinAbs;

namespace {

ErrorProbabilities one_hot_probs(const ErrorMaps& em) {
  ErrorProbabilities p{Grid<double>(em.size(), 0.0), Grid<double>(em.size(), 0.0),
                       Grid<double>(em.size(), 0.0), Grid<double>(em.size(), 0.0)};
  for (std::size_t i = 0; i < em.codes().values().size(); ++i) {
    p[em.codes().values()[i]].values()[i] = 1.0;
  }
  return p;
}

ErrorMaps random_error_maps(beeer::Rng& rng, ImageSize size) {
  Grid<std::uint8_t> codes(size, 0);
  for (auto& c : codes.values()) c = static_cast<std::uint8_t>(rng.uniform_int(0, 3));
  return ErrorMaps(std::move(codes));
}

}  // namespace

TEST_CASE("dice_loss exact cases") {
  beeer::Rng rng(3);
  const ErrorMaps target = random_error_maps(rng, ImageSize{64, 64});

  // Perfect one-hot prediction: every channel's dice term cancels exactly.
  CHECK_THAT(dice_loss(one_hot_probs(target), target), WithinAbs(0.0, 1e-12));

  // Inverted prediction: zero intersection in every channel.
  ErrorProbabilities inverted = one_hot_probs(target);
  for (auto& plane : inverted)
    for (auto& v : plane.values()) v = 1.0 - v;
  const double n = 64.0 * 64.0;
  CHECK_THAT(dice_loss(inverted, target), WithinAbs(1.0 - 1.0 / (n + 1.0), 1e-12));
  CHECK(dice_loss(inverted, target) > 0.999);

  // Uniform 0.5 prediction against a half/half two-channel target on 4x4.
  Grid<std::uint8_t> codes(ImageSize{4, 4}, 1);
  for (int x = 0; x < 4; ++x) {
    codes.at(x, 0) = 0;
    codes.at(x, 1) = 0;
  }
  const ErrorMaps half(codes);
  ErrorProbabilities uniform{Grid<double>(ImageSize{4, 4}, 0.5), Grid<double>(ImageSize{4, 4}, 0.5),
                             Grid<double>(ImageSize{4, 4}, 0.5), Grid<double>(ImageSize{4, 4}, 0.5)};
  // Channels 0 and 1: 1 - (2*4+1)/(8+8+1) = 8/17; channels 2 and 3 (empty
  // target): 1 - 1/9 = 8/9. Mean = 104/153.
  CHECK_THAT(dice_loss(uniform, half), WithinAbs(104.0 / 153.0, 1e-12));

  ErrorProbabilities wrong_size = one_hot_probs(target);
  wrong_size[2] = Grid<double>(ImageSize{8, 8}, 0.0);
  CHECK_THROWS_AS(dice_loss(wrong_size, target), std::invalid_argument);
}

TEST_CASE("dice_loss range and monotonicity") {
  // Growing the overlap with the target never increases the loss.
  Grid<std::uint8_t> codes(ImageSize{4, 4}, 0);
  const ErrorMaps target(codes);  // all TP
  double prev = 2.0;
  for (int k = 0; k <= 16; ++k) {
    ErrorProbabilities p{Grid<double>(ImageSize{4, 4}, 0.0), Grid<double>(ImageSize{4, 4}, 0.0),
                         Grid<double>(ImageSize{4, 4}, 0.0), Grid<double>(ImageSize{4, 4}, 0.0)};
    for (int i = 0; i < k; ++i) p[0].values()[i] = 1.0;
    const double loss = dice_loss(p, target);
    CHECK(loss >= 0.0);
    CHECK(loss <= 1.0);
    CHECK(loss <= prev + 1e-12);
    prev = loss;
  }
}

TEST_CASE("cross_entropy_fg") {
  CHECK_THAT(cross_entropy_fg(Grid<double>(ImageSize{4, 4}, 0.5), BinaryMask(ImageSize{4, 4}, 1)),
             WithinAbs(std::log(2.0), 1e-12));
  CHECK_THAT(cross_entropy_fg(Grid<double>(ImageSize{4, 4}, 0.5), BinaryMask(ImageSize{4, 4}, 0)),
             WithinAbs(std::log(2.0), 1e-12));

  // Perfect prediction at the clamp bound.
  BinaryMask target(ImageSize{2, 2}, 0);
  target.at(0, 0) = 1;
  Grid<double> exact(ImageSize{2, 2}, 0.0);
  exact.at(0, 0) = 1.0;
  CHECK(cross_entropy_fg(exact, target) < 2e-7);
  CHECK(cross_entropy_fg(exact, target) >= 0.0);

  // 2x2 worked example.
  Grid<double> pred(ImageSize{2, 2}, 0.0);
  pred.values() = {0.9, 0.1, 0.8, 0.2};
  BinaryMask t(ImageSize{2, 2}, 0);
  t.values() = {1, 0, 1, 0};
  const double want =
      -(std::log(0.9) + std::log(0.9) + std::log(0.8) + std::log(0.8)) / 4.0;
  CHECK_THAT(cross_entropy_fg(pred, t), WithinAbs(want, 1e-12));

  CHECK_THROWS_AS(cross_entropy_fg(Grid<double>(ImageSize{2, 2}, 0.5), BinaryMask(ImageSize{3, 2}, 0)),
                  std::invalid_argument);
}

TEST_CASE("mse_center") {
  const CenterMap a(ImageSize{8, 8}, 0.6);
  CHECK(mse_center(a, a) == 0.0);
  const CenterMap b(ImageSize{8, 8}, 0.5);
  CHECK_THAT(mse_center(a, b), WithinAbs(0.01, 1e-12));
  CHECK_THROWS_AS(mse_center(a, CenterMap(ImageSize{4, 4}, 0.0)), std::invalid_argument);
}

TEST_CASE("l1_offset") {
  const ImageSize size{6, 6};
  OffsetMap pred(size), target(size);
  BinaryMask fg(size, 0);
  for (int x = 0; x < 3; ++x) fg.at(x, 0) = 1;
  CHECK(l1_offset(pred, target, fg) == 0.0);

  for (auto& v : pred.dx.values()) v = 3.0;
  for (auto& v : pred.dy.values()) v = -4.0;
  CHECK_THAT(l1_offset(pred, target, fg), WithinAbs(3.5, 1e-12));

  // Background-only differences are ignored; empty foreground scores 0.
  CHECK(l1_offset(pred, target, BinaryMask(size, 0)) == 0.0);
  OffsetMap noisy = target;
  noisy.dx.at(5, 5) = 100.0;
  CHECK(l1_offset(noisy, target, fg) == 0.0);

  CHECK_THROWS_AS(l1_offset(pred, target, BinaryMask(ImageSize{2, 2}, 0)),
                  std::invalid_argument);
}

TEST_CASE("total_loss composition") {
  const LossBreakdown zero = total_loss(0, 0, 0, 0);
  CHECK(zero.total == 0.0);

  const LossBreakdown paper = total_loss(0.1, 0.2, 0.001, 10.0);
  CHECK_THAT(paper.total, WithinAbs(0.6, 1e-12));
  CHECK(paper.err == 0.1);
  CHECK(paper.fg == 0.2);
  CHECK(paper.ctr == 0.001);
  CHECK(paper.off == 10.0);

  const LossBreakdown unit = total_loss(1, 1, 1, 1, LossWeights{1, 1, 1, 1});
  CHECK_THAT(unit.total, WithinAbs(4.0, 1e-12));

  // Linear in each part.
  const LossBreakdown base = total_loss(0.3, 0.7, 0.02, 5.0);
  const LossBreakdown doubled = total_loss(0.6, 0.7, 0.02, 5.0);
  CHECK_THAT(doubled.total - base.total, WithinAbs(0.3, 1e-12));
  const LossBreakdown ctr2 = total_loss(0.3, 0.7, 0.04, 5.0);
  CHECK_THAT(ctr2.total - base.total, WithinAbs(200.0 * 0.02, 1e-9));
}
