#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "segfuse/fusion.hpp"
#include "segfuse/resize.hpp"
#include "segfuse_ref/checks.hpp"
#include "segfuse_ref/fixtures.hpp"
#include "segfuse_ref/oracles.hpp"

using namespace segfuse;
using namespace segfuse::fusion;
namespace fx = segfuse::ref::fixtures;

namespace {

FeatureMap random_features(std::mt19937_64& rng, int c, int w, int h) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(static_cast<std::size_t>(c) * w * h);
  for (auto& x : v) x = n(rng);
  return FeatureMap(c, w, h, v);
}

RoiPrediction random_roi(std::mt19937_64& rng, int fw, int fh) {
  const int w = std::uniform_int_distribution<int>(1, fw)(rng);
  const int h = std::uniform_int_distribution<int>(1, fh)(rng);
  RoiPrediction r{{std::uniform_int_distribution<int>(0, fw - w)(rng), std::uniform_int_distribution<int>(0, fh - h)(rng), w, h},
                  RealGrid(kRoiMaskSize, kRoiMaskSize)};
  std::normal_distribution<double> n(0.0, 3.0);
  for (auto& v : r.mask_logits.values()) v = n(rng);
  return r;
}

}  // namespace

TEST_CASE("sigmoid_map values") {
  auto s = sigmoid_map(RealGrid(3, 1, {0.0, 50.0, -50.0}));
  CHECK(s.at(0, 0) == 0.5);
  CHECK(std::abs(s.at(1, 0) - 1.0) <= 1e-15);
  CHECK(std::abs(s.at(2, 0)) <= 1e-15);
  CHECK(sigmoid_map(RealGrid(1, 1, std::log(3.0))).at(0, 0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK_THROWS_AS(sigmoid_map(RealGrid(1, 1, std::numeric_limits<double>::quiet_NaN())), InvalidArgument);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  RealGrid g(50, 1);
  for (auto& v : g.values()) v = u(rng);
  const auto probs = sigmoid_map(g);
  for (double p : probs.values()) {
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
}

TEST_CASE("raff residual identity and fixed scalings") {
  std::mt19937_64 rng(2);
  auto f0 = random_features(rng, 4, 12, 10);

  auto off = fx::constant_roi({1, 2, 6, 5}, -1e6);
  auto out = raff(f0, std::span(&off, 1));
  for (std::size_t i = 0; i < f0.values().size(); ++i) CHECK(std::abs(out.values()[i] - f0.values()[i]) <= 1e-12);

  const BoundingBox a{1, 2, 6, 5}, b{4, 4, 7, 6};
  const RoiPrediction rois[] = {fx::constant_roi(a, 0.0), fx::constant_roi(b, 0.0)};
  auto one = raff(f0, std::span(rois, 1));
  auto two = raff(f0, std::span(rois, 2));
  for (int c = 0; c < 4; ++c)
    for (int y = 0; y < 10; ++y)
      for (int x = 0; x < 12; ++x) {
        const bool in_a = x >= 1 && x < 7 && y >= 2 && y < 7;
        const bool in_b = x >= 4 && x < 11 && y >= 4 && y < 10;
        const double v = f0.at(c, x, y);
        CHECK(one.at(c, x, y) == (in_a ? v * 1.5 : v));
        if (in_a && in_b) CHECK(two.at(c, x, y) == doctest::Approx(2.25 * v).epsilon(1e-15));
        if (!in_a && !in_b) CHECK(two.at(c, x, y) == v);
      }
  CHECK(raff(f0, {}) == f0);
}

TEST_CASE("raff follows the step-by-step oracle") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    auto f0 = random_features(rng, 3, 16, 12);
    std::vector<RoiPrediction> rois;
    for (int k = 0; k < 4; ++k) rois.push_back(random_roi(rng, 16, 12));
    auto got = raff(f0, rois);
    auto want = ref::raff_stepwise(f0, rois);
    for (std::size_t i = 0; i < got.values().size(); ++i)
      CHECK(std::abs(got.values()[i] - want.values()[i]) <= 1e-12 * (1.0 + std::abs(want.values()[i])));
  }
}

TEST_CASE("raff properties: locality, amplification bound, channel uniformity") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    auto f0 = random_features(rng, 3, 14, 9);
    std::vector<RoiPrediction> rois;
    const int k = 1 + t % 3;
    for (int i = 0; i < k; ++i) rois.push_back(random_roi(rng, 14, 9));
    auto out = raff(f0, rois);
    for (int y = 0; y < 9; ++y)
      for (int x = 0; x < 14; ++x) {
        int covering = 0;
        for (const auto& r : rois)
          covering += x >= r.box.x && x < r.box.x + r.box.w && y >= r.box.y && y < r.box.y + r.box.h;
        const double ratio0 = out.at(0, x, y) / f0.at(0, x, y);
        for (int c = 0; c < 3; ++c) {
          const double in = f0.at(c, x, y), v = out.at(c, x, y);
          if (covering == 0) CHECK(v == in);
          CHECK(std::abs(v) <= std::ldexp(std::abs(in), covering) * (1 + 1e-15));
          if (in != 0.0 && f0.at(0, x, y) != 0.0)
            CHECK(v / in == doctest::Approx(ratio0).epsilon(1e-13));
        }
      }
  }
}

TEST_CASE("raff does not modify its input and rejects boxes outside the map") {
  FeatureMap f0(2, 5, 5, std::vector<double>(50, 1.0));
  const FeatureMap copy = f0;
  auto roi = fx::constant_roi({0, 0, 5, 5}, 0.0);
  raff(f0, std::span(&roi, 1));
  CHECK(f0 == copy);
  auto bad = fx::constant_roi({1, 0, 5, 5}, 0.0);
  CHECK_THROWS_AS(raff(f0, std::span(&bad, 1)), InvalidArgument);
}

TEST_CASE("raff attention gradient") {
  std::mt19937_64 rng(5);
  auto f0 = random_features(rng, 2, 8, 8);
  auto roi = random_roi(rng, 8, 8);

  const auto none = raff_attention_grad(f0, roi, FeatureMap(2, 8, 8));
  for (double g : none.values()) CHECK(g == 0.0);

  auto upstream = random_features(rng, 2, 8, 8);
  for (double sat : {50.0, -50.0}) {
    auto saturated = fx::constant_roi(roi.box, sat);
    const auto flat = raff_attention_grad(f0, saturated, upstream);
    for (double g : flat.values()) CHECK(std::abs(g) <= 1e-15);
  }

  auto r = ref::check_raff_grad(20, 99, 1e-5);
  CHECK_MESSAGE(r.passed, "worst relative error ", r.measured);

  CHECK_THROWS_AS(raff_attention_grad(f0, roi, FeatureMap(3, 8, 8)), DimensionMismatch);
}

TEST_CASE("resize adjoint satisfies the inner-product identity") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto [sw, sh, tw, th] : {std::array{28, 28, 5, 9}, std::array{28, 28, 40, 33}, std::array{3, 7, 11, 2}}) {
    RealGrid x(sw, sh), g(tw, th);
    for (auto& v : x.values()) v = n(rng);
    for (auto& v : g.values()) v = n(rng);
    auto rx = resize_bilinear(x, tw, th);
    auto ag = resize_bilinear_adjoint(g, sw, sh);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) lhs += rx.values()[i] * g.values()[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x.values()[i] * ag.values()[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("mask_quality_target") {
  BinaryMask a(4, 1, {1, 1, 0, 0}), b(4, 1, {0, 0, 1, 1});
  CHECK(mask_quality_target(a, a) == 1.0);
  CHECK(mask_quality_target(a, b) == 0.0);
  auto [mp, mt] = fx::quality_five_twelfths();
  CHECK(std::abs(mask_quality_target(mp, mt) - 5.0 / 12.0) <= 1e-12);
  CHECK_THROWS_AS(mask_quality_target(BinaryMask(3, 3), BinaryMask(3, 3)), InvalidArgument);
  CHECK_THROWS_AS(mask_quality_target(BinaryMask(3, 3), BinaryMask(2, 3)), DimensionMismatch);

  std::mt19937_64 rng(7);
  std::bernoulli_distribution on(0.4);
  for (int t = 0; t < 100; ++t) {
    BinaryMask p(6, 5), q(6, 5);
    for (int y = 0; y < 5; ++y)
      for (int x = 0; x < 6; ++x) p.set(x, y, on(rng)), q.set(x, y, on(rng));
    if (p.count() + q.count() == 0) continue;
    CHECK(mask_quality_target(p, q) == 0.5 * (dice_pair(p, q) + iou(p, q)));
  }
}

TEST_CASE("confidence") {
  CHECK(confidence(1.0, 1.0) == 1.0);
  CHECK(confidence(0.37, 0.0) == 0.0);
  CHECK(confidence(0.9, 0.8) == doctest::Approx(0.72).epsilon(1e-15));
  CHECK_THROWS_AS(confidence(1.1, 0.5), InvalidArgument);
  CHECK_THROWS_AS(confidence(0.5, -0.1), InvalidArgument);
}

TEST_CASE("consistency loss and gradient") {
  RealGrid ones(3, 3, 1.0), zeros(3, 3, 0.0);
  CHECK(consistency_loss(ones, ones) == 0.0);
  CHECK(consistency_loss(ones, zeros) == 1.0);
  auto [sem, ins] = fx::consistency_point_025();
  CHECK(std::abs(consistency_loss(sem, ins) - 0.025) <= 1e-12);

  const auto still = consistency_loss_grad(sem, sem);
  for (double g : still.values()) CHECK(g == 0.0);
  auto g1 = consistency_loss_grad(sem, ins);
  auto g2 = consistency_loss_grad(ins, sem);
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g1.values()[i] == -g2.values()[i]);

  auto r = ref::check_consistency_grad(20, 8, 1e-6);
  CHECK_MESSAGE(r.passed, "worst relative error ", r.measured);

  CHECK_THROWS_AS(consistency_loss(RealGrid(2, 2), RealGrid(2, 3)), DimensionMismatch);
  CHECK_THROWS_AS(consistency_loss_grad(RealGrid(2, 2), RealGrid(3, 2)), DimensionMismatch);
  CHECK_THROWS_AS(consistency_loss(RealGrid(1, 1, 1.5), RealGrid(1, 1)), InvalidArgument);
}

TEST_CASE("total loss") {
  CHECK(total_loss({}) == 0.0);
  LossComponents ones{1, 1, 1, 1, 1, 1, 1, 1, 1};
  CHECK(std::abs(total_loss(ones) - 7.2) <= 1e-12);
  CHECK(total_loss(ones, {0.0, 0.0}) == 6.0);

  LossComponents bad = ones;
  bad.det_mask = -1.0;
  CHECK_THROWS_AS(total_loss(bad), InvalidArgument);
  bad.det_mask = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(total_loss(bad), InvalidArgument);

  // Linear in every component with the documented weights.
  const LossWeights w{0.1, 1.0};
  const double weights[] = {1, 1, 1, 1, 1, 1, 0.1, 0.1, 1.0};
  const double delta = 0.37;
  for (int k = 0; k < 9; ++k) {
    LossComponents c{0.3, 0.2, 0.5, 0.1, 0.9, 0.05, 0.7, 0.6, 0.4};
    const double base = total_loss(c, w);
    double* fields[] = {&c.rpn_obj, &c.rpn_reg, &c.det_cls, &c.det_reg, &c.det_mask,
                        &c.det_qua, &c.semseg1, &c.semseg2, &c.sem_cons};
    *fields[k] += delta;
    CHECK(std::abs(total_loss(c, w) - base - delta * weights[k]) <= 1e-12);
  }
}

TEST_CASE("quality_input_fusion layout") {
  FeatureMap roi(256, 14, 14), mask(2, 28, 28);
  auto zero = quality_input_fusion(roi, mask);
  CHECK(zero.channels() == 260);
  CHECK(zero.width() == 14);
  CHECK(zero.height() == 14);
  for (double v : zero.values()) CHECK(v == 0.0);

  FeatureMap constant_fg(2, 28, 28);
  for (int y = 0; y < 28; ++y)
    for (int x = 0; x < 28; ++x) constant_fg.at(1, x, y) = 2.5, constant_fg.at(0, x, y) = -7.0;
  auto c = quality_input_fusion(roi, constant_fg);
  for (int ch = 0; ch < 260; ++ch)
    for (double v : c.plane(ch)) CHECK(v == (ch >= 256 ? 2.5 : 0.0));

  // Index oracle: every foreground pixel lands at exactly one output cell.
  for (int row = 0; row < 28; ++row)
    for (int col = 0; col < 28; ++col) {
      FeatureMap one(2, 28, 28);
      one.at(1, col, row) = 1.0;
      auto out = quality_input_fusion(roi, one);
      const int want_c = 256 + 2 * (row % 2) + (col % 2);
      int hits = 0;
      for (int ch = 256; ch < 260; ++ch)
        for (int y = 0; y < 14; ++y)
          for (int x = 0; x < 14; ++x)
            if (out.at(ch, x, y) != 0.0) {
              ++hits;
              CHECK((ch == want_c && y == row / 2 && x == col / 2));
            }
      CHECK(hits == 1);
    }

  FeatureMap v(2, 28, 28);
  v.at(1, 5, 3) = 9.0;  // row 3, col 5 -> block (1, 2), local (1, 1)
  CHECK(quality_input_fusion(roi, v).at(256 + 3, 2, 1) == 9.0);

  // ROI features pass through untouched.
  FeatureMap feats(256, 14, 14);
  feats.at(17, 3, 4) = 1.25;
  CHECK(quality_input_fusion(feats, mask).at(17, 3, 4) == 1.25);

  CHECK_THROWS_AS(quality_input_fusion(FeatureMap(255, 14, 14), mask), DimensionMismatch);
  CHECK_THROWS_AS(quality_input_fusion(roi, FeatureMap(1, 28, 28)), DimensionMismatch);
  CHECK_THROWS_AS(quality_input_fusion(roi, FeatureMap(2, 28, 27)), DimensionMismatch);
}
