#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "segfuse/inference.hpp"
#include "segfuse/resize.hpp"
#include "segfuse_ref/oracles.hpp"

using namespace segfuse;
using namespace segfuse::inference;

namespace {

InstancePrediction constant_pred(BoundingBox box, double logit, double s_cls, std::optional<double> s_qua, Label id) {
  InstancePrediction p;
  p.box = box;
  p.mask_logits = RealGrid(kRoiMaskSize, kRoiMaskSize, logit);
  p.s_cls = s_cls;
  p.s_qua = s_qua;
  p.id = id;
  return p;
}

std::vector<InstancePrediction> random_preds(std::mt19937_64& rng, int w, int h, int n) {
  std::vector<InstancePrediction> out;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> logit(0.5, 3.0);
  for (int i = 0; i < n; ++i) {
    const int bw = std::uniform_int_distribution<int>(1, w)(rng);
    const int bh = std::uniform_int_distribution<int>(1, h)(rng);
    InstancePrediction p;
    p.box = {std::uniform_int_distribution<int>(0, w - bw)(rng), std::uniform_int_distribution<int>(0, h - bh)(rng), bw, bh};
    for (auto& v : p.mask_logits.values()) v = logit(rng);
    p.s_cls = u(rng);
    if (i % 4 != 0) p.s_qua = u(rng);
    p.id = static_cast<Label>(i + 1);
    out.push_back(std::move(p));
  }
  return out;
}

double conf(const InstancePrediction& p) { return p.s_cls * p.s_qua.value_or(1.0); }

}  // namespace

TEST_CASE("bilinear resize examples") {
  RealGrid g(3, 2, {1, 2, 3, 4, 5, 6});
  CHECK(resize_bilinear(g, 3, 2) == g);

  for (auto [w, h] : {std::pair{1, 1}, std::pair{7, 3}, std::pair{40, 55}}) {
    const auto flat = resize_bilinear(RealGrid(28, 28, 0.3), w, h);
    for (double v : flat.values()) CHECK(v == doctest::Approx(0.3).epsilon(1e-15));
  }

  auto up = resize_bilinear(RealGrid(2, 2, {0, 1, 0, 1}), 4, 1);
  CHECK(up.at(0, 0) == 0.0);
  CHECK(up.at(1, 0) == 0.25);
  CHECK(up.at(2, 0) == 0.75);
  CHECK(up.at(3, 0) == 1.0);

  CHECK_THROWS_AS(resize_bilinear(RealGrid(), 3, 3), InvalidArgument);
  CHECK_THROWS_AS(resize_bilinear(g, 0, 3), InvalidArgument);
}

TEST_CASE("bilinear resize agrees with the closed-form oracle") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int t = 0; t < 40; ++t) {
    const int sw = 1 + t % 9, sh = 1 + (t * 7) % 13;
    const int tw = 1 + (t * 5) % 31, th = 1 + (t * 3) % 29;
    RealGrid src(sw, sh);
    for (auto& v : src.values()) v = n(rng);
    auto got = resize_bilinear(src, tw, th);
    auto want = ref::bilinear(src, tw, th);
    const auto [lo, hi] = std::minmax_element(src.values().begin(), src.values().end());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(std::abs(got.values()[i] - want.values()[i]) <= 1e-12);
      CHECK(got.values()[i] >= *lo - 1e-12);
      CHECK(got.values()[i] <= *hi + 1e-12);
    }
  }
}

TEST_CASE("paste_mask thresholds strictly") {
  const InferenceConfig cfg;
  const BoundingBox box{2, 1, 5, 4};
  auto on = paste_mask(constant_pred(box, 50.0, 1, {}, 1), 10, 8, cfg);
  auto off = paste_mask(constant_pred(box, -50.0, 1, {}, 1), 10, 8, cfg);
  auto half = paste_mask(constant_pred(box, 0.0, 1, {}, 1), 10, 8, cfg);
  CHECK(on.count() == 20);
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 10; ++x) CHECK(on.at(x, y) == (x >= 2 && x < 7 && y >= 1 && y < 5));
  CHECK(off.count() == 0);
  CHECK(half.count() == 0);
  CHECK_THROWS_AS(paste_mask(constant_pred({6, 0, 5, 4}, 1.0, 1, {}, 1), 10, 8, cfg), InvalidArgument);
}

TEST_CASE("paste_mask on random logits matches the resized probabilities") {
  std::mt19937_64 rng(22);
  const InferenceConfig cfg{0.5, 0.3};
  for (const auto& p : random_preds(rng, 30, 20, 20)) {
    auto m = paste_mask(p, 30, 20, cfg);
    RealGrid sig = p.mask_logits;
    for (auto& v : sig.values()) v = 1.0 / (1.0 + std::exp(-v));
    auto probs = ref::bilinear(sig, p.box.w, p.box.h);
    for (int y = 0; y < 20; ++y)
      for (int x = 0; x < 30; ++x) {
        const bool inside = x >= p.box.x && x < p.box.x + p.box.w && y >= p.box.y && y < p.box.y + p.box.h;
        if (!inside) {
          CHECK_FALSE(m.at(x, y));
          continue;
        }
        const double s = probs.at(x - p.box.x, y - p.box.y);
        if (std::abs(s - cfg.bin_thresh) > 1e-9) CHECK(m.at(x, y) == (s > cfg.bin_thresh));
      }
  }
}

TEST_CASE("filter_by_score") {
  std::vector<InstancePrediction> preds;
  for (double s : {0.3, 0.5, 0.7}) preds.push_back(constant_pred({0, 0, 1, 1}, 1, s, {}, static_cast<Label>(preds.size() + 1)));
  auto kept = filter_by_score(preds, {0.5, 0.5});
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].s_cls == 0.5);
  CHECK(kept[1].s_cls == 0.7);
  CHECK(filter_by_score(preds, {0.0, 0.5}).size() == 3);
  CHECK(filter_by_score(preds, {1.0, 0.5}).empty());
  CHECK_THROWS_AS(filter_by_score(preds, {1.5, 0.5}), InvalidArgument);
  CHECK_THROWS_AS(filter_by_score(preds, {0.5, 1.0}), InvalidArgument);
}

TEST_CASE("resolve_overlaps equals the per-pixel argmax") {
  std::mt19937_64 rng(23);
  std::bernoulli_distribution bit(0.3);
  std::uniform_int_distribution<int> score(0, 4);
  for (int t = 0; t < 60; ++t) {
    std::vector<ScoredMask> masks;
    const int n = 1 + t % 7;
    for (int i = 0; i < n; ++i) {
      ScoredMask s{BinaryMask(9, 8), score(rng) / 4.0, static_cast<Label>(3 * i + 2)};
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 9; ++x) s.mask.set(x, y, bit(rng));
      masks.push_back(std::move(s));
    }
    std::shuffle(masks.begin(), masks.end(), rng);
    auto got = resolve_overlaps(masks);
    CHECK(got == ref::argmax_overlaps(masks, 9, 8));

    // Union of the inputs is exactly the foreground; each pixel is labelled
    // by a mask that covers it.
    for (int y = 0; y < 8; ++y)
      for (int x = 0; x < 9; ++x) {
        bool any = false;
        for (const auto& m : masks) any = any || m.mask.at(x, y);
        CHECK((got.at(x, y) != 0) == any);
        if (got.at(x, y))
          for (const auto& m : masks)
            if (m.id == got.at(x, y)) CHECK(m.mask.at(x, y));
      }
  }
}

TEST_CASE("resolve_overlaps input checks") {
  CHECK(resolve_overlaps({}) == InstanceMap());
  ScoredMask a{BinaryMask(2, 2, {1, 0, 0, 0}), 0.5, 1}, b{BinaryMask(2, 2, {0, 1, 0, 0}), 0.5, 1};
  std::vector<ScoredMask> dup{a, b};
  CHECK_THROWS_AS(resolve_overlaps(dup), InvalidArgument);
  b.id = 0;
  std::vector<ScoredMask> zero{a, b};
  CHECK_THROWS_AS(resolve_overlaps(zero), InvalidArgument);
  b.id = 2;
  b.mask = BinaryMask(3, 2);
  std::vector<ScoredMask> shape{a, b};
  CHECK_THROWS_AS(resolve_overlaps(shape), DimensionMismatch);
}

TEST_CASE("mask quality decides contested pixels") {
  // A: s_cls 0.9, s_qua 0.5 -> 0.45.  B: s_cls 0.6, s_qua 0.9 -> 0.54.
  const BoundingBox ba{0, 0, 6, 6}, bb{3, 3, 6, 6};
  std::vector<InstancePrediction> preds{constant_pred(ba, 20, 0.9, 0.5, 1), constant_pred(bb, 20, 0.6, 0.9, 2)};
  auto fused = run_inference_fusion(preds, 10, 10, {});
  for (int y = 3; y < 6; ++y)
    for (int x = 3; x < 6; ++x) CHECK(fused.at(x, y) == 2);
  CHECK(fused.at(0, 0) == 1);
  CHECK(fused.at(8, 8) == 2);

  // Without quality scores the classification score decides.
  for (auto& p : preds) p.s_qua.reset();
  auto plain = run_inference_fusion(preds, 10, 10, {});
  CHECK(plain.at(4, 4) == 1);
}

TEST_CASE("unit quality reproduces classification-only ranking") {
  std::mt19937_64 rng(24);
  for (int t = 0; t < 20; ++t) {
    auto preds = random_preds(rng, 25, 18, 8);
    auto with_one = preds;
    for (auto& p : with_one) p.s_qua = 1.0;
    for (auto& p : preds) p.s_qua.reset();
    CHECK(run_inference_fusion(preds, 25, 18, {}) == run_inference_fusion(with_one, 25, 18, {}));
  }
}

TEST_CASE("fusion equals resolve_overlaps of the pasted survivors") {
  std::mt19937_64 rng(25);
  const InferenceConfig cfg{0.3, 0.5};
  for (int t = 0; t < 30; ++t) {
    auto preds = random_preds(rng, 32, 24, 10);
    std::vector<ScoredMask> masks;
    for (const auto& p : preds)
      if (p.s_cls >= cfg.beta) masks.push_back({paste_mask(p, 32, 24, cfg), conf(p), p.id});
    auto want = masks.empty() ? InstanceMap(32, 24) : ref::argmax_overlaps(masks, 32, 24);
    CHECK(run_inference_fusion(preds, 32, 24, cfg) == want);
  }
}

TEST_CASE("fusion is invariant to input order") {
  std::mt19937_64 rng(26);
  auto preds = random_preds(rng, 40, 30, 15);
  const auto base = run_inference_fusion(preds, 40, 30, {0.2, 0.5});
  for (int t = 0; t < 20; ++t) {
    std::shuffle(preds.begin(), preds.end(), rng);
    CHECK(run_inference_fusion(preds, 40, 30, {0.2, 0.5}) == base);
  }
}

TEST_CASE("raising beta never adds foreground") {
  std::mt19937_64 rng(27);
  for (int t = 0; t < 20; ++t) {
    auto preds = random_preds(rng, 30, 30, 12);
    std::int64_t prev = -1;
    for (double beta : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
      auto fg = BinaryMask::foreground(run_inference_fusion(preds, 30, 30, {beta, 0.5})).count();
      if (prev >= 0) CHECK(fg <= prev);
      prev = fg;
    }
  }
}

TEST_CASE("fusion edge cases") {
  CHECK(run_inference_fusion({}, 5, 4, {}) == InstanceMap(5, 4));
  std::vector<InstancePrediction> dup{constant_pred({0, 0, 2, 2}, 5, 0.9, {}, 3), constant_pred({1, 1, 2, 2}, 5, 0.8, {}, 3)};
  CHECK_THROWS_AS(run_inference_fusion(dup, 5, 4, {}), InvalidArgument);
  std::vector<InstancePrediction> outside{constant_pred({4, 0, 2, 2}, 5, 0.9, {}, 1)};
  CHECK_THROWS_AS(run_inference_fusion(outside, 5, 4, {}), InvalidArgument);
  std::vector<InstancePrediction> hidden{constant_pred({0, 0, 2, 2}, -5, 0.9, {}, 1)};
  CHECK(run_inference_fusion(hidden, 5, 4, {}) == InstanceMap(5, 4));
}
