#include "segfuse/inference.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_set>

#include "segfuse/fusion.hpp"
#include "segfuse/resize.hpp"

namespace segfuse::inference {

namespace {

// Binarized mask restricted to the prediction box, row-major w x h.
std::vector<std::uint8_t> paste_patch(const InstancePrediction& pred, int canvas_w, int canvas_h,
                                      const InferenceConfig& cfg) {
  segfuse::validate(pred);
  if (!pred.box.fits_in(canvas_w, canvas_h))
    throw InvalidArgument("paste_mask: prediction " + std::to_string(pred.id) + " " + describe(pred.box) +
                          " is outside the " + std::to_string(canvas_w) + "x" + std::to_string(canvas_h) +
                          " canvas");
  const RealGrid prob = resize_bilinear(fusion::sigmoid_map(pred.mask_logits), pred.box.w, pred.box.h);
  std::vector<std::uint8_t> patch(prob.size());
  auto v = prob.values();
  for (std::size_t i = 0; i < v.size(); ++i) patch[i] = v[i] > cfg.bin_thresh ? 1 : 0;
  return patch;
}

struct Ranked {
  double s_conf;
  Label id;
};

// Higher confidence first, then lower id.
bool outranks(const Ranked& a, const Ranked& b) {
  if (a.s_conf != b.s_conf) return a.s_conf > b.s_conf;
  return a.id < b.id;
}

void require_unique_ids(std::span<const Label> ids) {
  std::unordered_set<Label> seen;
  for (Label id : ids) {
    if (id == 0) throw InvalidArgument("instance id 0 is reserved for background");
    if (!seen.insert(id).second) throw InvalidArgument("duplicate instance id " + std::to_string(id));
  }
}

}  // namespace

void validate(const InferenceConfig& cfg) {
  if (!(cfg.beta >= 0.0 && cfg.beta <= 1.0)) throw InvalidArgument("beta must lie in [0,1]");
  if (!(cfg.bin_thresh > 0.0 && cfg.bin_thresh < 1.0)) throw InvalidArgument("bin_thresh must lie in (0,1)");
}

BinaryMask paste_mask(const InstancePrediction& pred, int canvas_w, int canvas_h, const InferenceConfig& cfg) {
  validate(cfg);
  const auto patch = paste_patch(pred, canvas_w, canvas_h, cfg);
  BinaryMask mask(canvas_w, canvas_h);
  const BoundingBox& b = pred.box;
  for (int y = 0; y < b.h; ++y)
    for (int x = 0; x < b.w; ++x)
      if (patch[static_cast<std::size_t>(y) * b.w + x]) mask.set(b.x + x, b.y + y, true);
  return mask;
}

std::vector<InstancePrediction> filter_by_score(std::span<const InstancePrediction> preds,
                                                const InferenceConfig& cfg) {
  validate(cfg);
  std::vector<InstancePrediction> kept;
  for (const auto& p : preds)
    if (!(p.s_cls < cfg.beta)) kept.push_back(p);
  return kept;
}

InstanceMap resolve_overlaps(std::span<const ScoredMask> masks) {
  if (masks.empty()) return InstanceMap{};
  const int w = masks.front().mask.width();
  const int h = masks.front().mask.height();
  std::vector<Label> ids;
  for (const auto& m : masks) {
    if (m.mask.width() != w || m.mask.height() != h)
      throw DimensionMismatch("resolve_overlaps: masks differ in canvas size");
    ids.push_back(m.id);
  }
  require_unique_ids(ids);

  std::vector<std::size_t> order(masks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return outranks({masks[a].s_conf, masks[a].id}, {masks[b].s_conf, masks[b].id});
  });

  // Painting in rank order and never overwriting equals the per-pixel argmax.
  InstanceMap out(w, h);
  auto labels = out.labels();
  for (std::size_t k : order) {
    auto bits = masks[k].mask.bits();
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i] && labels[i] == 0) labels[i] = masks[k].id;
  }
  return out;
}

InstanceMap run_inference_fusion(std::span<const InstancePrediction> preds, int canvas_w, int canvas_h,
                                 const InferenceConfig& cfg) {
  validate(cfg);
  if (canvas_w < 0 || canvas_h < 0) throw InvalidArgument("canvas dimensions must be >= 0");
  const auto kept = filter_by_score(preds, cfg);

  std::vector<Label> ids;
  std::vector<Ranked> ranked;
  for (const auto& p : kept) {
    ids.push_back(p.id);
    ranked.push_back({fusion::confidence(p.s_cls, p.s_qua.value_or(1.0)), p.id});
  }
  require_unique_ids(ids);

  std::vector<std::size_t> order(kept.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return outranks(ranked[a], ranked[b]); });

  // Masks are pasted box-locally and claimed in rank order, which matches
  // resolve_overlaps over the full-canvas pasted masks.
  InstanceMap out(canvas_w, canvas_h);
  for (std::size_t k : order) {
    const auto& p = kept[k];
    const auto patch = paste_patch(p, canvas_w, canvas_h, cfg);
    const BoundingBox& b = p.box;
    for (int y = 0; y < b.h; ++y)
      for (int x = 0; x < b.w; ++x)
        if (patch[static_cast<std::size_t>(y) * b.w + x] && out.at(b.x + x, b.y + y) == 0)
          out.set(b.x + x, b.y + y, p.id);
  }
  return out;
}

}  // namespace segfuse::inference
