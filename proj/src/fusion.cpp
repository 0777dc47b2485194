#include "segfuse/fusion.hpp"

#include <cmath>
#include <string>

#include "segfuse/resize.hpp"

namespace segfuse::fusion {

namespace {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_roi(const FeatureMap& f, const RoiPrediction& roi, std::size_t index) {
  if (!roi.box.fits_in(f.width(), f.height()))
    throw InvalidArgument("raff: roi " + std::to_string(index) + " " + describe(roi.box) +
                          " is outside the " + std::to_string(f.width()) + "x" + std::to_string(f.height()) +
                          " feature map");
  if (roi.mask_logits.width() < 1 || roi.mask_logits.height() < 1)
    throw InvalidArgument("raff: roi " + std::to_string(index) + " has empty mask logits");
}

void check_probability_pair(const RealGrid& a, const RealGrid& b, const char* op) {
  if (!a.same_shape(b)) throw DimensionMismatch(std::string(op) + ": probability maps differ in shape");
  if (a.size() == 0) throw InvalidArgument(std::string(op) + ": empty probability map");
  for (auto grid : {&a, &b})
    for (double v : grid->values())
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(std::string(op) + ": probability outside [0,1]");
}

// Attention factor 1 + R(sigma(M)) over the box.
RealGrid attention(const RoiPrediction& roi) {
  RealGrid a = resize_bilinear(sigmoid_map(roi.mask_logits), roi.box.w, roi.box.h);
  for (double& v : a.values()) v += 1.0;
  return a;
}

}  // namespace

RealGrid sigmoid_map(const RealGrid& logits) {
  RealGrid out(logits.width(), logits.height());
  auto src = logits.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (std::isnan(src[i])) throw InvalidArgument("sigmoid_map: NaN logit");
    dst[i] = logistic(src[i]);
  }
  return out;
}

FeatureMap raff(const FeatureMap& f0, std::span<const RoiPrediction> rois) {
  for (std::size_t i = 0; i < rois.size(); ++i) check_roi(f0, rois[i], i);
  FeatureMap f = f0;
  const int channels = f.channels();
  for (const auto& roi : rois) {
    const RealGrid factor = attention(roi);
    const BoundingBox& b = roi.box;
#pragma omp parallel for schedule(static) if (static_cast<std::size_t>(channels) * b.w * b.h >= 1 << 16)
    for (int c = 0; c < channels; ++c)
      for (int y = 0; y < b.h; ++y)
        for (int x = 0; x < b.w; ++x) f.at(c, b.x + x, b.y + y) *= factor.at(x, y);
  }
  return f;
}

RealGrid raff_attention_grad(const FeatureMap& f0, const RoiPrediction& roi, const FeatureMap& upstream) {
  if (!f0.same_shape(upstream)) throw DimensionMismatch("raff_attention_grad: upstream shape differs from f0");
  check_roi(f0, roi, 0);
  const BoundingBox& b = roi.box;
  // d/dR of sum(U * F0 * (1 + R)) over the box, summed over channels.
  RealGrid d_resized(b.w, b.h);
  for (int c = 0; c < f0.channels(); ++c)
    for (int y = 0; y < b.h; ++y)
      for (int x = 0; x < b.w; ++x) d_resized.at(x, y) += upstream.at(c, b.x + x, b.y + y) * f0.at(c, b.x + x, b.y + y);

  RealGrid d_prob = resize_bilinear_adjoint(d_resized, roi.mask_logits.width(), roi.mask_logits.height());
  const RealGrid prob = sigmoid_map(roi.mask_logits);
  auto p = prob.values();
  auto g = d_prob.values();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= p[i] * (1.0 - p[i]);
  return d_prob;
}

double mask_quality_target(const BinaryMask& mp, const BinaryMask& mt) {
  auto c = pair_counts(mp, mt);
  if (c.a == 0 && c.b == 0) throw InvalidArgument("mask_quality_target: both masks are empty");
  return 0.5 * (dice_pair(mp, mt) + iou(mp, mt));
}

double confidence(double s_cls, double s_qua) {
  if (!(s_cls >= 0.0 && s_cls <= 1.0)) throw InvalidArgument("confidence: s_cls outside [0,1]");
  if (!(s_qua >= 0.0 && s_qua <= 1.0)) throw InvalidArgument("confidence: s_qua outside [0,1]");
  return s_cls * s_qua;
}

double consistency_loss(const RealGrid& p_sem, const RealGrid& p_ins) {
  check_probability_pair(p_sem, p_ins, "consistency_loss");
  auto a = p_sem.values();
  auto b = p_ins.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return sum / static_cast<double>(a.size());
}

RealGrid consistency_loss_grad(const RealGrid& p_sem, const RealGrid& p_ins) {
  check_probability_pair(p_sem, p_ins, "consistency_loss_grad");
  RealGrid out(p_ins.width(), p_ins.height());
  const double n = static_cast<double>(p_ins.size());
  auto a = p_sem.values();
  auto b = p_ins.values();
  auto g = out.values();
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = 2.0 * (b[i] - a[i]) / n;
  return out;
}

double total_loss(const LossComponents& c, const LossWeights& w) {
  if (!(std::isfinite(w.alpha1) && std::isfinite(w.alpha2)) || w.alpha1 < 0.0 || w.alpha2 < 0.0)
    throw InvalidArgument("total_loss: weights must be finite and >= 0");
  const double terms[] = {c.rpn_obj, c.rpn_reg,  c.det_cls,  c.det_reg, c.det_mask,
                          c.det_qua, c.semseg1, c.semseg2, c.sem_cons};
  for (double t : terms) {
    if (!std::isfinite(t)) throw InvalidArgument("total_loss: non-finite component");
    if (t < 0.0) throw InvalidArgument("total_loss: negative component");
  }
  return c.rpn_obj + c.rpn_reg + c.det_cls + c.det_reg + c.det_mask + c.det_qua +
         w.alpha1 * (c.semseg1 + c.semseg2) + w.alpha2 * c.sem_cons;
}

FeatureMap quality_input_fusion(const FeatureMap& roi_features, const FeatureMap& mask_logits) {
  if (roi_features.channels() != kRoiFeatureChannels || roi_features.width() != kRoiFeatureSize ||
      roi_features.height() != kRoiFeatureSize)
    throw DimensionMismatch("quality_input_fusion: roi features must be 256x14x14");
  if (mask_logits.channels() != 2 || mask_logits.width() != kRoiMaskSize || mask_logits.height() != kRoiMaskSize)
    throw DimensionMismatch("quality_input_fusion: mask logits must be 2x28x28");

  FeatureMap out(kQualityInputChannels, kRoiFeatureSize, kRoiFeatureSize);
  auto src = roi_features.values();
  std::copy(src.begin(), src.end(), out.values().begin());
  constexpr int kForeground = 1;
  for (int by = 0; by < kRoiFeatureSize; ++by)
    for (int bx = 0; bx < kRoiFeatureSize; ++bx)
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx)
          out.at(kRoiFeatureChannels + 2 * dy + dx, bx, by) = mask_logits.at(kForeground, 2 * bx + dx, 2 * by + dy);
  return out;
}

}  // namespace segfuse::fusion
