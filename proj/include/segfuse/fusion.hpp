#pragma once

#include <span>
#include <vector>

#include "segfuse/core_types.hpp"

namespace segfuse::fusion {

/// Mask-head output for one ROI: box on the feature grid plus the 28x28
/// foreground logits.
struct RoiPrediction {
  BoundingBox box;
  RealGrid mask_logits{kRoiMaskSize, kRoiMaskSize};
};

/// Every term of the training objective. All finite and >= 0.
struct LossComponents {
  double rpn_obj = 0.0;
  double rpn_reg = 0.0;
  double det_cls = 0.0;
  double det_reg = 0.0;
  double det_mask = 0.0;
  double det_qua = 0.0;
  double semseg1 = 0.0;
  double semseg2 = 0.0;
  double sem_cons = 0.0;
};

struct LossWeights {
  double alpha1 = 0.1;  ///< semantic segmentation losses
  double alpha2 = 1.0;  ///< consistency regularizer
};

/// Elementwise logistic function. Throws InvalidArgument on NaN.
RealGrid sigmoid_map(const RealGrid& logits);

/// Residual attention feature fusion. ROIs are applied in list order; step i
/// multiplies the running features inside box i, on every channel, by
/// 1 + resize(sigmoid(logits_i), w_i, h_i). Pixels outside all boxes are
/// copied unchanged. Throws InvalidArgument for a box outside `f0`.
FeatureMap raff(const FeatureMap& f0, std::span<const RoiPrediction> rois);

/// d/d(logits) of sum(upstream * raff(f0, {roi})).
RealGrid raff_attention_grad(const FeatureMap& f0, const RoiPrediction& roi, const FeatureMap& upstream);

/// Average of Dice and IoU between a predicted and a target mask. Throws when
/// both masks are empty.
double mask_quality_target(const BinaryMask& mp, const BinaryMask& mt);

/// s_cls * s_qua; both must lie in [0, 1].
double confidence(double s_cls, double s_qua);

/// Mean squared difference between two foreground probability maps.
double consistency_loss(const RealGrid& p_sem, const RealGrid& p_ins);

/// Gradient of consistency_loss with respect to p_ins: 2 (p_ins - p_sem) / N.
RealGrid consistency_loss_grad(const RealGrid& p_sem, const RealGrid& p_ins);

/// Weighted sum of the loss terms; the six instance-branch terms have weight 1.
double total_loss(const LossComponents& c, const LossWeights& w = {});

inline constexpr int kRoiFeatureChannels = 256;
inline constexpr int kRoiFeatureSize = 14;
inline constexpr int kQualityInputChannels = kRoiFeatureChannels + 4;

/// Input of the mask-quality head: the 256x14x14 ROI features followed by the
/// foreground channel (index 1) of the 2x28x28 mask logits folded
/// space-to-depth into 4x14x14. Within each 2x2 block, (dy, dx) goes to
/// channel 256 + 2*dy + dx.
FeatureMap quality_input_fusion(const FeatureMap& roi_features, const FeatureMap& mask_logits);

}  // namespace segfuse::fusion
