#pragma once

#include <span>
#include <vector>

#include "segfuse/core_types.hpp"

namespace segfuse::inference {

struct InferenceConfig {
  double beta = 0.5;        ///< drop predictions with s_cls < beta
  double bin_thresh = 0.5;  ///< pixel is foreground iff probability > bin_thresh
};

/// Throws InvalidArgument unless beta in [0,1] and bin_thresh in (0,1).
void validate(const InferenceConfig& cfg);

/// One pasted, scored candidate on the full canvas.
struct ScoredMask {
  BinaryMask mask;
  double s_conf = 0.0;
  Label id = 0;
};

/// Sigmoid, resize to the box, place on the canvas and binarize with a
/// strict > comparison. Throws InvalidArgument when the box leaves the canvas.
BinaryMask paste_mask(const InstancePrediction& pred, int canvas_w, int canvas_h, const InferenceConfig& cfg);

/// Keeps predictions with s_cls >= beta, in order.
std::vector<InstancePrediction> filter_by_score(std::span<const InstancePrediction> preds, const InferenceConfig& cfg);

/// Assigns each claimed pixel to the mask of highest s_conf, ties to the lower
/// id. Ids become labels, so they must be unique and nonzero.
InstanceMap resolve_overlaps(std::span<const ScoredMask> masks);

/// filter_by_score -> s_conf = s_cls * s_qua (missing s_qua counts as 1) ->
/// paste -> drop empty -> resolve_overlaps. Independent of input order.
InstanceMap run_inference_fusion(std::span<const InstancePrediction> preds, int canvas_w, int canvas_h,
                                 const InferenceConfig& cfg);

}  // namespace segfuse::inference
