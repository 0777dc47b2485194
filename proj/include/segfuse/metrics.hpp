#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "segfuse/core_types.hpp"
#include "segfuse/overlap.hpp"

namespace segfuse {

struct MatchCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn_ = 0;

  friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

struct PqResult {
  double pq = 0.0;
  double dq = 0.0;
  double sq = 0.0;  ///< mean IoU over TP pairs, 0 when there are none
  MatchCounts counts;
  double matched_iou_sum = 0.0;
};

struct F1Result {
  double f1 = 0.0;
  MatchCounts counts;
};

struct ImageMetrics {
  double aji = 0.0;
  double dice = 0.0;
  double f1 = 0.0;
  PqResult pq;
  std::optional<double> sbd;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;
  std::int64_t n_images = 0;
};

struct AggregateMetrics {
  MetricSummary aji, dice, f1, pq, dq, sq;
  std::optional<MetricSummary> sbd;  ///< over images where sbd was computed
};

/// Aggregated Jaccard Index. GT instances are visited in ascending label order;
/// each takes the unused prediction of highest IoU among those it intersects
/// (ties to the lower prediction label). Unused predictions are added to the
/// denominator. 1.0 when both maps are empty.
double aji(const InstanceMap& gt, const InstanceMap& pred);

/// Object-level F1. Predictions are processed in `order` (default: ascending
/// label); each claims the unclaimed GT instance it overlaps most and is a
/// true positive iff that overlap exceeds half of the GT instance.
F1Result object_f1(const InstanceMap& gt, const InstanceMap& pred,
                   std::optional<std::span<const Label>> order = std::nullopt);

/// PQ = DQ * SQ with IoU > 0.5 matching.
PqResult panoptic_quality(const InstanceMap& gt, const InstanceMap& pred);

/// Dice between the binarized foregrounds; 1.0 when both are empty.
double pixel_dice(const InstanceMap& gt, const InstanceMap& pred);

/// Mean over instances of `p` of the best Dice against any instance of `t`.
/// Throws InvalidArgument when `p` has no instances.
double best_dice(const InstanceMap& p, const InstanceMap& t);

/// min(best_dice(p, t), best_dice(t, p)); throws when either map is empty.
double sbd(const InstanceMap& p, const InstanceMap& t);

/// AJI, Dice, F1 and PQ, plus SBD when `with_sbd` and both maps are nonempty.
/// One overlap table is shared by all metrics.
ImageMetrics evaluate_image(const InstanceMap& gt, const InstanceMap& pred, bool with_sbd);

/// Per-metric mean and population standard deviation.
AggregateMetrics aggregate(std::span<const ImageMetrics> values);

/// Overlap-table entry points, for callers that already hold a table.
namespace from_table {
double aji(const kernels::OverlapTable& t);
F1Result object_f1(const kernels::OverlapTable& t, std::span<const std::uint32_t> pred_order);
PqResult panoptic_quality(const kernels::OverlapTable& t);
double pixel_dice(const kernels::OverlapTable& t);
double best_dice_gt_vs_pred(const kernels::OverlapTable& t);
double best_dice_pred_vs_gt(const kernels::OverlapTable& t);
}  // namespace from_table

}  // namespace segfuse
