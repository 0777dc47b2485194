#pragma once

#include <functional>
#include <span>
#include <vector>

#include "segfuse/core_types.hpp"
#include "segfuse/fusion.hpp"
#include "segfuse/inference.hpp"

// Brute-force implementations that follow the metric and fusion formulas
// literally, pixel by pixel. Slow; only for checking the library.
namespace segfuse::ref {

/// Distinct nonzero labels, ascending, by full scan.
std::vector<Label> labels_of(const InstanceMap& m);

struct Counts {
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::int64_t both = 0;
};
/// Pixel counts of label `la` in `a`, `lb` in `b` and their intersection.
Counts count_pair(const InstanceMap& a, Label la, const InstanceMap& b, Label lb);

double aji(const InstanceMap& gt, const InstanceMap& pred);

struct PqOracle {
  double pq = 0.0, dq = 0.0, sq = 0.0;
  std::int64_t tp = 0, fp = 0, fn_ = 0;
  /// Number of times an instance appeared in a second IoU>0.5 pair.
  int uniqueness_violations = 0;
};
PqOracle panoptic_quality(const InstanceMap& gt, const InstanceMap& pred);

struct F1Oracle {
  double f1 = 0.0;
  std::int64_t tp = 0, fp = 0, fn_ = 0;
};
/// `order` lists prediction labels; empty means ascending.
F1Oracle object_f1(const InstanceMap& gt, const InstanceMap& pred, std::vector<Label> order = {});

double pixel_dice(const InstanceMap& gt, const InstanceMap& pred);
double best_dice(const InstanceMap& p, const InstanceMap& t);

/// Bilinear resize evaluated per destination pixel from the closed form.
RealGrid bilinear(const RealGrid& src, int target_w, int target_h);

/// Algorithm-level RAFF: one ROI at a time, every pixel and channel visited.
FeatureMap raff_stepwise(const FeatureMap& f0, std::span<const fusion::RoiPrediction> rois);

/// Per-pixel argmax over s_conf (ties to the lower id).
InstanceMap argmax_overlaps(std::span<const inference::ScoredMask> masks, int w, int h);

/// Central difference gradient of `f` at `x`.
std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                       std::vector<double> x, double h);

/// Norm-wise relative error ||a - b|| / max(||a||, ||b||), 0 when both vanish.
double relative_error(std::span<const double> a, std::span<const double> b);

}  // namespace segfuse::ref
