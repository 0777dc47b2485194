#include "segfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace segfuse {

namespace {

// Smallest first, so the result does not depend on label order.
double ordered_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  return std::accumulate(terms.begin(), terms.end(), 0.0);
}

}  // namespace

namespace from_table {

double aji(const kernels::OverlapTable& t) {
  std::vector<char> used(t.pred.size(), 0);
  std::int64_t inter_sum = 0;
  std::int64_t union_sum = 0;
  for (std::size_t g = 0; g < t.gt.size(); ++g) {
    const std::int64_t g_area = t.gt[g].area;
    const kernels::Overlap* best = nullptr;
    std::int64_t best_union = 1;
    for (const auto& o : t.gt_row(g)) {
      if (used[o.pred]) continue;
      std::int64_t uni = g_area + t.pred[o.pred].area - o.count;
      // o.count / uni > best->count / best_union, compared exactly. Rows are in
      // ascending prediction label, so ties keep the lower label.
      if (best == nullptr || o.count * best_union > best->count * uni) {
        best = &o;
        best_union = uni;
      }
    }
    if (best == nullptr) {
      union_sum += g_area;
      continue;
    }
    used[best->pred] = 1;
    inter_sum += best->count;
    union_sum += best_union;
  }
  for (std::size_t p = 0; p < t.pred.size(); ++p)
    if (!used[p]) union_sum += t.pred[p].area;

  if (union_sum == 0) return 1.0;
  return static_cast<double>(inter_sum) / static_cast<double>(union_sum);
}

F1Result object_f1(const kernels::OverlapTable& t, std::span<const std::uint32_t> pred_order) {
  std::vector<char> claimed(t.gt.size(), 0);
  F1Result r;
  for (std::uint32_t p : pred_order) {
    const kernels::Overlap* best = nullptr;
    for (std::size_t k = t.pred_begin[p]; k < t.pred_begin[p + 1]; ++k) {
      const auto& o = t.pairs[t.by_pred[k]];
      if (claimed[o.gt]) continue;
      // Equal overlap: the smaller instance, which the prediction covers more of.
      if (best == nullptr || o.count > best->count ||
          (o.count == best->count && t.gt[o.gt].area < t.gt[best->gt].area))
        best = &o;
    }
    if (best != nullptr && 2 * best->count > t.gt[best->gt].area) {
      claimed[best->gt] = 1;
      ++r.counts.tp;
    } else {
      ++r.counts.fp;
    }
  }
  r.counts.fn_ = static_cast<std::int64_t>(t.gt.size()) - r.counts.tp;
  const std::int64_t denom = r.counts.fn_ + 2 * r.counts.tp + r.counts.fp;
  r.f1 = denom == 0 ? 1.0 : 2.0 * static_cast<double>(r.counts.tp) / static_cast<double>(denom);
  return r;
}

PqResult panoptic_quality(const kernels::OverlapTable& t) {
  PqResult r;
  if (t.gt.empty() && t.pred.empty()) {
    r.pq = r.dq = r.sq = 1.0;
    return r;
  }
  std::vector<char> gt_matched(t.gt.size(), 0);
  std::vector<char> pred_matched(t.pred.size(), 0);
  std::vector<double> ious;
  for (const auto& o : t.pairs) {
    std::int64_t uni = t.gt[o.gt].area + t.pred[o.pred].area - o.count;
    if (2 * o.count <= uni) continue;
    // IoU > 0.5 forces a one-to-one matching; a repeat means a broken table.
    if (gt_matched[o.gt] || pred_matched[o.pred])
      throw std::logic_error("panoptic_quality: instance in two IoU>0.5 pairs");
    gt_matched[o.gt] = pred_matched[o.pred] = 1;
    ++r.counts.tp;
    ious.push_back(static_cast<double>(o.count) / static_cast<double>(uni));
  }
  r.matched_iou_sum = ordered_sum(ious);
  r.counts.fp = static_cast<std::int64_t>(t.pred.size()) - r.counts.tp;
  r.counts.fn_ = static_cast<std::int64_t>(t.gt.size()) - r.counts.tp;
  r.dq = 2.0 * static_cast<double>(r.counts.tp) /
         static_cast<double>(2 * r.counts.tp + r.counts.fp + r.counts.fn_);
  r.sq = r.counts.tp == 0 ? 0.0 : r.matched_iou_sum / static_cast<double>(r.counts.tp);
  r.pq = r.dq * r.sq;
  return r;
}

double pixel_dice(const kernels::OverlapTable& t) {
  std::int64_t g = 0, p = 0, both = 0;
  for (const auto& e : t.gt) g += e.area;
  for (const auto& e : t.pred) p += e.area;
  for (const auto& o : t.pairs) both += o.count;
  if (g + p == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(g + p);
}

double best_dice_gt_vs_pred(const kernels::OverlapTable& t) {
  if (t.gt.empty()) throw InvalidArgument("best_dice: first map has no instances");
  std::vector<double> bests;
  for (std::size_t g = 0; g < t.gt.size(); ++g) {
    double best = 0.0;
    for (const auto& o : t.gt_row(g)) {
      double d = 2.0 * static_cast<double>(o.count) / static_cast<double>(t.gt[g].area + t.pred[o.pred].area);
      best = std::max(best, d);
    }
    bests.push_back(best);
  }
  return ordered_sum(bests) / static_cast<double>(t.gt.size());
}

double best_dice_pred_vs_gt(const kernels::OverlapTable& t) {
  if (t.pred.empty()) throw InvalidArgument("best_dice: first map has no instances");
  std::vector<double> bests;
  for (std::size_t p = 0; p < t.pred.size(); ++p) {
    double best = 0.0;
    for (std::size_t k = t.pred_begin[p]; k < t.pred_begin[p + 1]; ++k) {
      const auto& o = t.pairs[t.by_pred[k]];
      double d = 2.0 * static_cast<double>(o.count) / static_cast<double>(t.pred[p].area + t.gt[o.gt].area);
      best = std::max(best, d);
    }
    bests.push_back(best);
  }
  return ordered_sum(bests) / static_cast<double>(t.pred.size());
}

}  // namespace from_table

namespace {

std::vector<std::uint32_t> ascending(std::size_t n) {
  std::vector<std::uint32_t> v(n);
  std::iota(v.begin(), v.end(), 0u);
  return v;
}

std::vector<std::uint32_t> resolve_order(const kernels::OverlapTable& t, std::span<const Label> order) {
  std::unordered_map<Label, std::uint32_t> index;
  for (std::uint32_t i = 0; i < t.pred.size(); ++i) index.emplace(t.pred[i].label, i);
  std::vector<char> seen(t.pred.size(), 0);
  std::vector<std::uint32_t> out;
  out.reserve(order.size());
  for (Label l : order) {
    auto it = index.find(l);
    if (it == index.end())
      throw InvalidArgument("object_f1: order references unknown prediction label " + std::to_string(l));
    if (seen[it->second])
      throw InvalidArgument("object_f1: order lists prediction label " + std::to_string(l) + " twice");
    seen[it->second] = 1;
    out.push_back(it->second);
  }
  if (out.size() != t.pred.size())
    throw InvalidArgument("object_f1: order must list every prediction label exactly once");
  return out;
}

MetricSummary summarize(const std::vector<double>& v) {
  MetricSummary s;
  s.n_images = static_cast<std::int64_t>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(v.size()));
  return s;
}

}  // namespace

double aji(const InstanceMap& gt, const InstanceMap& pred) {
  return from_table::aji(kernels::overlap_table(gt, pred));
}

F1Result object_f1(const InstanceMap& gt, const InstanceMap& pred, std::optional<std::span<const Label>> order) {
  auto t = kernels::overlap_table(gt, pred);
  auto dense = order ? resolve_order(t, *order) : ascending(t.pred.size());
  return from_table::object_f1(t, dense);
}

PqResult panoptic_quality(const InstanceMap& gt, const InstanceMap& pred) {
  return from_table::panoptic_quality(kernels::overlap_table(gt, pred));
}

double pixel_dice(const InstanceMap& gt, const InstanceMap& pred) {
  if (gt.width() != pred.width() || gt.height() != pred.height())
    throw DimensionMismatch("pixel_dice: label maps differ in size");
  std::int64_t g = 0, p = 0, both = 0;
  auto gl = gt.labels();
  auto pl = pred.labels();
  for (std::size_t i = 0; i < gl.size(); ++i) {
    const bool a = gl[i] != 0;
    const bool b = pl[i] != 0;
    g += a;
    p += b;
    both += a && b;
  }
  if (g + p == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(g + p);
}

double best_dice(const InstanceMap& p, const InstanceMap& t) {
  return from_table::best_dice_gt_vs_pred(kernels::overlap_table(p, t));
}

double sbd(const InstanceMap& p, const InstanceMap& t) {
  auto table = kernels::overlap_table(p, t);
  if (table.gt.empty() || table.pred.empty()) throw InvalidArgument("sbd: both maps need at least one instance");
  return std::min(from_table::best_dice_gt_vs_pred(table), from_table::best_dice_pred_vs_gt(table));
}

ImageMetrics evaluate_image(const InstanceMap& gt, const InstanceMap& pred, bool with_sbd) {
  auto t = kernels::overlap_table(gt, pred);
  ImageMetrics m;
  m.aji = from_table::aji(t);
  m.dice = from_table::pixel_dice(t);
  m.f1 = from_table::object_f1(t, ascending(t.pred.size())).f1;
  m.pq = from_table::panoptic_quality(t);
  if (with_sbd && !t.gt.empty() && !t.pred.empty())
    m.sbd = std::min(from_table::best_dice_pred_vs_gt(t), from_table::best_dice_gt_vs_pred(t));
  return m;
}

AggregateMetrics aggregate(std::span<const ImageMetrics> values) {
  if (values.empty()) throw InvalidArgument("aggregate: no images");
  auto collect = [&](auto get) {
    std::vector<double> v;
    v.reserve(values.size());
    for (const auto& m : values) v.push_back(get(m));
    return summarize(v);
  };
  AggregateMetrics a;
  a.aji = collect([](const ImageMetrics& m) { return m.aji; });
  a.dice = collect([](const ImageMetrics& m) { return m.dice; });
  a.f1 = collect([](const ImageMetrics& m) { return m.f1; });
  a.pq = collect([](const ImageMetrics& m) { return m.pq.pq; });
  a.dq = collect([](const ImageMetrics& m) { return m.pq.dq; });
  a.sq = collect([](const ImageMetrics& m) { return m.pq.sq; });
  std::vector<double> sbd_values;
  for (const auto& m : values)
    if (m.sbd) sbd_values.push_back(*m.sbd);
  if (!sbd_values.empty()) a.sbd = summarize(sbd_values);
  return a;
}

}  // namespace segfuse
