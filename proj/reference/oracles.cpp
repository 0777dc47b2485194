#include "segfuse_ref/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace segfuse::ref {

std::vector<Label> labels_of(const InstanceMap& m) {
  std::set<Label> s;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.at(x, y) != 0) s.insert(m.at(x, y));
  return {s.begin(), s.end()};
}

Counts count_pair(const InstanceMap& a, Label la, const InstanceMap& b, Label lb) {
  if (a.width() != b.width() || a.height() != b.height()) throw DimensionMismatch("oracle: size mismatch");
  Counts c;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      const bool in_a = a.at(x, y) == la;
      const bool in_b = b.at(x, y) == lb;
      c.a += in_a;
      c.b += in_b;
      c.both += in_a && in_b;
    }
  return c;
}

double aji(const InstanceMap& gt, const InstanceMap& pred) {
  const auto g_labels = labels_of(gt);
  const auto p_labels = labels_of(pred);
  std::vector<bool> used(p_labels.size(), false);
  std::int64_t numerator = 0;
  std::int64_t denominator = 0;
  for (Label g : g_labels) {
    int best = -1;
    double best_iou = -1.0;
    std::int64_t best_inter = 0, best_union = 0;
    for (std::size_t j = 0; j < p_labels.size(); ++j) {
      if (used[j]) continue;
      const Counts c = count_pair(gt, g, pred, p_labels[j]);
      if (c.both == 0) continue;
      const std::int64_t uni = c.a + c.b - c.both;
      const double v = static_cast<double>(c.both) / static_cast<double>(uni);
      if (v > best_iou) {
        best_iou = v;
        best = static_cast<int>(j);
        best_inter = c.both;
        best_union = uni;
      }
    }
    if (best < 0) {
      denominator += count_pair(gt, g, gt, g).a;
    } else {
      used[static_cast<std::size_t>(best)] = true;
      numerator += best_inter;
      denominator += best_union;
    }
  }
  for (std::size_t j = 0; j < p_labels.size(); ++j)
    if (!used[j]) denominator += count_pair(pred, p_labels[j], pred, p_labels[j]).a;
  if (denominator == 0) return 1.0;
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

PqOracle panoptic_quality(const InstanceMap& gt, const InstanceMap& pred) {
  const auto g_labels = labels_of(gt);
  const auto p_labels = labels_of(pred);
  PqOracle r;
  if (g_labels.empty() && p_labels.empty()) {
    r.pq = r.dq = r.sq = 1.0;
    return r;
  }
  std::vector<int> g_hits(g_labels.size(), 0), p_hits(p_labels.size(), 0);
  std::vector<double> ious;
  for (std::size_t i = 0; i < g_labels.size(); ++i)
    for (std::size_t j = 0; j < p_labels.size(); ++j) {
      const Counts c = count_pair(gt, g_labels[i], pred, p_labels[j]);
      if (c.both == 0) continue;
      const double v = static_cast<double>(c.both) / static_cast<double>(c.a + c.b - c.both);
      if (!(v > 0.5)) continue;
      if (g_hits[i]++ > 0) ++r.uniqueness_violations;
      if (p_hits[j]++ > 0) ++r.uniqueness_violations;
      ++r.tp;
      ious.push_back(v);
    }
  // Summed smallest first, the label-independent order the library uses.
  std::sort(ious.begin(), ious.end());
  double iou_sum = 0.0;
  for (double v : ious) iou_sum += v;
  r.fp = static_cast<std::int64_t>(p_labels.size()) - r.tp;
  r.fn_ = static_cast<std::int64_t>(g_labels.size()) - r.tp;
  r.dq = 2.0 * static_cast<double>(r.tp) / static_cast<double>(2 * r.tp + r.fp + r.fn_);
  r.sq = r.tp ? iou_sum / static_cast<double>(r.tp) : 0.0;
  r.pq = r.dq * r.sq;
  return r;
}

F1Oracle object_f1(const InstanceMap& gt, const InstanceMap& pred, std::vector<Label> order) {
  const auto g_labels = labels_of(gt);
  if (order.empty()) order = labels_of(pred);
  std::vector<bool> claimed(g_labels.size(), false);
  F1Oracle r;
  for (Label p : order) {
    int best = -1;
    Counts best_c;
    for (std::size_t i = 0; i < g_labels.size(); ++i) {
      if (claimed[i]) continue;
      const Counts c = count_pair(pred, p, gt, g_labels[i]);
      if (c.both == 0) continue;
      if (best < 0 || c.both > best_c.both || (c.both == best_c.both && c.b < best_c.b)) {
        best = static_cast<int>(i);
        best_c = c;
      }
    }
    if (best >= 0 && static_cast<double>(best_c.both) > 0.5 * static_cast<double>(best_c.b)) {
      claimed[static_cast<std::size_t>(best)] = true;
      ++r.tp;
    } else {
      ++r.fp;
    }
  }
  r.fn_ = static_cast<std::int64_t>(g_labels.size()) - r.tp;
  const std::int64_t d = r.fn_ + 2 * r.tp + r.fp;
  r.f1 = d == 0 ? 1.0 : 2.0 * static_cast<double>(r.tp) / static_cast<double>(d);
  return r;
}

double pixel_dice(const InstanceMap& gt, const InstanceMap& pred) {
  std::int64_t g = 0, p = 0, both = 0;
  for (int y = 0; y < gt.height(); ++y)
    for (int x = 0; x < gt.width(); ++x) {
      const bool a = gt.at(x, y) > 0, b = pred.at(x, y) > 0;
      g += a;
      p += b;
      both += a && b;
    }
  if (g + p == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(g + p);
}

double best_dice(const InstanceMap& p, const InstanceMap& t) {
  const auto p_labels = labels_of(p);
  const auto t_labels = labels_of(t);
  if (p_labels.empty()) throw InvalidArgument("oracle best_dice: no instances");
  std::vector<double> bests;
  for (Label a : p_labels) {
    double best = 0.0;
    for (Label b : t_labels) {
      const Counts c = count_pair(p, a, t, b);
      best = std::max(best, 2.0 * static_cast<double>(c.both) / static_cast<double>(c.a + c.b));
    }
    bests.push_back(best);
  }
  std::sort(bests.begin(), bests.end());
  double sum = 0.0;
  for (double v : bests) sum += v;
  return sum / static_cast<double>(p_labels.size());
}

RealGrid bilinear(const RealGrid& src, int target_w, int target_h) {
  RealGrid out(target_w, target_h);
  for (int y = 0; y < target_h; ++y)
    for (int x = 0; x < target_w; ++x) {
      double sx = (x + 0.5) * src.width() / target_w - 0.5;
      double sy = (y + 0.5) * src.height() / target_h - 0.5;
      sx = std::min(std::max(sx, 0.0), src.width() - 1.0);
      sy = std::min(std::max(sy, 0.0), src.height() - 1.0);
      const int x0 = static_cast<int>(sx), y0 = static_cast<int>(sy);
      const int x1 = std::min(x0 + 1, src.width() - 1), y1 = std::min(y0 + 1, src.height() - 1);
      const double ax = sx - x0, ay = sy - y0;
      out.at(x, y) = (1 - ax) * (1 - ay) * src.at(x0, y0) + ax * (1 - ay) * src.at(x1, y0) +
                     (1 - ax) * ay * src.at(x0, y1) + ax * ay * src.at(x1, y1);
    }
  return out;
}

FeatureMap raff_stepwise(const FeatureMap& f0, std::span<const fusion::RoiPrediction> rois) {
  FeatureMap f = f0;
  for (const auto& roi : rois) {
    RealGrid prob(roi.mask_logits.width(), roi.mask_logits.height());
    for (int y = 0; y < prob.height(); ++y)
      for (int x = 0; x < prob.width(); ++x) prob.at(x, y) = 1.0 / (1.0 + std::exp(-roi.mask_logits.at(x, y)));
    const RealGrid r = bilinear(prob, roi.box.w, roi.box.h);
    FeatureMap next = f;
    for (int c = 0; c < f.channels(); ++c)
      for (int y = 0; y < f.height(); ++y)
        for (int x = 0; x < f.width(); ++x) {
          const bool inside = x >= roi.box.x && x < roi.box.x + roi.box.w && y >= roi.box.y && y < roi.box.y + roi.box.h;
          if (inside) next.at(c, x, y) = f.at(c, x, y) * (1.0 + r.at(x - roi.box.x, y - roi.box.y));
        }
    f = std::move(next);
  }
  return f;
}

InstanceMap argmax_overlaps(std::span<const inference::ScoredMask> masks, int w, int h) {
  InstanceMap out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const inference::ScoredMask* best = nullptr;
      for (const auto& m : masks) {
        if (!m.mask.at(x, y)) continue;
        if (!best || m.s_conf > best->s_conf || (m.s_conf == best->s_conf && m.id < best->id)) best = &m;
      }
      if (best) out.set(x, y, best->id);
    }
  return out;
}

std::vector<double> central_difference(const std::function<double(std::span<const double>)>& f,
                                       std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double up = f(x);
    x[i] = xi - h;
    const double down = f(x);
    x[i] = xi;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_error(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  if (scale == 0.0) return 0.0;
  return std::sqrt(diff) / scale;
}

}  // namespace segfuse::ref
