#include "segfuse/overlap.hpp"

#include <omp.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>
#include <utility>

namespace segfuse::kernels {

namespace {

using Key = std::uint64_t;

Key make_key(Label g, Label p) { return (static_cast<Key>(g) << 32) | static_cast<Key>(p); }
Label key_gt(Key k) { return static_cast<Label>(k >> 32); }
Label key_pred(Key k) { return static_cast<Label>(k & 0xffffffffu); }

void require_same_shape(const InstanceMap& gt, const InstanceMap& pred) {
  if (gt.width() != pred.width() || gt.height() != pred.height())
    throw DimensionMismatch("label maps differ in size: " + std::to_string(gt.width()) + "x" +
                            std::to_string(gt.height()) + " vs " + std::to_string(pred.width()) + "x" +
                            std::to_string(pred.height()));
}

// Builds the table from (gt_label, pred_label) -> count entries sorted by key.
// Entries with one side 0 contribute only to the other side's area.
OverlapTable assemble(const std::vector<std::pair<Key, std::int64_t>>& sorted) {
  OverlapTable t;
  std::map<Label, std::int64_t> pred_area;
  for (const auto& [k, n] : sorted) {
    Label g = key_gt(k);
    Label p = key_pred(k);
    if (g != 0) {
      if (t.gt.empty() || t.gt.back().label != g) t.gt.push_back({g, 0});
      t.gt.back().area += n;
    }
    if (p != 0) pred_area[p] += n;
  }
  t.pred.reserve(pred_area.size());
  std::unordered_map<Label, std::uint32_t> pred_index;
  for (const auto& [p, n] : pred_area) {
    pred_index.emplace(p, static_cast<std::uint32_t>(t.pred.size()));
    t.pred.push_back({p, n});
  }

  t.gt_begin.assign(t.gt.size() + 1, 0);
  std::uint32_t gi = 0;
  for (const auto& [k, n] : sorted) {
    Label g = key_gt(k);
    Label p = key_pred(k);
    if (g == 0 || p == 0) continue;
    while (t.gt[gi].label != g) ++gi;
    t.pairs.push_back({gi, pred_index.at(p), n});
    ++t.gt_begin[gi + 1];
  }
  std::partial_sum(t.gt_begin.begin(), t.gt_begin.end(), t.gt_begin.begin());

  t.by_pred.resize(t.pairs.size());
  std::iota(t.by_pred.begin(), t.by_pred.end(), 0u);
  std::stable_sort(t.by_pred.begin(), t.by_pred.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return t.pairs[a].pred < t.pairs[b].pred; });
  t.pred_begin.assign(t.pred.size() + 1, 0);
  for (const auto& o : t.pairs) ++t.pred_begin[o.pred + 1];
  std::partial_sum(t.pred_begin.begin(), t.pred_begin.end(), t.pred_begin.begin());
  return t;
}

}  // namespace

OverlapTable overlap_table(const InstanceMap& gt, const InstanceMap& pred) {
  require_same_shape(gt, pred);
  const int height = gt.height();
  const int width = gt.width();
  const bool parallel = gt.size() >= kParallelPixelThreshold;

  std::vector<std::unordered_map<Key, std::int64_t>> partial;

#pragma omp parallel if (parallel)
  {
#pragma omp single
    partial.resize(static_cast<std::size_t>(omp_get_num_threads()));

    auto& local = partial[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
    for (int y = 0; y < height; ++y) {
      auto grow = gt.row(y);
      auto prow = pred.row(y);
      Key run_key = 0;
      std::int64_t run = 0;
      for (int x = 0; x < width; ++x) {
        Key k = make_key(grow[x], prow[x]);
        if (k == run_key) {
          ++run;
          continue;
        }
        if (run_key != 0) local[run_key] += run;
        run_key = k;
        run = 1;
      }
      if (run_key != 0) local[run_key] += run;
    }
  }

  std::vector<std::pair<Key, std::int64_t>> merged;
  for (const auto& m : partial) merged.insert(merged.end(), m.begin(), m.end());
  std::sort(merged.begin(), merged.end());
  std::vector<std::pair<Key, std::int64_t>> reduced;
  reduced.reserve(merged.size());
  for (const auto& e : merged) {
    if (!reduced.empty() && reduced.back().first == e.first)
      reduced.back().second += e.second;
    else
      reduced.push_back(e);
  }
  return assemble(reduced);
}

OverlapTable overlap_table_serial(const InstanceMap& gt, const InstanceMap& pred) {
  require_same_shape(gt, pred);
  std::map<Key, std::int64_t> counts;
  auto g = gt.labels();
  auto p = pred.labels();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] == 0 && p[i] == 0) continue;
    ++counts[make_key(g[i], p[i])];
  }
  return assemble({counts.begin(), counts.end()});
}

void set_kernel_threads(int n) {
  omp_set_num_threads(n > 0 ? n : omp_get_num_procs());
}

}  // namespace segfuse::kernels
