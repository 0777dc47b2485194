#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "segfuse/core_types.hpp"

namespace segfuse::kernels {

struct LabelArea {
  Label label = 0;
  std::int64_t area = 0;

  friend bool operator==(const LabelArea&, const LabelArea&) = default;
};

/// Nonzero intersection between gt instance `gt` and prediction `pred`
/// (dense indices into OverlapTable::gt / OverlapTable::pred).
struct Overlap {
  std::uint32_t gt = 0;
  std::uint32_t pred = 0;
  std::int64_t count = 0;

  friend bool operator==(const Overlap&, const Overlap&) = default;
};

/// Sparse contingency table between two label maps of equal size.
///
/// `gt` and `pred` list the instances of each map by ascending label. `pairs`
/// holds every nonzero (gt, pred) intersection sorted by (gt, pred); rows are
/// addressed through `gt_row`. `by_pred` indexes the same pairs sorted by
/// (pred, gt) for column access.
struct OverlapTable {
  std::vector<LabelArea> gt;
  std::vector<LabelArea> pred;
  std::vector<Overlap> pairs;
  std::vector<std::size_t> gt_begin;    // size gt.size() + 1
  std::vector<std::uint32_t> by_pred;   // indices into pairs
  std::vector<std::size_t> pred_begin;  // size pred.size() + 1

  std::span<const Overlap> gt_row(std::size_t g) const {
    return std::span<const Overlap>(pairs).subspan(gt_begin[g], gt_begin[g + 1] - gt_begin[g]);
  }

  friend bool operator==(const OverlapTable&, const OverlapTable&) = default;
};

/// OpenMP kernel. Rows of the maps are split across threads; each thread
/// accumulates run-length-compressed pair counts which are merged at the end.
/// All counts are integers, so the result is independent of thread count.
OverlapTable overlap_table(const InstanceMap& gt, const InstanceMap& pred);

/// Single-threaded per-pixel reference for the kernel above.
OverlapTable overlap_table_serial(const InstanceMap& gt, const InstanceMap& pred);

/// Caps the OpenMP team size used by kernels started from the calling thread.
/// n <= 0 restores the runtime default.
void set_kernel_threads(int n);

/// Maps below this many pixels never fork a team.
inline constexpr std::size_t kParallelPixelThreshold = 1 << 16;

}  // namespace segfuse::kernels
