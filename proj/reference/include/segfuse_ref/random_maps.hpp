#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "segfuse/core_types.hpp"

namespace segfuse::ref {

using Rng = std::mt19937_64;

/// Up to `max_instances` random rectangles and ellipses with scattered,
/// non-contiguous labels. Later shapes overwrite earlier ones.
InstanceMap random_map(Rng& rng, int w, int h, int max_instances);

/// A plausible prediction for `gt`: instances shifted, grown or shrunk, some
/// dropped or merged, spurious blobs added, labels reassigned.
InstanceMap perturb(Rng& rng, const InstanceMap& gt, int max_extra);

/// Nucleus-like test image: `count` non-overlapping-ish ellipses on a w x h
/// canvas.
InstanceMap blob_field(Rng& rng, int w, int h, int count);

/// Applies a random bijection to the nonzero labels of `m`.
InstanceMap relabel(Rng& rng, const InstanceMap& m);

/// Removes every pixel carrying `label`.
InstanceMap erase_label(const InstanceMap& m, Label label);

}  // namespace segfuse::ref
