#pragma once

#include "segfuse/core_types.hpp"

namespace segfuse {

/// Bilinear resampling with half-pixel centers: the source coordinate of
/// destination index d is (d + 0.5) * src/dst - 0.5, clamped to the edge.
/// Throws InvalidArgument on an empty source or a zero target dimension.
RealGrid resize_bilinear(const RealGrid& grid, int target_w, int target_h);

/// Transpose of resize_bilinear: scatters a target-sized gradient back onto a
/// source_w x source_h grid, so that <resize(x), g> == <x, adjoint(g)>.
RealGrid resize_bilinear_adjoint(const RealGrid& target_grad, int source_w, int source_h);

}  // namespace segfuse
