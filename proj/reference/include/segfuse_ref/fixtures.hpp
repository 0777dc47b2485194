#pragma once

#include "segfuse/core_types.hpp"
#include "segfuse/fusion.hpp"

// Small hand-built inputs with known metric values.
namespace segfuse::ref::fixtures {

struct MapPair {
  InstanceMap gt;
  InstanceMap pred;
};

/// Two 2x2 GT squares; prediction copies the first, overlaps the second in
/// two pixels and adds a one-pixel blob. AJI = 6/11.
MapPair aji_six_elevenths();

/// One pair at IoU 0.8 plus one FP and one FN. PQ = 0.4, DQ = 0.5, SQ = 0.8.
MapPair pq_point_four();

/// Two GT squares; one exact prediction, one covering exactly half of the
/// second square. F1 = 0.5.
MapPair f1_one_half();

/// Two 4-pixel masks sharing 2 pixels. Quality target = 5/12.
std::pair<BinaryMask, BinaryMask> quality_five_twelfths();

/// 2x2 probability maps with consistency loss 0.025.
std::pair<RealGrid, RealGrid> consistency_point_025();

/// ROI whose logits are all `value`.
fusion::RoiPrediction constant_roi(BoundingBox box, double value);

}  // namespace segfuse::ref::fixtures
