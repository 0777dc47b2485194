#include "segfuse_ref/fixtures.hpp"

namespace segfuse::ref::fixtures {

namespace {

void fill(InstanceMap& m, int x0, int y0, int w, int h, Label l) {
  for (int y = y0; y < y0 + h; ++y)
    for (int x = x0; x < x0 + w; ++x) m.set(x, y, l);
}

}  // namespace

MapPair aji_six_elevenths() {
  MapPair p{InstanceMap(8, 4), InstanceMap(8, 4)};
  fill(p.gt, 0, 0, 2, 2, 1);
  fill(p.gt, 4, 0, 2, 2, 2);
  fill(p.pred, 0, 0, 2, 2, 1);
  fill(p.pred, 5, 0, 2, 2, 2);
  fill(p.pred, 7, 3, 1, 1, 3);
  return p;
}

MapPair pq_point_four() {
  MapPair p{InstanceMap(10, 4), InstanceMap(10, 4)};
  fill(p.gt, 0, 0, 5, 1, 1);
  fill(p.gt, 8, 3, 1, 1, 2);
  fill(p.pred, 0, 0, 4, 1, 1);
  fill(p.pred, 0, 3, 2, 1, 2);
  return p;
}

MapPair f1_one_half() {
  MapPair p{InstanceMap(8, 4), InstanceMap(8, 4)};
  fill(p.gt, 0, 0, 2, 2, 1);
  fill(p.gt, 4, 0, 2, 2, 2);
  fill(p.pred, 0, 0, 2, 2, 1);
  fill(p.pred, 5, 0, 2, 2, 2);
  return p;
}

std::pair<BinaryMask, BinaryMask> quality_five_twelfths() {
  BinaryMask mp(8, 1), mt(8, 1);
  for (int x = 0; x < 4; ++x) mp.set(x, 0, true);
  for (int x = 2; x < 6; ++x) mt.set(x, 0, true);
  return {mp, mt};
}

std::pair<RealGrid, RealGrid> consistency_point_025() {
  return {RealGrid(2, 2, {0.2, 0.4, 0.6, 0.8}), RealGrid(2, 2, {0.0, 0.5, 0.5, 1.0})};
}

fusion::RoiPrediction constant_roi(BoundingBox box, double value) {
  return {box, RealGrid(kRoiMaskSize, kRoiMaskSize, value)};
}

}  // namespace segfuse::ref::fixtures
