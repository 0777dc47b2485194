#include <doctest.h>

#include "segfuse/overlap.hpp"
#include "segfuse_ref/oracles.hpp"
#include "segfuse_ref/random_maps.hpp"

using namespace segfuse;
using segfuse::kernels::overlap_table;
using segfuse::kernels::overlap_table_serial;

TEST_CASE("overlap table of a small hand case") {
  // gt:   1 1 0      pred: 4 0 0
  //       0 2 2            4 4 9
  InstanceMap gt(3, 2, {1, 1, 0, 0, 2, 2});
  InstanceMap pred(3, 2, {4, 0, 0, 4, 4, 9});
  auto t = overlap_table(gt, pred);
  CHECK(t.gt == std::vector<kernels::LabelArea>{{1, 2}, {2, 2}});
  CHECK(t.pred == std::vector<kernels::LabelArea>{{4, 3}, {9, 1}});
  CHECK(t.pairs == std::vector<kernels::Overlap>{{0, 0, 1}, {1, 0, 1}, {1, 1, 1}});
  CHECK(t.gt_row(1).size() == 2);
  CHECK(t.pred_begin == std::vector<std::size_t>{0, 2, 3});
}

TEST_CASE("OpenMP kernel equals the serial reference") {
  ref::Rng rng(101);
  for (int trial = 0; trial < 30; ++trial) {
    const bool large = trial % 5 == 0;
    const int w = large ? 400 : 1 + trial;
    const int h = large ? 300 : 2 + trial / 2;
    auto gt = large ? ref::blob_field(rng, w, h, 150) : ref::random_map(rng, w, h, 10);
    auto pred = ref::perturb(rng, gt, 5);
    CHECK(overlap_table(gt, pred) == overlap_table_serial(gt, pred));
  }
}

TEST_CASE("kernel result does not depend on the thread count") {
  ref::Rng rng(5);
  auto gt = ref::blob_field(rng, 512, 512, 200);
  auto pred = ref::perturb(rng, gt, 20);
  const auto serial = overlap_table_serial(gt, pred);
  for (int threads : {1, 2, 3, 8}) {
    kernels::set_kernel_threads(threads);
    CHECK(overlap_table(gt, pred) == serial);
  }
  kernels::set_kernel_threads(0);
}

TEST_CASE("pair counts agree with a brute-force count") {
  ref::Rng rng(9);
  auto gt = ref::random_map(rng, 20, 16, 6);
  auto pred = ref::perturb(rng, gt, 2);
  auto t = overlap_table(gt, pred);
  for (const auto& o : t.pairs) {
    auto c = ref::count_pair(gt, t.gt[o.gt].label, pred, t.pred[o.pred].label);
    CHECK(c.both == o.count);
    CHECK(c.a == t.gt[o.gt].area);
    CHECK(c.b == t.pred[o.pred].area);
  }
}

TEST_CASE("labels beyond 16 bits are handled") {
  InstanceMap gt(2, 1, {70000, 4000000000u});
  InstanceMap pred(2, 1, {4000000000u, 4000000000u});
  auto t = overlap_table(gt, pred);
  REQUIRE(t.gt.size() == 2);
  CHECK(t.gt[1].label == 4000000000u);
  CHECK(t.pairs.size() == 2);
  CHECK(t == overlap_table_serial(gt, pred));
}

TEST_CASE("overlap kernels reject mismatched sizes") {
  CHECK_THROWS_AS(overlap_table(InstanceMap(3, 3), InstanceMap(3, 2)), DimensionMismatch);
  CHECK_THROWS_AS(overlap_table_serial(InstanceMap(3, 3), InstanceMap(2, 3)), DimensionMismatch);
}
