#include "segfuse_ref/checks.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "segfuse/fusion.hpp"
#include "segfuse/metrics.hpp"
#include "segfuse/overlap.hpp"
#include "segfuse_ref/fixtures.hpp"
#include "segfuse_ref/oracles.hpp"
#include "segfuse_ref/random_maps.hpp"

namespace segfuse::ref {

namespace {

fixtures::MapPair random_pair(Rng& rng) {
  const int w = std::uniform_int_distribution<int>(4, 32)(rng);
  const int h = std::uniform_int_distribution<int>(4, 32)(rng);
  InstanceMap gt = random_map(rng, w, h, 6);
  InstanceMap pred = std::bernoulli_distribution(0.7)(rng) ? perturb(rng, gt, 2) : random_map(rng, w, h, 6);
  // Perturbation can exceed the instance budget through spurious blobs.
  while (labels_of(pred).size() > 6) pred = erase_label(pred, labels_of(pred).back());
  return {std::move(gt), std::move(pred)};
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

CheckResult finish(std::string name, double measured, double tolerance, std::string detail = {}) {
  return {std::move(name), measured, tolerance, measured <= tolerance, std::move(detail)};
}

}  // namespace

CheckResult check_aji_oracle(int trials, std::uint64_t seed) {
  Rng rng(seed);
  int mismatches = 0;
  for (int t = 0; t < trials; ++t) {
    auto [gt, pred] = random_pair(rng);
    if (segfuse::aji(gt, pred) != ref::aji(gt, pred)) ++mismatches;
  }
  return finish("aji_vs_bruteforce", mismatches, 0, std::to_string(trials) + " random pairs <= 32x32");
}

CheckResult check_pq_oracle(int trials, std::uint64_t seed) {
  Rng rng(seed);
  int bad = 0;
  for (int t = 0; t < trials; ++t) {
    auto [gt, pred] = random_pair(rng);
    const PqOracle o = ref::panoptic_quality(gt, pred);
    bad += o.uniqueness_violations;
    PqResult r;
    try {
      r = segfuse::panoptic_quality(gt, pred);
    } catch (const std::logic_error&) {
      ++bad;
      continue;
    }
    if (r.pq != o.pq || r.dq != o.dq || r.sq != o.sq || r.counts.tp != o.tp || r.counts.fp != o.fp ||
        r.counts.fn_ != o.fn_)
      ++bad;
  }
  return finish("pq_vs_bruteforce", bad, 0, std::to_string(trials) + " random pairs <= 32x32");
}

CheckResult check_overlap_kernel(int trials, std::uint64_t seed) {
  Rng rng(seed);
  int mismatches = 0;
  for (int t = 0; t < trials; ++t) {
    // Alternate small maps with ones large enough to fork a team.
    const bool large = t % 4 == 3;
    const int w = large ? 300 : std::uniform_int_distribution<int>(1, 40)(rng);
    const int h = large ? 260 : std::uniform_int_distribution<int>(1, 40)(rng);
    InstanceMap gt = large ? blob_field(rng, w, h, 120) : random_map(rng, w, h, 8);
    InstanceMap pred = perturb(rng, gt, 4);
    if (!(kernels::overlap_table(gt, pred) == kernels::overlap_table_serial(gt, pred))) ++mismatches;
  }
  return finish("overlap_kernel_vs_serial", mismatches, 0, std::to_string(trials) + " random pairs");
}

CheckResult check_consistency_grad(int trials, std::uint64_t seed, double tolerance) {
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> sem(16), ins(16);
    // Keep p_ins away from the [0,1] boundary so both FD probes stay valid.
    for (auto& v : sem) v = uniform01(rng);
    for (auto& v : ins) v = 0.01 + 0.98 * uniform01(rng);
    const RealGrid p_sem(4, 4, sem);
    const RealGrid analytic = fusion::consistency_loss_grad(p_sem, RealGrid(4, 4, ins));
    auto loss = [&](std::span<const double> x) {
      return fusion::consistency_loss(p_sem, RealGrid(4, 4, std::vector<double>(x.begin(), x.end())));
    };
    const auto numeric = central_difference(loss, ins, 1e-5);
    worst = std::max(worst, relative_error(analytic.values(), numeric));
  }
  return finish("consistency_grad_vs_fd", worst, tolerance, std::to_string(trials) + " random 4x4 trials, h=1e-5");
}

CheckResult check_raff_grad(int trials, std::uint64_t seed, double tolerance) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    const int channels = 3;
    std::vector<double> f0v(channels * 64), upv(channels * 64);
    for (auto& v : f0v) v = normal(rng);
    for (auto& v : upv) v = normal(rng);
    const FeatureMap f0(channels, 8, 8, f0v);
    const FeatureMap upstream(channels, 8, 8, upv);
    const int bw = std::uniform_int_distribution<int>(1, 8)(rng);
    const int bh = std::uniform_int_distribution<int>(1, 8)(rng);
    const BoundingBox box{std::uniform_int_distribution<int>(0, 8 - bw)(rng),
                          std::uniform_int_distribution<int>(0, 8 - bh)(rng), bw, bh};
    std::vector<double> logits(kRoiMaskSize * kRoiMaskSize);
    for (auto& v : logits) v = 2.0 * normal(rng);
    const fusion::RoiPrediction roi{box, RealGrid(kRoiMaskSize, kRoiMaskSize, logits)};

    const RealGrid analytic = fusion::raff_attention_grad(f0, roi, upstream);
    auto objective = [&](std::span<const double> x) {
      const fusion::RoiPrediction probe{box, RealGrid(kRoiMaskSize, kRoiMaskSize, std::vector<double>(x.begin(), x.end()))};
      const FeatureMap out = fusion::raff(f0, std::span(&probe, 1));
      double s = 0.0;
      for (std::size_t i = 0; i < out.values().size(); ++i) s += upstream.values()[i] * out.values()[i];
      return s;
    };
    const auto numeric = central_difference(objective, logits, 1e-5);
    worst = std::max(worst, relative_error(analytic.values(), numeric));
  }
  return finish("raff_grad_vs_fd", worst, tolerance, std::to_string(trials) + " random 8x8 trials, h=1e-5");
}

CheckResult check_fixtures() {
  double worst = 0.0;
  auto track = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  {
    auto p = fixtures::aji_six_elevenths();
    track(segfuse::aji(p.gt, p.pred), 6.0 / 11.0);
  }
  {
    auto p = fixtures::pq_point_four();
    auto r = segfuse::panoptic_quality(p.gt, p.pred);
    track(r.pq, 0.4);
    track(r.dq, 0.5);
    track(r.sq, 0.8);
  }
  {
    auto p = fixtures::f1_one_half();
    track(segfuse::object_f1(p.gt, p.pred).f1, 0.5);
  }
  {
    auto [mp, mt] = fixtures::quality_five_twelfths();
    track(fusion::mask_quality_target(mp, mt), 5.0 / 12.0);
  }
  {
    auto [sem, ins] = fixtures::consistency_point_025();
    track(fusion::consistency_loss(sem, ins), 0.025);
  }
  return finish("hand_fixtures", worst, 1e-12, "aji 6/11, pq 0.4, f1 0.5, s_qua 5/12, loss 0.025");
}

CheckResult check_raff_invariants() {
  Rng rng(7);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(3 * 16 * 16);
  for (auto& x : v) x = normal(rng);
  const FeatureMap f0(3, 16, 16, v);
  double worst = 0.0;
  bool local = true;

  const BoundingBox a{2, 3, 8, 6}, b{6, 5, 7, 9};
  auto inside = [](const BoundingBox& bx, int x, int y) {
    return x >= bx.x && x < bx.x + bx.w && y >= bx.y && y < bx.y + bx.h;
  };

  const auto quiet = fixtures::constant_roi(a, -50.0);
  const FeatureMap same = fusion::raff(f0, std::span(&quiet, 1));
  for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::abs(same.values()[i] - v[i]));

  const fusion::RoiPrediction rois[] = {fixtures::constant_roi(a, 0.0), fixtures::constant_roi(b, 0.0)};
  const FeatureMap one = fusion::raff(f0, std::span(rois, 1));
  const FeatureMap two = fusion::raff(f0, std::span(rois, 2));
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < 16; ++y)
      for (int x = 0; x < 16; ++x) {
        const double in = f0.at(c, x, y);
        const double want_one = inside(a, x, y) ? 1.5 * in : in;
        worst = std::max(worst, std::abs(one.at(c, x, y) - want_one));
        const int hits = inside(a, x, y) + inside(b, x, y);
        const double want_two = hits == 2 ? 2.25 * in : hits == 1 ? 1.5 * in : in;
        worst = std::max(worst, std::abs(two.at(c, x, y) - want_two));
        if (hits == 0 && two.at(c, x, y) != in) local = false;
      }
  if (!local) worst = std::numeric_limits<double>::infinity();
  return finish("raff_invariants", worst, 1e-12, "identity at -50, x1.5, x2.25 overlap, bit-exact locality");
}

std::vector<CheckResult> selftest_suite() {
  return {
      check_fixtures(),
      check_aji_oracle(100, 1),
      check_pq_oracle(100, 2),
      check_overlap_kernel(40, 3),
      check_consistency_grad(20, 4, 1e-6),
      check_raff_grad(20, 5, 1e-5),
      check_raff_invariants(),
  };
}

void print_checks(std::ostream& out, const std::vector<CheckResult>& checks) {
  char line[256];
  for (const auto& c : checks) {
    std::snprintf(line, sizeof line, "%-4s %-28s measured=%-12.3g tolerance=%-10.3g", c.passed ? "PASS" : "FAIL",
                  c.name.c_str(), c.measured, c.tolerance);
    out << line;
    if (!c.detail.empty()) out << "  (" << c.detail << ")";
    out << '\n';
  }
}

}  // namespace segfuse::ref
