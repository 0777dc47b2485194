#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

// Self-contained verification routines shared by `segfuse selftest` and the
// acceptance suite. Each compares the library against an oracle.
namespace segfuse::ref {

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

/// Library AJI vs brute force on random pairs; measured = mismatch count.
CheckResult check_aji_oracle(int trials, std::uint64_t seed);
/// PQ/DQ/SQ vs brute force; measured = mismatches + uniqueness violations.
CheckResult check_pq_oracle(int trials, std::uint64_t seed);
/// OpenMP overlap kernel vs its serial reference; measured = mismatches.
CheckResult check_overlap_kernel(int trials, std::uint64_t seed);
/// Analytic consistency-loss gradient vs central differences; measured =
/// worst relative error.
CheckResult check_consistency_grad(int trials, std::uint64_t seed, double tolerance);
/// Analytic single-ROI RAFF gradient vs central differences.
CheckResult check_raff_grad(int trials, std::uint64_t seed, double tolerance);
/// Hand fixtures (AJI 6/11, PQ 0.4, F1 0.5, s_qua 5/12, loss 0.025);
/// measured = worst absolute error.
CheckResult check_fixtures();
/// RAFF residual identity, x1.5 and x2.25 scaling, locality; measured =
/// worst absolute deviation.
CheckResult check_raff_invariants();

std::vector<CheckResult> selftest_suite();

/// One line per check: status, name, measured value, tolerance.
void print_checks(std::ostream& out, const std::vector<CheckResult>& checks);

}  // namespace segfuse::ref
