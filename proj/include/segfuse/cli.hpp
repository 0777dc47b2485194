#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "segfuse/io.hpp"

namespace segfuse::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,    ///< selftest found a failing check
  kPairing = 2,        ///< no inputs, or stems without a partner
  kIo = 3,             ///< unreadable input or unwritable output
  kSchema = 4,         ///< prediction JSON violates the schema
  kMetric = 5,         ///< a metric rejected its inputs (e.g. size mismatch)
  kUsage = 64,         ///< bad command line
};

enum class Subcommand { Evaluate, Fuse, Selftest };

struct CliConfig {
  Subcommand subcommand = Subcommand::Selftest;
  std::filesystem::path gt_dir;
  std::filesystem::path pred_dir;
  std::filesystem::path out_path;
  double beta = 0.5;
  double bin_thresh = 0.5;
  bool with_sbd = false;
  int jobs = 1;
  io::ReportFormat format = io::ReportFormat::Csv;
  std::optional<int> width;
  std::optional<int> height;
};

/// Metrics for every stem present in both gt_dir and pred_dir (*.png),
/// written to out_path in image_id order.
int run_evaluate(const CliConfig& cfg, std::ostream& out, std::ostream& err);

/// One fused 16-bit label PNG per prediction JSON in pred_dir, written to the
/// out_path directory under the same stem.
int run_fuse(const CliConfig& cfg, std::ostream& out, std::ostream& err);

/// Runs the built-in oracle and gradient checks and prints a table.
int run_selftest(const CliConfig& cfg, std::ostream& out, std::ostream& err);

int run(const CliConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace segfuse::cli
