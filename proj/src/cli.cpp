#include "segfuse/cli.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <map>
#include <ostream>
#include <thread>
#include <variant>

#include "segfuse/inference.hpp"
#include "segfuse/metrics.hpp"
#include "segfuse/overlap.hpp"
#include "segfuse_ref/checks.hpp"

namespace segfuse::cli {

namespace fs = std::filesystem;

namespace {

/// Stem -> path for regular files in `dir` with extension `ext`.
std::map<std::string, fs::path> list_by_stem(const fs::path& dir, const std::string& ext) {
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ext) continue;
    out.emplace(entry.path().stem().string(), entry.path());
  }
  return out;
}

/// Runs `work(i)` for i in [0, n) on `jobs` threads. Kernels started by a
/// worker run single-threaded when more than one worker exists.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& work) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      kernels::set_kernel_threads(1);
      for (std::size_t i = next++; i < n; i = next++) work(i);
    });
}

int exit_code_for(const std::exception& e) {
  if (auto* io = dynamic_cast<const io::IoError*>(&e))
    return io->kind() == io::IoError::Kind::Schema ? kSchema : kIo;
  return kMetric;
}

bool directory_exists(const fs::path& p) {
  std::error_code ec;
  return fs::is_directory(p, ec);
}

}  // namespace

int run_evaluate(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!directory_exists(cfg.gt_dir) || !directory_exists(cfg.pred_dir)) {
    err << "error: --gt and --pred must be existing directories\n";
    return kIo;
  }
  const auto gt = list_by_stem(cfg.gt_dir, ".png");
  const auto pred = list_by_stem(cfg.pred_dir, ".png");

  std::vector<std::string> unpaired;
  for (const auto& [stem, _] : gt)
    if (!pred.count(stem)) unpaired.push_back(stem + " (missing prediction)");
  for (const auto& [stem, _] : pred)
    if (!gt.count(stem)) unpaired.push_back(stem + " (missing ground truth)");
  if (gt.empty() && pred.empty()) {
    err << "error: no image pairs found\n";
    return kPairing;
  }
  if (!unpaired.empty()) {
    err << "error: unpaired image stems:\n";
    for (const auto& s : unpaired) err << "  " << s << '\n';
    return kPairing;
  }

  std::vector<std::string> stems;
  for (const auto& [stem, _] : gt) stems.push_back(stem);

  struct Failure {
    int code;
    std::string message;
  };
  std::vector<std::variant<std::monostate, io::ImageReport, Failure>> results(stems.size());
  std::vector<char> skipped(stems.size(), 0);

  parallel_for(stems.size(), cfg.jobs, [&](std::size_t i) {
    const std::string& stem = stems[i];
    try {
      const InstanceMap g = io::read_label_png(gt.at(stem));
      const InstanceMap p = io::read_label_png(pred.at(stem));
      io::ImageReport r{stem, evaluate_image(g, p, cfg.with_sbd)};
      if (cfg.with_sbd && !r.metrics.sbd) skipped[i] = 1;
      results[i] = std::move(r);
    } catch (const std::exception& e) {
      results[i] = Failure{exit_code_for(e), stem + ": " + e.what()};
    }
  });

  std::vector<io::ImageReport> reports;
  for (auto& r : results) {
    if (auto* f = std::get_if<Failure>(&r)) {
      err << "error: " << f->message << '\n';
      return f->code;
    }
    reports.push_back(std::move(std::get<io::ImageReport>(r)));
  }

  const int sbd_skipped = static_cast<int>(std::count(skipped.begin(), skipped.end(), 1));
  try {
    std::vector<ImageMetrics> metrics;
    for (const auto& r : reports) metrics.push_back(r.metrics);
    io::write_report(reports, aggregate(metrics), cfg.out_path, cfg.format, sbd_skipped);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  }
  out << "evaluated " << reports.size() << " image pair(s) -> " << cfg.out_path.string() << '\n';
  return kOk;
}

int run_fuse(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!directory_exists(cfg.pred_dir)) {
    err << "error: --pred must be an existing directory\n";
    return kIo;
  }
  const auto inputs = list_by_stem(cfg.pred_dir, ".json");
  if (inputs.empty()) {
    err << "error: no prediction files found in " << cfg.pred_dir.string() << '\n';
    return kPairing;
  }
  std::error_code ec;
  fs::create_directories(cfg.out_path, ec);
  if (!directory_exists(cfg.out_path)) {
    err << "error: cannot create output directory " << cfg.out_path.string() << '\n';
    return kIo;
  }
  const inference::InferenceConfig icfg{cfg.beta, cfg.bin_thresh};

  std::vector<std::pair<std::string, fs::path>> files(inputs.begin(), inputs.end());
  std::vector<std::optional<std::pair<int, std::string>>> failures(files.size());

  parallel_for(files.size(), cfg.jobs, [&](std::size_t i) {
    const auto& [stem, path] = files[i];
    try {
      const io::PredictionFile pf = io::read_predictions_json(path);
      int w = pf.canvas_width.value_or(cfg.width.value_or(0));
      int h = pf.canvas_height.value_or(cfg.height.value_or(0));
      if ((cfg.width && pf.canvas_width && *cfg.width != *pf.canvas_width) ||
          (cfg.height && pf.canvas_height && *cfg.height != *pf.canvas_height))
        throw io::IoError(io::IoError::Kind::Schema, path.string() + ": canvas disagrees with --width/--height");
      if (w < 1 || h < 1)
        throw io::IoError(io::IoError::Kind::Schema,
                          path.string() + ": no canvas in file; pass --width and --height");
      InstanceMap fused;
      try {
        fused = inference::run_inference_fusion(pf.instances, w, h, icfg);
      } catch (const InvalidArgument& e) {
        throw io::IoError(io::IoError::Kind::Schema, path.string() + ": " + e.what());
      }
      io::write_label_png(fused, cfg.out_path / (stem + ".png"));
    } catch (const std::exception& e) {
      failures[i] = std::make_pair(exit_code_for(e), std::string(e.what()));
    }
  });

  for (const auto& f : failures)
    if (f) {
      err << "error: " << f->second << '\n';
      return f->first;
    }
  out << "fused " << files.size() << " prediction file(s) -> " << cfg.out_path.string() << '\n';
  return kOk;
}

int run_selftest(const CliConfig&, std::ostream& out, std::ostream&) {
  const auto checks = ref::selftest_suite();
  ref::print_checks(out, checks);
  const bool ok = std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  out << (ok ? "all checks passed\n" : "some checks FAILED\n");
  return ok ? kOk : kCheckFailed;
}

int run(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  switch (cfg.subcommand) {
    case Subcommand::Evaluate:
      return run_evaluate(cfg, out, err);
    case Subcommand::Fuse:
      return run_fuse(cfg, out, err);
    case Subcommand::Selftest:
      return run_selftest(cfg, out, err);
  }
  return kUsage;
}

}  // namespace segfuse::cli
