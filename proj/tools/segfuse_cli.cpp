#include <iostream>

#include <CLI11.hpp>

#include "segfuse/cli.hpp"

int main(int argc, char** argv) {
  using segfuse::cli::CliConfig;
  using segfuse::cli::Subcommand;

  CLI::App app{"segfuse: instance segmentation metrics and panoptic mask fusion"};
  app.require_subcommand(1);
  CliConfig cfg;

  auto* evaluate = app.add_subcommand("evaluate", "Score predicted label maps against ground truth");
  evaluate->add_option("--gt", cfg.gt_dir, "Directory of ground-truth label PNGs")->required();
  evaluate->add_option("--pred", cfg.pred_dir, "Directory of predicted label PNGs")->required();
  evaluate->add_option("--out", cfg.out_path, "Report file")->required();
  std::string format = "csv";
  evaluate->add_option("--format", format, "Report format")->check(CLI::IsMember({"csv", "markdown"}));
  evaluate->add_flag("--with-sbd", cfg.with_sbd, "Also compute symmetric best Dice");
  evaluate->add_option("--jobs", cfg.jobs, "Images evaluated concurrently")->check(CLI::PositiveNumber);

  auto* fuse = app.add_subcommand("fuse", "Fuse per-instance predictions into label PNGs");
  fuse->add_option("--pred", cfg.pred_dir, "Directory of prediction JSON files")->required();
  fuse->add_option("--out", cfg.out_path, "Output directory")->required();
  fuse->add_option("--beta", cfg.beta, "Classification score threshold")->check(CLI::Range(0.0, 1.0));
  fuse->add_option("--bin-thresh", cfg.bin_thresh, "Mask binarization threshold")
      ->check(CLI::Range(0.0, 1.0));
  fuse->add_option("--width", cfg.width, "Canvas width for files without a canvas");
  fuse->add_option("--height", cfg.height, "Canvas height for files without a canvas");
  fuse->add_option("--jobs", cfg.jobs, "Files fused concurrently")->check(CLI::PositiveNumber);

  auto* selftest = app.add_subcommand("selftest", "Run built-in oracle and gradient checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : segfuse::cli::kUsage;
  }

  if (evaluate->parsed()) {
    cfg.subcommand = Subcommand::Evaluate;
    cfg.format = format == "markdown" ? segfuse::io::ReportFormat::Markdown : segfuse::io::ReportFormat::Csv;
  } else if (fuse->parsed()) {
    cfg.subcommand = Subcommand::Fuse;
    if (!(cfg.bin_thresh > 0.0 && cfg.bin_thresh < 1.0)) {
      std::cerr << "error: --bin-thresh must lie strictly between 0 and 1\n";
      return segfuse::cli::kUsage;
    }
    if (cfg.width.has_value() != cfg.height.has_value()) {
      std::cerr << "error: --width and --height must be given together\n";
      return segfuse::cli::kUsage;
    }
  } else if (selftest->parsed()) {
    cfg.subcommand = Subcommand::Selftest;
  }
  return segfuse::cli::run(cfg, std::cout, std::cerr);
}
