#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "segfuse/core_types.hpp"
#include "segfuse/metrics.hpp"

namespace segfuse::io {

class IoError : public Error {
 public:
  enum class Kind {
    NotFound,        ///< input path does not exist
    UnsupportedFormat,  ///< not a single-channel 8/16-bit grayscale PNG
    Corrupt,         ///< truncated or undecodable stream
    Unwritable,      ///< output could not be created or written
    LabelOverflow,   ///< label does not fit the 16-bit format
    Schema,          ///< prediction JSON violates the schema
  };

  IoError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Reads a single-channel 8- or 16-bit grayscale PNG; pixel value = label.
InstanceMap read_label_png(const std::filesystem::path& path);

/// Writes a 16-bit grayscale PNG. Throws LabelOverflow for labels > 65535.
void write_label_png(const InstanceMap& map, const std::filesystem::path& path);

/// Serialized InstancePrediction.
using PredictionRecord = InstancePrediction;

struct PredictionFile {
  std::optional<int> canvas_width;
  std::optional<int> canvas_height;
  std::vector<PredictionRecord> instances;
};

/// Schema:
///   {"canvas": {"width": W, "height": H},
///    "instances": [{"id": 1, "box": {"x":..,"y":..,"w":..,"h":..},
///                   "s_cls": 0.9, "s_qua": 0.8, "mask_logits": [784 numbers]}]}
/// "s_qua" is optional. "canvas" may be omitted. Errors name the record index.
PredictionFile read_predictions_json(const std::filesystem::path& path);
PredictionFile parse_predictions_json(const std::string& text);

void write_predictions_json(const PredictionFile& file, const std::filesystem::path& path);
std::string dump_predictions_json(const PredictionFile& file);

enum class ReportFormat { Csv, Markdown };

struct ImageReport {
  std::string image_id;
  ImageMetrics metrics;
};

/// Table with columns image_id,aji,dice,f1,pq,dq,sq,sbd, one row per image and
/// trailing mean/std rows; fixed 6-decimal floats. A footer line records how
/// many images were skipped for SBD when `sbd_skipped > 0`.
std::string format_report(std::span<const ImageReport> images, const AggregateMetrics& agg, ReportFormat format,
                          int sbd_skipped = 0);

void write_report(std::span<const ImageReport> images, const AggregateMetrics& agg,
                  const std::filesystem::path& path, ReportFormat format, int sbd_skipped = 0);

}  // namespace segfuse::io
