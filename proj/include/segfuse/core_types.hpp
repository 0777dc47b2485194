#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace segfuse {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands whose shapes must agree do not.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A value violates the documented precondition of an operation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

using Label = std::uint32_t;

/// Largest label the canonical 16-bit PNG format can hold.
inline constexpr Label kMaxPngLabel = 65535;

/// Axis-aligned box. (x, y) is the min-column / min-row corner; the box covers
/// the half-open ranges [x, x+w) x [y, y+h).
struct BoundingBox {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

  bool valid() const { return w >= 1 && h >= 1; }
  bool fits_in(int canvas_w, int canvas_h) const {
    return valid() && x >= 0 && y >= 0 && x + w <= canvas_w && y + h <= canvas_h;
  }
};

/// H x W map of instance labels, row-major. 0 is background.
class InstanceMap {
 public:
  InstanceMap() = default;
  InstanceMap(int width, int height);
  InstanceMap(int width, int height, std::vector<Label> labels);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return labels_.size(); }
  bool empty_foreground() const;

  Label at(int x, int y) const { return labels_[index(x, y)]; }
  void set(int x, int y, Label v) { labels_[index(x, y)] = v; }

  std::span<const Label> labels() const { return labels_; }
  std::span<Label> labels() { return labels_; }
  std::span<const Label> row(int y) const {
    return std::span<const Label>(labels_).subspan(static_cast<std::size_t>(y) * width_, width_);
  }

  friend bool operator==(const InstanceMap&, const InstanceMap&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Label> labels_;
};

/// H x W boolean mask, row-major, one byte per pixel.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height);
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

  /// Pixels of `map` carrying `label`.
  static BinaryMask from_label(const InstanceMap& map, Label label);
  /// Pixels of `map` with any nonzero label.
  static BinaryMask foreground(const InstanceMap& map);

  int width() const { return width_; }
  int height() const { return height_; }
  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v) { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }
  std::span<const std::uint8_t> bits() const { return bits_; }

  std::int64_t count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Row-major grid of doubles.
class RealGrid {
 public:
  RealGrid() = default;
  RealGrid(int width, int height, double fill = 0.0);
  RealGrid(int width, int height, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }

  double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  double& at(int x, int y) { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool same_shape(const RealGrid& o) const { return width_ == o.width_ && height_ == o.height_; }

  friend bool operator==(const RealGrid&, const RealGrid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

/// C x H x W feature tensor, channel-major. All values finite.
class FeatureMap {
 public:
  FeatureMap() = default;
  FeatureMap(int channels, int width, int height);
  /// Throws InvalidArgument on size mismatch or non-finite values.
  FeatureMap(int channels, int width, int height, std::vector<double> values);

  int channels() const { return channels_; }
  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t plane_size() const { return static_cast<std::size_t>(width_) * height_; }

  double at(int c, int x, int y) const { return values_[offset(c, x, y)]; }
  double& at(int c, int x, int y) { return values_[offset(c, x, y)]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::span<const double> plane(int c) const {
    return std::span<const double>(values_).subspan(static_cast<std::size_t>(c) * plane_size(), plane_size());
  }

  bool same_shape(const FeatureMap& o) const {
    return channels_ == o.channels_ && width_ == o.width_ && height_ == o.height_;
  }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::size_t offset(int c, int x, int y) const {
    return (static_cast<std::size_t>(c) * height_ + static_cast<std::size_t>(y)) * width_ + static_cast<std::size_t>(x);
  }

  int channels_ = 0;
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

inline constexpr int kRoiMaskSize = 28;

/// One detected object as emitted by the instance branch.
struct InstancePrediction {
  BoundingBox box;
  RealGrid mask_logits{kRoiMaskSize, kRoiMaskSize};  ///< foreground channel
  double s_cls = 0.0;
  std::optional<double> s_qua;
  Label id = 0;
};

/// Throws InvalidArgument when `p` breaks the InstancePrediction invariants.
void validate(const InstancePrediction& p);

struct InstanceInfo {
  Label label = 0;
  std::int64_t pixel_count = 0;
  BoundingBox bbox;

  friend bool operator==(const InstanceInfo&, const InstanceInfo&) = default;
};

/// One entry per distinct nonzero label, ascending, with tight bounds.
std::vector<InstanceInfo> extract_instances(const InstanceMap& map);

/// |a ∩ b| / |a ∪ b|; 0 when both are empty.
double iou(const BinaryMask& a, const BinaryMask& b);
/// 2|a ∩ b| / (|a| + |b|); 0 when both are empty.
double dice_pair(const BinaryMask& a, const BinaryMask& b);

/// Integer counts behind iou/dice_pair.
struct PairCounts {
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::int64_t intersection = 0;
  std::int64_t union_() const { return a + b - intersection; }
};
PairCounts pair_counts(const BinaryMask& a, const BinaryMask& b);

std::string describe(const BoundingBox& b);

}  // namespace segfuse
