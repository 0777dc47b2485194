#include "segfuse/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace segfuse {

namespace {

void check_dims(int w, int h, const char* what) {
  if (w < 0 || h < 0) throw InvalidArgument(std::string(what) + ": negative dimension");
}

std::size_t cells(int w, int h) { return static_cast<std::size_t>(w) * static_cast<std::size_t>(h); }

}  // namespace

InstanceMap::InstanceMap(int width, int height) : width_(width), height_(height) {
  check_dims(width, height, "InstanceMap");
  labels_.assign(cells(width, height), 0);
}

InstanceMap::InstanceMap(int width, int height, std::vector<Label> labels)
    : width_(width), height_(height), labels_(std::move(labels)) {
  check_dims(width, height, "InstanceMap");
  if (labels_.size() != cells(width, height))
    throw InvalidArgument("InstanceMap: label count does not match width*height");
}

bool InstanceMap::empty_foreground() const {
  return std::all_of(labels_.begin(), labels_.end(), [](Label v) { return v == 0; });
}

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height) {
  check_dims(width, height, "BinaryMask");
  bits_.assign(cells(width, height), 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  check_dims(width, height, "BinaryMask");
  if (bits_.size() != cells(width, height))
    throw InvalidArgument("BinaryMask: bit count does not match width*height");
  for (auto& b : bits_) b = b ? 1 : 0;
}

BinaryMask BinaryMask::from_label(const InstanceMap& map, Label label) {
  BinaryMask m(map.width(), map.height());
  auto src = map.labels();
  for (std::size_t i = 0; i < src.size(); ++i) m.bits_[i] = src[i] == label ? 1 : 0;
  return m;
}

BinaryMask BinaryMask::foreground(const InstanceMap& map) {
  BinaryMask m(map.width(), map.height());
  auto src = map.labels();
  for (std::size_t i = 0; i < src.size(); ++i) m.bits_[i] = src[i] != 0 ? 1 : 0;
  return m;
}

std::int64_t BinaryMask::count() const {
  std::int64_t n = 0;
  for (auto b : bits_) n += b;
  return n;
}

RealGrid::RealGrid(int width, int height, double fill) : width_(width), height_(height) {
  check_dims(width, height, "RealGrid");
  values_.assign(cells(width, height), fill);
}

RealGrid::RealGrid(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width, height, "RealGrid");
  if (values_.size() != cells(width, height))
    throw InvalidArgument("RealGrid: value count does not match width*height");
}

FeatureMap::FeatureMap(int channels, int width, int height)
    : channels_(channels), width_(width), height_(height) {
  check_dims(width, height, "FeatureMap");
  if (channels < 0) throw InvalidArgument("FeatureMap: negative channel count");
  values_.assign(cells(width, height) * static_cast<std::size_t>(channels), 0.0);
}

FeatureMap::FeatureMap(int channels, int width, int height, std::vector<double> values)
    : channels_(channels), width_(width), height_(height), values_(std::move(values)) {
  check_dims(width, height, "FeatureMap");
  if (channels < 0) throw InvalidArgument("FeatureMap: negative channel count");
  if (values_.size() != cells(width, height) * static_cast<std::size_t>(channels))
    throw InvalidArgument("FeatureMap: value count does not match channels*width*height");
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidArgument("FeatureMap: non-finite value");
}

void validate(const InstancePrediction& p) {
  if (!p.box.valid()) throw InvalidArgument("prediction box must have w >= 1 and h >= 1");
  if (p.mask_logits.width() != kRoiMaskSize || p.mask_logits.height() != kRoiMaskSize)
    throw InvalidArgument("prediction mask_logits must be 28x28");
  if (!(p.s_cls >= 0.0 && p.s_cls <= 1.0)) throw InvalidArgument("s_cls outside [0,1]");
  if (p.s_qua && !(*p.s_qua >= 0.0 && *p.s_qua <= 1.0)) throw InvalidArgument("s_qua outside [0,1]");
}

std::vector<InstanceInfo> extract_instances(const InstanceMap& map) {
  struct Acc {
    std::int64_t n = 0;
    int x0, y0, x1, y1;
  };
  std::unordered_map<Label, Acc> acc;
  for (int y = 0; y < map.height(); ++y) {
    auto row = map.row(y);
    Label prev = 0;
    Acc* cur = nullptr;
    for (int x = 0; x < map.width(); ++x) {
      Label v = row[x];
      if (v == 0) continue;
      if (cur == nullptr || v != prev) {
        auto [it, fresh] = acc.try_emplace(v, Acc{0, x, y, x, y});
        cur = &it->second;
        prev = v;
      }
      ++cur->n;
      cur->x0 = std::min(cur->x0, x);
      cur->x1 = std::max(cur->x1, x);
      cur->y0 = std::min(cur->y0, y);
      cur->y1 = std::max(cur->y1, y);
    }
  }
  std::vector<InstanceInfo> out;
  out.reserve(acc.size());
  for (const auto& [label, a] : acc)
    out.push_back({label, a.n, BoundingBox{a.x0, a.y0, a.x1 - a.x0 + 1, a.y1 - a.y0 + 1}});
  std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) { return l.label < r.label; });
  return out;
}

PairCounts pair_counts(const BinaryMask& a, const BinaryMask& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw DimensionMismatch("mask dimensions differ");
  PairCounts c;
  auto ab = a.bits();
  auto bb = b.bits();
  for (std::size_t i = 0; i < ab.size(); ++i) {
    c.a += ab[i];
    c.b += bb[i];
    c.intersection += ab[i] & bb[i];
  }
  return c;
}

double iou(const BinaryMask& a, const BinaryMask& b) {
  auto c = pair_counts(a, b);
  if (c.union_() == 0) return 0.0;
  return static_cast<double>(c.intersection) / static_cast<double>(c.union_());
}

double dice_pair(const BinaryMask& a, const BinaryMask& b) {
  auto c = pair_counts(a, b);
  if (c.a + c.b == 0) return 0.0;
  return 2.0 * static_cast<double>(c.intersection) / static_cast<double>(c.a + c.b);
}

std::string describe(const BoundingBox& b) {
  return "box(" + std::to_string(b.x) + "," + std::to_string(b.y) + "," + std::to_string(b.w) + "," +
         std::to_string(b.h) + ")";
}

}  // namespace segfuse
