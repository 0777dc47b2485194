#include "segfuse/resize.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace segfuse {

namespace {

struct Tap {
  int i0;
  int i1;
  double w1;  // weight of i1; i0 gets 1 - w1
};

std::vector<Tap> axis_taps(int src, int dst) {
  std::vector<Tap> taps(static_cast<std::size_t>(dst));
  const double scale = static_cast<double>(src) / static_cast<double>(dst);
  for (int d = 0; d < dst; ++d) {
    double s = (d + 0.5) * scale - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(src - 1));
    int i0 = static_cast<int>(std::floor(s));
    int i1 = std::min(i0 + 1, src - 1);
    taps[static_cast<std::size_t>(d)] = {i0, i1, s - i0};
  }
  return taps;
}

void check_dims(int src_w, int src_h, int dst_w, int dst_h) {
  if (src_w < 1 || src_h < 1) throw InvalidArgument("resize_bilinear: empty source grid");
  if (dst_w < 1 || dst_h < 1) throw InvalidArgument("resize_bilinear: target dimensions must be >= 1");
}

}  // namespace

RealGrid resize_bilinear(const RealGrid& grid, int target_w, int target_h) {
  check_dims(grid.width(), grid.height(), target_w, target_h);
  const auto tx = axis_taps(grid.width(), target_w);
  const auto ty = axis_taps(grid.height(), target_h);
  RealGrid out(target_w, target_h);
  for (int y = 0; y < target_h; ++y) {
    const Tap& a = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < target_w; ++x) {
      const Tap& b = tx[static_cast<std::size_t>(x)];
      const double top = grid.at(b.i0, a.i0) * (1.0 - b.w1) + grid.at(b.i1, a.i0) * b.w1;
      const double bottom = grid.at(b.i0, a.i1) * (1.0 - b.w1) + grid.at(b.i1, a.i1) * b.w1;
      out.at(x, y) = top * (1.0 - a.w1) + bottom * a.w1;
    }
  }
  return out;
}

RealGrid resize_bilinear_adjoint(const RealGrid& target_grad, int source_w, int source_h) {
  check_dims(source_w, source_h, target_grad.width(), target_grad.height());
  const auto tx = axis_taps(source_w, target_grad.width());
  const auto ty = axis_taps(source_h, target_grad.height());
  RealGrid out(source_w, source_h);
  for (int y = 0; y < target_grad.height(); ++y) {
    const Tap& a = ty[static_cast<std::size_t>(y)];
    for (int x = 0; x < target_grad.width(); ++x) {
      const Tap& b = tx[static_cast<std::size_t>(x)];
      const double g = target_grad.at(x, y);
      out.at(b.i0, a.i0) += g * (1.0 - a.w1) * (1.0 - b.w1);
      out.at(b.i1, a.i0) += g * (1.0 - a.w1) * b.w1;
      out.at(b.i0, a.i1) += g * a.w1 * (1.0 - b.w1);
      out.at(b.i1, a.i1) += g * a.w1 * b.w1;
    }
  }
  return out;
}

}  // namespace segfuse
