#include "segfuse_ref/random_maps.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "segfuse_ref/oracles.hpp"

namespace segfuse::ref {

namespace {

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

void paint_shape(InstanceMap& m, Rng& rng, int cx, int cy, int rx, int ry, Label label) {
  const bool ellipse = uniform(rng, 0, 1) == 1;
  for (int y = std::max(0, cy - ry); y <= std::min(m.height() - 1, cy + ry); ++y)
    for (int x = std::max(0, cx - rx); x <= std::min(m.width() - 1, cx + rx); ++x) {
      if (ellipse) {
        const double dx = (x - cx) / (rx + 0.5), dy = (y - cy) / (ry + 0.5);
        if (dx * dx + dy * dy > 1.0) continue;
      }
      m.set(x, y, label);
    }
}

std::vector<Label> distinct_labels(Rng& rng, int n) {
  std::vector<Label> pool(static_cast<std::size_t>(std::max(4 * n, 8)));
  std::iota(pool.begin(), pool.end(), Label{1});
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(static_cast<std::size_t>(n));
  return pool;
}

}  // namespace

InstanceMap random_map(Rng& rng, int w, int h, int max_instances) {
  InstanceMap m(w, h);
  const int n = uniform(rng, 0, max_instances);
  const auto labels = distinct_labels(rng, n);
  for (int i = 0; i < n; ++i) {
    const int rx = uniform(rng, 0, std::max(1, w / 4));
    const int ry = uniform(rng, 0, std::max(1, h / 4));
    paint_shape(m, rng, uniform(rng, 0, w - 1), uniform(rng, 0, h - 1), rx, ry, labels[static_cast<std::size_t>(i)]);
  }
  return m;
}

InstanceMap perturb(Rng& rng, const InstanceMap& gt, int max_extra) {
  const auto gt_labels = labels_of(gt);
  std::map<Label, Label> remap;
  const auto fresh = distinct_labels(rng, static_cast<int>(gt_labels.size()) + max_extra + 1);
  std::size_t next = 0;
  for (Label l : gt_labels) {
    const int action = uniform(rng, 0, 9);
    if (action == 0) {
      remap[l] = 0;  // dropped
    } else if (action == 1 && !remap.empty()) {
      remap[l] = remap.rbegin()->second;  // merged into the previous one
    } else {
      remap[l] = fresh[next++];
    }
  }
  InstanceMap out(gt.width(), gt.height());
  // Each kept instance is shifted by up to 2 pixels.
  std::map<Label, std::pair<int, int>> shift;
  for (const auto& [from, to] : remap)
    if (to != 0 && !shift.count(to)) shift[to] = {uniform(rng, -2, 2), uniform(rng, -2, 2)};
  for (int y = 0; y < gt.height(); ++y)
    for (int x = 0; x < gt.width(); ++x) {
      const Label l = gt.at(x, y);
      if (l == 0) continue;
      const Label to = remap[l];
      if (to == 0) continue;
      const auto [dx, dy] = shift[to];
      const int nx = x + dx, ny = y + dy;
      if (nx >= 0 && ny >= 0 && nx < gt.width() && ny < gt.height()) out.set(nx, ny, to);
    }
  const int extra = uniform(rng, 0, max_extra);
  for (int i = 0; i < extra; ++i) {
    const int rx = uniform(rng, 0, std::max(1, gt.width() / 6));
    const int ry = uniform(rng, 0, std::max(1, gt.height() / 6));
    paint_shape(out, rng, uniform(rng, 0, gt.width() - 1), uniform(rng, 0, gt.height() - 1), rx, ry, fresh[next++]);
  }
  return out;
}

InstanceMap blob_field(Rng& rng, int w, int h, int count) {
  InstanceMap m(w, h);
  for (int i = 0; i < count; ++i)
    paint_shape(m, rng, uniform(rng, 0, w - 1), uniform(rng, 0, h - 1), uniform(rng, 6, 16), uniform(rng, 6, 16),
                static_cast<Label>(i + 1));
  return m;
}

InstanceMap relabel(Rng& rng, const InstanceMap& m) {
  const auto labels = labels_of(m);
  const auto target = distinct_labels(rng, static_cast<int>(labels.size()));
  std::map<Label, Label> remap;
  for (std::size_t i = 0; i < labels.size(); ++i) remap[labels[i]] = target[i];
  InstanceMap out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m.at(x, y) != 0) out.set(x, y, remap[m.at(x, y)]);
  return out;
}

InstanceMap erase_label(const InstanceMap& m, Label label) {
  InstanceMap out = m;
  for (auto& v : out.labels())
    if (v == label) v = 0;
  return out;
}

}  // namespace segfuse::ref
