/* Copyright 2026 The SceneForge Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <span>
#include <tuple>
#include <vector>

#include "sceneforge/errors.hpp"

// Rectangle layout of the objects in a scene: a maximal-rectangles packer
// with Best Long Side Fit scoring, run on shrinked object sizes inside a
// strip of fixed height and on-demand width.
namespace sceneforge::packing {

struct RectSize {
  int w = 1;
  int h = 1;

  friend bool operator==(const RectSize&, const RectSize&) = default;
  std::int64_t area() const noexcept { return std::int64_t{w} * h; }
};

struct Rect {
  int x = 0, y = 0, w = 0, h = 0;

  friend bool operator==(const Rect&, const Rect&) = default;

  int right() const noexcept { return x + w; }
  int bottom() const noexcept { return y + h; }
  std::int64_t area() const noexcept { return std::int64_t{w} * h; }

  bool contains(const Rect& o) const noexcept {
    return o.x >= x && o.y >= y && o.right() <= right() && o.bottom() <= bottom();
  }
  // Area of the intersection; 0 for rectangles that only touch.
  std::int64_t overlap(const Rect& o) const noexcept {
    const int ix = std::max(0, std::min(right(), o.right()) - std::max(x, o.x));
    const int iy = std::max(0, std::min(bottom(), o.bottom()) - std::max(y, o.y));
    return std::int64_t{ix} * iy;
  }
};

struct Placement {
  std::size_t index = 0;  // position in the packer input
  Rect shrinked;
  Rect real;
};

struct PackedLayout {
  int scene_w = 0;
  int scene_h = 0;
  std::vector<Placement> placements;
};

struct ShrinkParams {
  double s = 0.0;

  void validate() const {
    if (!(s >= 0.0 && s < 1.0)) throw ConfigError("shrinkage", detail::range_message(s, "[0,1)"));
  }
};

struct OrientationParams {
  double theta = 1.2;

  void validate() const {
    if (!(theta > 0.0) || !std::isfinite(theta)) {
      throw ConfigError("theta", detail::range_message(theta, "(0,inf)"));
    }
  }
};

inline void validate_sizes(std::span<const RectSize> sizes) {
  for (const auto& r : sizes) {
    if (r.w < 1 || r.h < 1) throw ConfigError("size", "rectangle extents must be >= 1");
  }
}

// Scales both extents of every rectangle by (1 - s), rounding half up and
// keeping at least one pixel.
inline std::vector<RectSize> shrink(std::span<const RectSize> sizes, ShrinkParams params) {
  params.validate();
  validate_sizes(sizes);
  const double keep = 1.0 - params.s;
  // The 1e-9 nudge absorbs binary representation error of s (0.1, 0.3, ...).
  auto scale = [keep](int v) {
    return std::max(1, static_cast<int>(std::floor(keep * v + 0.5 + 1e-9)));
  };
  std::vector<RectSize> out;
  out.reserve(sizes.size());
  for (const auto& r : sizes) out.push_back({scale(r.w), scale(r.h)});
  return out;
}

// Smallest k with k*k >= n.
constexpr std::int64_t ceil_sqrt(std::int64_t n) noexcept {
  std::int64_t k = 0;
  while (k * k < n) ++k;
  return k;
}

// Hard limit on the packed scene height: the larger of the tallest original
// object and theta times the height of a square arrangement of the
// shrinked objects.
inline int height_limit(std::span<const RectSize> shrinked, std::span<const RectSize> original,
                        OrientationParams theta) {
  if (shrinked.empty() || original.empty()) throw ConfigError("objects", "empty object list");
  if (shrinked.size() != original.size()) {
    throw ConfigError("objects", "shrinked and original lists differ in length");
  }
  theta.validate();
  int tallest = 0;
  for (const auto& r : original) tallest = std::max(tallest, r.h);
  std::int64_t total = 0;
  for (const auto& r : shrinked) total += r.h;
  const auto columns = ceil_sqrt(static_cast<std::int64_t>(shrinked.size()));
  const double square = theta.theta * static_cast<double>(total) / static_cast<double>(columns);
  const int limit = static_cast<int>(std::ceil(square - 1e-9));
  return std::max(tallest, limit);
}

namespace detail {

// Free-space bookkeeping for a strip of fixed height whose width grows when
// no free rectangle can hold the next item.
class StripBin {
 public:
  explicit StripBin(int height) : height_(height) {}

  int width() const noexcept { return width_; }
  const std::vector<Rect>& free_rects() const noexcept { return free_; }

  Rect insert(RectSize size) {
    for (;;) {
      if (auto pos = best_long_side_fit(size)) {
        const Rect placed{pos->first, pos->second, size.w, size.h};
        place(placed);
        return placed;
      }
      grow(size);
    }
  }

 private:
  std::optional<std::pair<int, int>> best_long_side_fit(RectSize size) const {
    using Score = std::tuple<int, int, std::size_t>;
    std::optional<Score> best;
    std::optional<std::pair<int, int>> pos;
    for (std::size_t i = 0; i < free_.size(); ++i) {
      const Rect& f = free_[i];
      if (size.w > f.w || size.h > f.h) continue;
      const int dw = f.w - size.w;
      const int dh = f.h - size.h;
      const Score score{std::max(dw, dh), std::min(dw, dh), i};
      if (!best || score < *best) {
        best = score;
        pos = {f.x, f.y};
      }
    }
    return pos;
  }

  // Widen the strip by the least amount that lets `size` fit against the
  // right edge.
  void grow(RectSize size) {
    int delta = size.w;
    for (const Rect& f : free_) {
      if (f.right() == width_ && f.h >= size.h) delta = std::min(delta, size.w - f.w);
    }
    delta = std::max(delta, 1);
    for (Rect& f : free_) {
      if (f.right() == width_) f.w += delta;
    }
    free_.push_back({width_, 0, delta, height_});
    width_ += delta;
    prune();
  }

  void place(const Rect& used) {
    std::vector<Rect> next;
    next.reserve(free_.size() + 4);
    for (const Rect& f : free_) {
      if (f.overlap(used) == 0) {
        next.push_back(f);
        continue;
      }
      if (used.x > f.x) next.push_back({f.x, f.y, used.x - f.x, f.h});
      if (used.right() < f.right()) next.push_back({used.right(), f.y, f.right() - used.right(), f.h});
      if (used.y > f.y) next.push_back({f.x, f.y, f.w, used.y - f.y});
      if (used.bottom() < f.bottom()) {
        next.push_back({f.x, used.bottom(), f.w, f.bottom() - used.bottom()});
      }
    }
    free_ = std::move(next);
    prune();
  }

  // Drop free rectangles contained in another one (keeping the first of
  // identical pairs).
  void prune() {
    std::vector<Rect> kept;
    kept.reserve(free_.size());
    for (std::size_t i = 0; i < free_.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < free_.size() && !dominated; ++j) {
        if (i == j || !free_[j].contains(free_[i])) continue;
        dominated = !(free_[i] == free_[j]) || j < i;
      }
      if (!dominated) kept.push_back(free_[i]);
    }
    free_ = std::move(kept);
  }

  int height_;
  int width_ = 0;
  std::vector<Rect> free_;
};

}  // namespace detail

// Packs the rectangles in input order. The scene is the bounding box of the
// placements; real rectangles equal the shrinked ones until realize().
inline PackedLayout pack(std::span<const RectSize> shrinked, int h_max) {
  validate_sizes(shrinked);
  if (h_max < 1) throw ConfigError("height limit", "must be >= 1");
  for (std::size_t i = 0; i < shrinked.size(); ++i) {
    if (shrinked[i].h > h_max) {
      throw ConfigError("height limit", "rectangle " + std::to_string(i) + " of height " +
                                            std::to_string(shrinked[i].h) +
                                            " exceeds the limit " + std::to_string(h_max));
    }
  }
  detail::StripBin bin(h_max);
  PackedLayout layout;
  layout.placements.reserve(shrinked.size());
  for (std::size_t i = 0; i < shrinked.size(); ++i) {
    const Rect r = bin.insert(shrinked[i]);
    layout.scene_w = std::max(layout.scene_w, r.right());
    layout.scene_h = std::max(layout.scene_h, r.bottom());
    layout.placements.push_back({i, r, r});
  }
  return layout;
}

// Replaces each shrinked slot by the object's real size, centered on the
// slot. The scene grows (and everything shifts) so every real rectangle is
// inside it; real rectangles may overlap one another.
inline PackedLayout realize(const PackedLayout& packed, std::span<const RectSize> original) {
  if (original.size() != packed.placements.size()) {
    throw ConfigError("objects", "one original size per placement is required");
  }
  validate_sizes(original);
  PackedLayout out = packed;
  int min_x = 0, min_y = 0;
  int max_x = packed.scene_w, max_y = packed.scene_h;
  for (auto& p : out.placements) {
    const RectSize real = original[p.index];
    const Rect& s = p.shrinked;
    p.real = {s.x - (real.w - s.w) / 2, s.y - (real.h - s.h) / 2, real.w, real.h};
    min_x = std::min(min_x, p.real.x);
    min_y = std::min(min_y, p.real.y);
    max_x = std::max(max_x, p.real.right());
    max_y = std::max(max_y, p.real.bottom());
  }
  for (auto& p : out.placements) {
    p.shrinked.x -= min_x;
    p.shrinked.y -= min_y;
    p.real.x -= min_x;
    p.real.y -= min_y;
  }
  out.scene_w = max_x - min_x;
  out.scene_h = max_y - min_y;
  return out;
}

// shrink -> height_limit -> pack -> realize.
inline PackedLayout layout_objects(std::span<const RectSize> original, ShrinkParams shrinkage,
                                   OrientationParams orientation) {
  const auto shrinked = shrink(original, shrinkage);
  const int limit = height_limit(shrinked, original, orientation);
  return realize(pack(shrinked, limit), original);
}

// Total pairwise intersection area of the real rectangles.
inline std::int64_t real_overlap_area(const PackedLayout& layout) {
  std::int64_t total = 0;
  const auto& ps = layout.placements;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    for (std::size_t j = i + 1; j < ps.size(); ++j) total += ps[i].real.overlap(ps[j].real);
  }
  return total;
}

}  // namespace sceneforge::packing
