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
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "sceneforge/core.hpp"
#include "sceneforge/errors.hpp"
#include "sceneforge/packing.hpp"
#include "sceneforge/rng.hpp"
#include "sceneforge/transform.hpp"

namespace sceneforge::composer {

// Smallest L with L^3 >= n + 2.
constexpr int palette_levels(std::int64_t n) noexcept {
  int levels = 1;
  while (std::int64_t{levels} * levels * levels < n + 2) ++levels;
  return levels;
}

// n distinct colors from the cube of levels {1, 1 - 1/L, ..., 1/L}, in
// descending lexicographic (r,g,b) order with white skipped. The smallest
// level is 1/L, so black never appears.
inline std::vector<Color> generate_colors(std::int64_t n) {
  if (n < 1) throw ConfigError("colors", "at least one color must be requested");
  const int levels = palette_levels(n);
  // Above 255 levels neighbouring values collide after 8-bit quantization.
  if (levels > 255) throw ConfigError("colors", "too many colors for 8-bit masks");
  auto level = [levels](int l) { return static_cast<double>(levels - l) / levels; };
  std::vector<Color> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int r = 0; r < levels; ++r) {
    for (int g = 0; g < levels; ++g) {
      for (int b = 0; b < levels; ++b) {
        if (r == 0 && g == 0 && b == 0) continue;
        out.push_back({level(r), level(g), level(b)});
        if (static_cast<std::int64_t>(out.size()) == n) return out;
      }
    }
  }
  return out;
}

struct ObjectRecord {
  std::string class_label;
  Rgb8 mo_color;
  std::vector<Rgb8> part_colors;      // MP output colors, in part order
  std::vector<Rgb8> semantic_colors;  // input category colors present
  bool occluded = false;              // no visible pixel left
};

struct SceneBundle {
  cv::Mat image;
  std::map<MaskKind, cv::Mat> masks;
  std::vector<BoundingBox> boxes;  // one per object when requested
  std::map<std::string, int> counts;
  std::vector<ObjectRecord> registry;
  packing::PackedLayout layout;

  int width() const noexcept { return image.cols; }
  int height() const noexcept { return image.rows; }
};

struct ComposeOptions {
  transform::TransformConfig transform;
  packing::OrientationParams orientation;
  MaskSet outputs = {MaskKind::Single};
  bool boxes = true;
};

// Resizes a smaller background up to the scene size; crops a random window
// out of a larger one.
inline cv::Mat fit_background(const cv::Mat& bg, int scene_w, int scene_h, Rng& rng) {
  if (bg.empty()) throw InputError("empty background image");
  CV_Assert(bg.type() == CV_8UC3);
  if (bg.cols < scene_w || bg.rows < scene_h) {
    cv::Mat out;
    cv::resize(bg, out, {scene_w, scene_h}, 0, 0, cv::INTER_LINEAR);
    return out;
  }
  const int x = static_cast<int>(rng.below(static_cast<std::uint64_t>(bg.cols - scene_w) + 1));
  const int y = static_cast<int>(rng.below(static_cast<std::uint64_t>(bg.rows - scene_h) + 1));
  return bg(cv::Rect(x, y, scene_w, scene_h)).clone();
}

// An object after per-object transforms, at its place in the scene.
struct PlacedObject {
  ObjectSample sample;
  packing::Rect at;
};

namespace detail {

inline const cv::Vec3b& object_pixel(const cv::Mat& raster, const packing::Rect& at, int x, int y) {
  return raster.at<cv::Vec3b>(y - at.y, x - at.x);
}

inline std::string count_key(const std::string& label) { return label.empty() ? "object" : label; }

}  // namespace detail

// Paints one annotation mask from the per-pixel owner map (-1 = none).
// Colors come from `registry`, which must already hold the assignments.
inline cv::Mat derive_mask(MaskKind kind, std::span<const PlacedObject> objects,
                           const cv::Mat& owner, std::span<const ObjectRecord> registry,
                           std::span<const Rgb8> class_colors = {}) {
  if (objects.empty()) throw ConfigError("objects", "no objects to derive a mask from");
  const MaskKind input = objects.front().sample.input_kind();
  bool labelled = true;
  for (const auto& o : objects) labelled = labelled && !o.sample.class_label().empty();
  if (!allowed_outputs(input, labelled).contains(kind)) {
    throw ConfigError("outputs", std::string("mask kind ") + std::string(to_string(kind)) +
                                     " cannot be derived from input kind " +
                                     std::string(to_string(input)));
  }
  CV_Assert(owner.type() == CV_32SC1);

  // Per-object lookup from input part color to output part color.
  std::vector<std::unordered_map<std::uint32_t, Rgb8>> part_lookup;
  if (kind == MaskKind::MultiPart) {
    part_lookup.resize(objects.size());
    for (std::size_t i = 0; i < objects.size(); ++i) {
      const auto parts = distinct_colors(objects[i].sample.mask());
      CV_Assert(parts.size() == registry[i].part_colors.size());
      for (std::size_t p = 0; p < parts.size(); ++p) {
        part_lookup[i][parts[p].packed()] = registry[i].part_colors[p];
      }
    }
  }
  std::map<std::string, Rgb8> class_lookup;
  if (kind == MaskKind::Class) {
    std::size_t next = 0;
    for (const auto& rec : registry) {
      if (!class_lookup.contains(rec.class_label)) {
        CV_Assert(next < class_colors.size());
        class_lookup[rec.class_label] = class_colors[next++];
      }
    }
  }

  cv::Mat out(owner.size(), CV_8UC3, cv::Scalar::all(0));
  for (int y = 0; y < owner.rows; ++y) {
    const auto* own = owner.ptr<std::int32_t>(y);
    auto* dst = out.ptr<cv::Vec3b>(y);
    for (int x = 0; x < owner.cols; ++x) {
      const int i = own[x];
      if (i < 0) continue;
      const auto idx = static_cast<std::size_t>(i);
      switch (kind) {
        case MaskKind::Single: dst[x] = kWhite.vec(); break;
        case MaskKind::MultiObject: dst[x] = registry[idx].mo_color.vec(); break;
        case MaskKind::Semantic:
          dst[x] = detail::object_pixel(objects[idx].sample.mask(), objects[idx].at, x, y);
          break;
        case MaskKind::MultiPart: {
          const auto src =
              Rgb8::from(detail::object_pixel(objects[idx].sample.mask(), objects[idx].at, x, y));
          dst[x] = part_lookup[idx].at(src.packed()).vec();
          break;
        }
        case MaskKind::Class: dst[x] = class_lookup.at(registry[idx].class_label).vec(); break;
      }
    }
  }
  return out;
}

// Builds one scene: crop -> per-object geometric transforms -> shrink ->
// height limit -> pack -> realize -> background -> paste in placement order
// -> scene noise -> annotation masks, boxes and counts.
inline SceneBundle compose(std::span<const ObjectSample> samples, const ComposeOptions& opts,
                           const std::optional<cv::Mat>& background, Rng& rng) {
  if (samples.empty()) throw ConfigError("objects", "a scene needs at least one object");
  opts.transform.validate();
  opts.orientation.validate();
  const MaskKind input = samples.front().input_kind();
  bool labelled = true;
  for (const auto& s : samples) {
    if (s.input_kind() != input) throw InputError("all objects in a scene must share a mask kind");
    labelled = labelled && !s.class_label().empty();
  }
  const MaskSet allowed = allowed_outputs(input, labelled);
  for (MaskKind k : opts.outputs) {
    if (!allowed.contains(k)) {
      throw ConfigError("outputs", std::string("mask kind ") + std::string(to_string(k)) +
                                       " cannot be produced from input kind " +
                                       std::string(to_string(input)));
    }
  }

  std::vector<ObjectSample> objects;
  objects.reserve(samples.size());
  for (const auto& s : samples) {
    objects.push_back(transform::geometric(transform::crop_margins(s), opts.transform, rng));
  }
  std::vector<packing::RectSize> sizes;
  sizes.reserve(objects.size());
  for (const auto& o : objects) sizes.push_back({o.width(), o.height()});

  SceneBundle bundle;
  bundle.layout = packing::layout_objects(sizes, {opts.transform.shrinkage}, opts.orientation);
  const int scene_w = bundle.layout.scene_w;
  const int scene_h = bundle.layout.scene_h;

  cv::Mat scene = background ? fit_background(*background, scene_w, scene_h, rng)
                             : cv::Mat(scene_h, scene_w, CV_8UC3, cv::Scalar::all(0));
  cv::Mat owner(scene_h, scene_w, CV_32SC1, cv::Scalar::all(-1));

  std::vector<PlacedObject> placed;
  placed.reserve(objects.size());
  for (const auto& p : bundle.layout.placements) {
    const auto& obj = objects[p.index];
    const auto& at = p.real;
    for (int y = 0; y < obj.height(); ++y) {
      const auto* m = obj.mask().ptr<cv::Vec3b>(y);
      const auto* px = obj.image().ptr<cv::Vec3b>(y);
      auto* dst = scene.ptr<cv::Vec3b>(at.y + y) + at.x;
      auto* own = owner.ptr<std::int32_t>(at.y + y) + at.x;
      for (int x = 0; x < obj.width(); ++x) {
        if (m[x][0] | m[x][1] | m[x][2]) {
          dst[x] = px[x];
          own[x] = static_cast<std::int32_t>(p.index);
        }
      }
    }
    placed.push_back({obj, at});
  }
  // Placements come back in input order, so placed[i] is object i.

  bundle.image = transform::photometric(scene, opts.transform, rng);

  const auto n = static_cast<std::int64_t>(objects.size());
  const auto mo = generate_colors(n);
  bundle.registry.resize(objects.size());
  for (std::size_t i = 0; i < objects.size(); ++i) {
    auto& rec = bundle.registry[i];
    rec.class_label = objects[i].class_label();
    rec.mo_color = mo[i].to_rgb8();
    if (input == MaskKind::Semantic) rec.semantic_colors = distinct_colors(objects[i].mask());
    bundle.counts[detail::count_key(rec.class_label)] += 1;
  }
  if (opts.outputs.contains(MaskKind::MultiPart)) {
    std::vector<std::vector<Rgb8>> parts;
    std::int64_t total = 0;
    for (const auto& o : objects) {
      parts.push_back(distinct_colors(o.mask()));
      total += static_cast<std::int64_t>(parts.back().size());
    }
    const auto colors = generate_colors(total);
    std::size_t next = 0;
    for (std::size_t i = 0; i < objects.size(); ++i) {
      for (std::size_t p = 0; p < parts[i].size(); ++p) {
        bundle.registry[i].part_colors.push_back(colors[next++].to_rgb8());
      }
    }
  }
  std::vector<Rgb8> class_colors;
  if (opts.outputs.contains(MaskKind::Class)) {
    std::vector<std::string> seen;
    for (const auto& rec : bundle.registry) {
      if (std::find(seen.begin(), seen.end(), rec.class_label) == seen.end()) {
        seen.push_back(rec.class_label);
      }
    }
    for (const auto& c : generate_colors(static_cast<std::int64_t>(seen.size()))) {
      class_colors.push_back(c.to_rgb8());
    }
  }
  for (MaskKind k : opts.outputs) {
    bundle.masks[k] = derive_mask(k, placed, owner, bundle.registry, class_colors);
  }

  // Boxes cover visible pixels; fully hidden objects keep their placed
  // extent and are flagged.
  std::vector<int> x0(objects.size(), scene_w), y0(objects.size(), scene_h);
  std::vector<int> x1(objects.size(), -1), y1(objects.size(), -1);
  for (int y = 0; y < scene_h; ++y) {
    const auto* own = owner.ptr<std::int32_t>(y);
    for (int x = 0; x < scene_w; ++x) {
      if (own[x] < 0) continue;
      const auto i = static_cast<std::size_t>(own[x]);
      x0[i] = std::min(x0[i], x);
      x1[i] = std::max(x1[i], x);
      y0[i] = std::min(y0[i], y);
      y1[i] = std::max(y1[i], y);
    }
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    bundle.registry[i].occluded = x1[i] < 0;
    if (!opts.boxes) continue;
    if (x1[i] < 0) {
      const auto& r = placed[i].at;
      bundle.boxes.push_back({r.x, r.y, r.w, r.h});
    } else {
      bundle.boxes.push_back({x0[i], y0[i], x1[i] - x0[i] + 1, y1[i] - y0[i] + 1});
    }
  }
  return bundle;
}

}  // namespace sceneforge::composer
