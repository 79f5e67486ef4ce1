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
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <opencv2/core.hpp>

#include "sceneforge/errors.hpp"

// Rasters are cv::Mat. Images and masks are CV_8UC3 in R,G,B channel order;
// conversion to OpenCV's native BGR happens only at the codec boundary.
namespace sceneforge {

enum class MaskKind { Single, MultiObject, MultiPart, Semantic, Class };

inline constexpr std::array<MaskKind, 5> kAllMaskKinds = {
    MaskKind::Single, MaskKind::MultiObject, MaskKind::MultiPart, MaskKind::Semantic,
    MaskKind::Class};

// Short names used in file names and on the command line.
constexpr std::string_view to_string(MaskKind kind) noexcept {
  switch (kind) {
    case MaskKind::Single: return "S";
    case MaskKind::MultiObject: return "MO";
    case MaskKind::MultiPart: return "MP";
    case MaskKind::Semantic: return "Sema";
    case MaskKind::Class: return "C";
  }
  return "?";
}

inline MaskKind parse_mask_kind(std::string_view name) {
  for (MaskKind k : kAllMaskKinds) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("mask kind", "unknown mask kind '" + std::string(name) +
                                     "', expected one of S, MO, MP, Sema, C");
}

using MaskSet = std::set<MaskKind>;

inline MaskSet parse_mask_set(std::string_view csv) {
  MaskSet out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    const std::size_t comma = std::min(csv.find(',', pos), csv.size());
    const std::string_view item = csv.substr(pos, comma - pos);
    if (!item.empty()) out.insert(parse_mask_kind(item));
    pos = comma + 1;
  }
  if (out.empty()) throw ConfigError("outputs", "at least one output mask kind is required");
  return out;
}

inline std::string to_string(const MaskSet& kinds) {
  std::string out;
  for (MaskKind k : kinds) {
    if (!out.empty()) out += ',';
    out += to_string(k);
  }
  return out;
}

constexpr bool is_input_kind(MaskKind kind) noexcept {
  return kind == MaskKind::Single || kind == MaskKind::MultiPart || kind == MaskKind::Semantic;
}

// Output mask kinds derivable from an input mask kind. Class output needs a
// class label on every sample.
inline MaskSet allowed_outputs(MaskKind kind, bool has_class_labels) {
  MaskSet out;
  switch (kind) {
    case MaskKind::Single:
      out = {MaskKind::Single, MaskKind::MultiObject, MaskKind::Class};
      break;
    case MaskKind::MultiPart:
      out = {MaskKind::Single, MaskKind::MultiObject, MaskKind::MultiPart, MaskKind::Class};
      break;
    case MaskKind::Semantic:
      out = {MaskKind::Single, MaskKind::MultiObject, MaskKind::Semantic, MaskKind::Class};
      break;
    case MaskKind::MultiObject:
    case MaskKind::Class:
      throw ConfigError("input kind", std::string("invalid input mask kind '") +
                                          std::string(to_string(kind)) +
                                          "', expected S, MP or Sema");
  }
  if (!has_class_labels) out.erase(MaskKind::Class);
  return out;
}

// 8-bit color in R,G,B order.
struct Rgb8 {
  std::uint8_t r = 0, g = 0, b = 0;

  friend auto operator<=>(const Rgb8&, const Rgb8&) = default;

  std::uint32_t packed() const noexcept {
    return (std::uint32_t{r} << 16) | (std::uint32_t{g} << 8) | std::uint32_t{b};
  }
  cv::Vec3b vec() const noexcept { return {r, g, b}; }
  static Rgb8 from(const cv::Vec3b& v) noexcept { return {v[0], v[1], v[2]}; }
  bool is_black() const noexcept { return r == 0 && g == 0 && b == 0; }
};

inline constexpr Rgb8 kBlack{0, 0, 0};
inline constexpr Rgb8 kWhite{255, 255, 255};

// Object or part color with channels in (0, 1].
struct Color {
  double r = 1.0, g = 1.0, b = 1.0;

  friend bool operator==(const Color&, const Color&) = default;

  static std::uint8_t quantize(double c) noexcept {
    return static_cast<std::uint8_t>(std::clamp(std::floor(c * 255.0 + 0.5), 0.0, 255.0));
  }
  Rgb8 to_rgb8() const noexcept { return {quantize(r), quantize(g), quantize(b)}; }
};

struct BoundingBox {
  int x = 0, y = 0, w = 0, h = 0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;

  bool valid_in(int scene_w, int scene_h) const noexcept {
    return x >= 0 && y >= 0 && w > 0 && h > 0 && x + w <= scene_w && y + h <= scene_h;
  }
};

// Single-channel 0/255 raster marking pixels where any channel is non-zero.
inline cv::Mat foreground(const cv::Mat& mask) {
  CV_Assert(mask.type() == CV_8UC3);
  cv::Mat fg(mask.size(), CV_8UC1);
  for (int y = 0; y < mask.rows; ++y) {
    const auto* src = mask.ptr<cv::Vec3b>(y);
    auto* dst = fg.ptr<std::uint8_t>(y);
    for (int x = 0; x < mask.cols; ++x) {
      dst[x] = (src[x][0] | src[x][1] | src[x][2]) ? 255 : 0;
    }
  }
  return fg;
}

// Tight box around non-black pixels; nullopt when there are none.
inline std::optional<cv::Rect> foreground_bounds(const cv::Mat& mask) {
  CV_Assert(mask.type() == CV_8UC3);
  int x0 = mask.cols, y0 = mask.rows, x1 = -1, y1 = -1;
  for (int y = 0; y < mask.rows; ++y) {
    const auto* row = mask.ptr<cv::Vec3b>(y);
    for (int x = 0; x < mask.cols; ++x) {
      if (row[x][0] | row[x][1] | row[x][2]) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
      }
    }
  }
  if (x1 < 0) return std::nullopt;
  return cv::Rect(x0, y0, x1 - x0 + 1, y1 - y0 + 1);
}

// Distinct non-black colors in row-major first-occurrence order.
inline std::vector<Rgb8> distinct_colors(const cv::Mat& mask) {
  CV_Assert(mask.type() == CV_8UC3);
  std::vector<Rgb8> order;
  std::set<std::uint32_t> seen;
  for (int y = 0; y < mask.rows; ++y) {
    const auto* row = mask.ptr<cv::Vec3b>(y);
    for (int x = 0; x < mask.cols; ++x) {
      const Rgb8 c = Rgb8::from(row[x]);
      if (c.is_black()) continue;
      if (seen.insert(c.packed()).second) order.push_back(c);
    }
  }
  return order;
}

// One object: an RGB image and an aligned mask with at least one
// non-background pixel. Rasters are deep-copied on construction and never
// mutated afterwards.
class ObjectSample {
 public:
  static ObjectSample create(const cv::Mat& image, const cv::Mat& mask, std::string class_label,
                             MaskKind input_kind) {
    if (!is_input_kind(input_kind)) {
      throw InputError(std::string("mask kind ") + std::string(to_string(input_kind)) +
                       " cannot be used as input");
    }
    if (image.empty() || mask.empty()) throw InputError("empty image or mask");
    if (image.size() != mask.size()) {
      throw InputError("image and mask sizes differ: " + std::to_string(image.cols) + "x" +
                       std::to_string(image.rows) + " vs " + std::to_string(mask.cols) + "x" +
                       std::to_string(mask.rows));
    }
    ObjectSample s;
    s.image_ = to_rgb(image, "image");
    s.mask_ = to_rgb(mask, "mask");
    if (!foreground_bounds(s.mask_)) throw InputError("mask has no foreground pixels");
    s.class_label_ = std::move(class_label);
    s.input_kind_ = input_kind;
    return s;
  }

  const cv::Mat& image() const noexcept { return image_; }
  const cv::Mat& mask() const noexcept { return mask_; }
  const std::string& class_label() const noexcept { return class_label_; }
  MaskKind input_kind() const noexcept { return input_kind_; }
  int width() const noexcept { return image_.cols; }
  int height() const noexcept { return image_.rows; }

 private:
  ObjectSample() = default;

  static cv::Mat to_rgb(const cv::Mat& m, const char* what) {
    if (m.depth() != CV_8U) throw InputError(std::string(what) + " must be 8-bit");
    cv::Mat out;
    switch (m.channels()) {
      case 1: {
        cv::Mat planes[] = {m, m, m};
        cv::merge(planes, 3, out);
        return out;
      }
      case 3: return m.clone();
      case 4: {
        cv::Mat planes[4];
        cv::split(m, planes);
        cv::merge(planes, 3, out);
        return out;
      }
      default:
        throw InputError(std::string(what) + " must have 1, 3 or 4 channels");
    }
  }

  cv::Mat image_;
  cv::Mat mask_;
  std::string class_label_;
  MaskKind input_kind_ = MaskKind::Single;
};

}  // namespace sceneforge
