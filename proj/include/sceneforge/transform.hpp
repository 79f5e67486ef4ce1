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
#include <cstdint>
#include <string>
#include <tuple>
#include <utility>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "sceneforge/core.hpp"
#include "sceneforge/errors.hpp"
#include "sceneforge/rng.hpp"

namespace sceneforge::transform {

// Per-object and per-scene augmentation parameters. Defaults are no-ops
// except for the random rotation and flip.
struct TransformConfig {
  double shrinkage = 0.0;    // [0,1)
  double rotation = 180.0;   // max |angle| in degrees, [0,180]
  double flip_prob = 0.5;    // [0,1]
  double salt = 0.0;         // [0,1]
  double pepper = 0.0;       // [0,1]
  int smooth = 1;            // odd Gaussian kernel size, 1 = off
  double perspective = 0.0;  // added width share, [0,3]
  double noise = 0.0;        // Gaussian noise variance, >= 0

  friend bool operator==(const TransformConfig&, const TransformConfig&) = default;

  void validate() const {
    auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
    if (!(shrinkage >= 0.0 && shrinkage < 1.0)) {
      throw ConfigError("shrinkage", detail::range_message(shrinkage, "[0,1)"));
    }
    if (!in(rotation, 0.0, 180.0)) {
      throw ConfigError("rotation", detail::range_message(rotation, "[0,180]"));
    }
    if (!in(flip_prob, 0.0, 1.0)) {
      throw ConfigError("flip_prob", detail::range_message(flip_prob, "[0,1]"));
    }
    if (!in(salt, 0.0, 1.0)) throw ConfigError("salt", detail::range_message(salt, "[0,1]"));
    if (!in(pepper, 0.0, 1.0)) throw ConfigError("pepper", detail::range_message(pepper, "[0,1]"));
    if (salt + pepper > 1.0) {
      throw ConfigError("pepper", "salt + pepper must not exceed 1, got " +
                                      std::to_string(salt + pepper));
    }
    if (smooth < 1 || smooth % 2 == 0) {
      throw ConfigError("smooth", detail::range_message(smooth, "{1,3,5,...}"));
    }
    if (!in(perspective, 0.0, 3.0)) {
      throw ConfigError("perspective", detail::range_message(perspective, "[0,3]"));
    }
    if (!(noise >= 0.0) || !std::isfinite(noise)) {
      throw ConfigError("noise", detail::range_message(noise, "[0,inf)"));
    }
  }
};

// Crops image and mask to the tight box of non-background mask pixels.
inline ObjectSample crop_margins(const ObjectSample& sample) {
  const auto box = foreground_bounds(sample.mask());
  if (!box) throw InputError("mask has no foreground pixels");
  if (box->width == sample.width() && box->height == sample.height()) return sample;
  return ObjectSample::create(sample.image()(*box), sample.mask()(*box), sample.class_label(),
                              sample.input_kind());
}

namespace detail {

inline std::pair<cv::Mat, cv::Mat> rotate_expanded(const cv::Mat& image, const cv::Mat& mask,
                                                   double degrees) {
  const double rad = degrees * CV_PI / 180.0;
  const double c = std::abs(std::cos(rad));
  const double s = std::abs(std::sin(rad));
  const int w = image.cols, h = image.rows;
  const int out_w = std::max(1, static_cast<int>(std::ceil(w * c + h * s - 1e-6)));
  const int out_h = std::max(1, static_cast<int>(std::ceil(w * s + h * c - 1e-6)));
  cv::Mat m = cv::getRotationMatrix2D(cv::Point2f((w - 1) * 0.5f, (h - 1) * 0.5f), degrees, 1.0);
  m.at<double>(0, 2) += (out_w - 1) * 0.5 - (w - 1) * 0.5;
  m.at<double>(1, 2) += (out_h - 1) * 0.5 - (h - 1) * 0.5;
  cv::Mat img_out, mask_out;
  cv::warpAffine(image, img_out, m, {out_w, out_h}, cv::INTER_LINEAR, cv::BORDER_CONSTANT,
                 cv::Scalar::all(0));
  cv::warpAffine(mask, mask_out, m, {out_w, out_h}, cv::INTER_NEAREST, cv::BORDER_CONSTANT,
                 cv::Scalar::all(0));
  return {img_out, mask_out};
}

// Pads the width by `share` of itself and pulls the two top corners of the
// padded canvas inward by random fractions of half the padding.
inline std::pair<cv::Mat, cv::Mat> perspective_warp(const cv::Mat& image, const cv::Mat& mask,
                                                    double share, Rng& rng) {
  const double d_left = rng.uniform();
  const double d_right = rng.uniform();
  const int pad = static_cast<int>(std::lround(share * image.cols));
  if (pad < 1) return {image, mask};
  const int w = image.cols + pad, h = image.rows;
  cv::Mat img_pad(h, w, CV_8UC3, cv::Scalar::all(0));
  cv::Mat mask_pad(h, w, CV_8UC3, cv::Scalar::all(0));
  const cv::Rect inner(pad / 2, 0, image.cols, image.rows);
  image.copyTo(img_pad(inner));
  mask.copyTo(mask_pad(inner));
  const float half = static_cast<float>(pad) * 0.5f;
  const float right = static_cast<float>(w - 1), bottom = static_cast<float>(h - 1);
  const cv::Point2f src[] = {{0.f, 0.f}, {right, 0.f}, {right, bottom}, {0.f, bottom}};
  const cv::Point2f dst[] = {{half * static_cast<float>(d_left), 0.f},
                             {right - half * static_cast<float>(d_right), 0.f},
                             {right, bottom},
                             {0.f, bottom}};
  const cv::Mat m = cv::getPerspectiveTransform(src, dst);
  cv::Mat img_out, mask_out;
  cv::warpPerspective(img_pad, img_out, m, {w, h}, cv::INTER_LINEAR, cv::BORDER_CONSTANT,
                      cv::Scalar::all(0));
  cv::warpPerspective(mask_pad, mask_out, m, {w, h}, cv::INTER_NEAREST, cv::BORDER_CONSTANT,
                      cv::Scalar::all(0));
  return {img_out, mask_out};
}

}  // namespace detail

// Rotates image and mask by `degrees` (counter-clockwise) on an expanded
// canvas and re-crops the margins.
inline ObjectSample rotate(const ObjectSample& sample, double degrees) {
  auto [image, mask] = detail::rotate_expanded(sample.image(), sample.mask(), degrees);
  return crop_margins(ObjectSample::create(image, mask, sample.class_label(), sample.input_kind()));
}

// Random flip, rotation and perspective applied identically to image and
// mask. Images are resampled bilinearly, masks by nearest neighbour so no
// new label colors appear. Rotation expands the canvas; the result is
// re-cropped to its margins.
inline ObjectSample geometric(const ObjectSample& sample, const TransformConfig& cfg, Rng& rng) {
  cfg.validate();
  cv::Mat image = sample.image();
  cv::Mat mask = sample.mask();
  bool resampled = false;

  if (rng.bernoulli(cfg.flip_prob)) {
    cv::Mat fi, fm;
    cv::flip(image, fi, 1);
    cv::flip(mask, fm, 1);
    image = fi;
    mask = fm;
  }
  const double angle = rng.uniform(-cfg.rotation, cfg.rotation);
  if (angle != 0.0) {
    std::tie(image, mask) = detail::rotate_expanded(image, mask, angle);
    resampled = true;
  }
  if (cfg.perspective > 0.0) {
    std::tie(image, mask) = detail::perspective_warp(image, mask, cfg.perspective, rng);
    resampled = true;
  }
  auto out = ObjectSample::create(image, mask, sample.class_label(), sample.input_kind());
  return resampled ? crop_margins(out) : out;
}

// Scene-level noise: Gaussian noise, then salt and pepper from one uniform
// draw per pixel, then Gaussian smoothing. Never applied to masks.
inline cv::Mat photometric(const cv::Mat& scene, const TransformConfig& cfg, Rng& rng) {
  cfg.validate();
  CV_Assert(scene.type() == CV_8UC3);
  cv::Mat out = scene.clone();

  if (cfg.noise > 0.0) {
    const double sigma = std::sqrt(cfg.noise);
    for (int y = 0; y < out.rows; ++y) {
      auto* row = out.ptr<std::uint8_t>(y);
      for (int x = 0; x < out.cols * 3; ++x) {
        const double v = std::round(row[x] + sigma * rng.normal());
        row[x] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
      }
    }
  }
  if (cfg.salt + cfg.pepper > 0.0) {
    const double black_below = cfg.salt + cfg.pepper;
    for (int y = 0; y < out.rows; ++y) {
      auto* row = out.ptr<cv::Vec3b>(y);
      for (int x = 0; x < out.cols; ++x) {
        const double u = rng.uniform();
        if (u < cfg.salt) {
          row[x] = kWhite.vec();
        } else if (u < black_below) {
          row[x] = kBlack.vec();
        }
      }
    }
  }
  if (cfg.smooth > 1) {
    cv::GaussianBlur(out, out, {cfg.smooth, cfg.smooth}, 0.0, 0.0, cv::BORDER_REFLECT_101);
  }
  return out;
}

}  // namespace sceneforge::transform
