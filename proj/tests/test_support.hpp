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
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "sceneforge/sceneforge.hpp"

namespace sceneforge::testing {

namespace fs = std::filesystem;

// Removes the directory on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("sceneforge_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

// Mid-gray texture without pure black or white pixels.
inline cv::Mat textured_image(int w, int h, std::uint32_t seed) {
  cv::Mat img(h, w, CV_8UC3);
  std::mt19937 gen(seed);
  std::uniform_int_distribution<int> d(40, 215);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.at<cv::Vec3b>(y, x) = cv::Vec3b(static_cast<uchar>(d(gen)), static_cast<uchar>(d(gen)),
                                          static_cast<uchar>(d(gen)));
    }
  }
  return img;
}

// Filled ellipse touching all four image borders.
inline cv::Mat ellipse_mask(int w, int h, const cv::Scalar& color = cv::Scalar::all(255)) {
  cv::Mat mask(h, w, CV_8UC3, cv::Scalar::all(0));
  cv::ellipse(mask, cv::Point(w / 2, h / 2), cv::Size(std::max(1, (w - 1) / 2), std::max(1, (h - 1) / 2)),
              0, 0, 360, color, cv::FILLED, cv::LINE_8);
  return mask;
}

// Ellipse split into `parts` vertical bands, each its own color.
inline cv::Mat banded_mask(int w, int h, const std::vector<cv::Scalar>& colors) {
  cv::Mat solid = ellipse_mask(w, h);
  cv::Mat mask(h, w, CV_8UC3, cv::Scalar::all(0));
  const int parts = static_cast<int>(colors.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (solid.at<cv::Vec3b>(y, x)[0] == 0) continue;
      const int band = std::min(parts - 1, x * parts / w);
      const auto& c = colors[static_cast<std::size_t>(band)];
      mask.at<cv::Vec3b>(y, x) = cv::Vec3b(static_cast<uchar>(c[0]), static_cast<uchar>(c[1]),
                                           static_cast<uchar>(c[2]));
    }
  }
  return mask;
}

inline std::vector<cv::Scalar> part_palette(int parts, int offset = 0) {
  std::vector<cv::Scalar> out;
  for (int i = 0; i < parts; ++i) {
    const int v = 30 + 20 * (i + offset);
    out.emplace_back(v % 256, (v * 3) % 200 + 20, (v * 7) % 180 + 40);
  }
  return out;
}

inline ObjectSample single_object(int w, int h, const std::string& label, std::uint32_t seed) {
  return ObjectSample::create(textured_image(w, h, seed), ellipse_mask(w, h), label,
                              MaskKind::Single);
}

inline ObjectSample multipart_object(int w, int h, int parts, const std::string& label,
                                     std::uint32_t seed, int palette_offset = 0) {
  return ObjectSample::create(textured_image(w, h, seed),
                              banded_mask(w, h, part_palette(parts, palette_offset)), label,
                              MaskKind::MultiPart);
}

// Two semantic categories: left half one color, right half another.
inline ObjectSample semantic_object(int w, int h, const std::string& label, std::uint32_t seed) {
  return ObjectSample::create(
      textured_image(w, h, seed),
      banded_mask(w, h, {cv::Scalar(0, 200, 0), cv::Scalar(200, 60, 20)}), label,
      MaskKind::Semantic);
}

// Writes a <class>/images + <class>/masks corpus. Sizes cycle through
// [min_size, max_size].
inline void write_corpus(const fs::path& root, MaskKind kind, const std::vector<std::string>& classes,
                         int per_class, int min_size = 48, int max_size = 96) {
  int k = 0;
  for (const auto& cls : classes) {
    fs::create_directories(root / cls / "images");
    fs::create_directories(root / cls / "masks");
    for (int i = 0; i < per_class; ++i, ++k) {
      const int span = max_size - min_size + 1;
      const int w = min_size + (k * 37) % span;
      const int h = min_size + (k * 53 + 11) % span;
      ObjectSample s = kind == MaskKind::MultiPart ? multipart_object(w, h, 3 + k % 3, cls, 100 + k)
                       : kind == MaskKind::Semantic ? semantic_object(w, h, cls, 100 + k)
                                                    : single_object(w, h, cls, 100 + k);
      const std::string stem = cls + "_" + std::to_string(i);
      cv::Mat bgr, mbgr;
      cv::cvtColor(s.image(), bgr, cv::COLOR_RGB2BGR);
      cv::cvtColor(s.mask(), mbgr, cv::COLOR_RGB2BGR);
      cv::imwrite((root / cls / "images" / (stem + ".png")).string(), bgr);
      cv::imwrite((root / cls / "masks" / (stem + ".png")).string(), mbgr);
    }
  }
}

inline void write_backgrounds(const fs::path& dir, int count) {
  fs::create_directories(dir);
  for (int i = 0; i < count; ++i) {
    cv::Mat bg = textured_image(300 + 100 * i, 250 + 50 * i, 900 + i);
    cv::imwrite((dir / ("bg_" + std::to_string(i) + ".png")).string(), bg);
  }
}

// Pixel-scan helpers, independent of the library's own scanners.
inline std::size_t count_distinct_nonblack(const cv::Mat& m) {
  std::vector<std::uint32_t> seen;
  for (int y = 0; y < m.rows; ++y) {
    for (int x = 0; x < m.cols; ++x) {
      const auto& p = m.at<cv::Vec3b>(y, x);
      if (p[0] == 0 && p[1] == 0 && p[2] == 0) continue;
      seen.push_back((std::uint32_t{p[0]} << 16) | (std::uint32_t{p[1]} << 8) | p[2]);
    }
  }
  std::sort(seen.begin(), seen.end());
  return static_cast<std::size_t>(std::unique(seen.begin(), seen.end()) - seen.begin());
}

inline cv::Mat support(const cv::Mat& m) {
  cv::Mat s(m.size(), CV_8UC1, cv::Scalar(0));
  for (int y = 0; y < m.rows; ++y) {
    for (int x = 0; x < m.cols; ++x) {
      const auto& p = m.at<cv::Vec3b>(y, x);
      if (p[0] || p[1] || p[2]) s.at<uchar>(y, x) = 1;
    }
  }
  return s;
}

inline bool same_pixels(const cv::Mat& a, const cv::Mat& b) {
  if (a.size() != b.size() || a.type() != b.type()) return false;
  return cv::countNonZero(a.reshape(1) != b.reshape(1)) == 0;
}

}  // namespace sceneforge::testing
