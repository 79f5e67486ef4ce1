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

// Handle-based streaming surface for language bindings. A binding wraps
// these calls one-to-one and converts the rasters to host arrays; no pixel
// work happens here.

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "sceneforge/datagen.hpp"
#include "sceneforge/errors.hpp"

namespace sceneforge::bridge {

// Pull on a bounded stream past its last scene.
class StreamExhausted : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Any call on a closed handle.
class StreamClosed : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// One scene as plain rasters. Every raster is continuous, row-major,
// H x W x 3, 8-bit RGB.
struct Bundle {
  std::uint64_t index = 0;
  cv::Mat image;
  std::map<std::string, cv::Mat> masks;  // keyed S, MO, MP, Sema, C
  std::vector<std::array<int, 4>> boxes;  // x, y, w, h; empty unless boxes requested
  std::map<std::string, int> counts;
};

class StreamHandle {
 public:
  StreamHandle(const datagen::Json& config, std::optional<std::uint64_t> limit)
      : stream_(std::make_unique<datagen::SceneStream>(
            datagen::config_from_json(config.is_null() ? datagen::Json::object() : config), limit)) {}

  bool closed() const noexcept { return stream_ == nullptr; }

  std::string config_digest() const { return datagen::config_digest(live().config()); }
  std::uint64_t position() const { return live().position(); }

  Bundle next() {
    auto scene = live().next();
    if (!scene) throw StreamExhausted("stream exhausted");
    auto& b = scene->bundle;
    Bundle out;
    out.index = scene->index;
    out.image = contiguous(b.image);
    for (auto& [kind, m] : b.masks) out.masks[std::string(to_string(kind))] = contiguous(m);
    for (const auto& box : b.boxes) out.boxes.push_back({box.x, box.y, box.w, box.h});
    out.counts = b.counts;
    return out;
  }

  void update_params(const datagen::Json& partial) { live().update_params(partial); }

  void close() noexcept { stream_.reset(); }

 private:
  static cv::Mat contiguous(const cv::Mat& m) { return m.isContinuous() ? m : m.clone(); }

  datagen::SceneStream& live() const {
    if (!stream_) throw StreamClosed("stream handle is closed");
    return *stream_;
  }

  std::unique_ptr<datagen::SceneStream> stream_;
};

// Validates the mapping exactly like the command line does. Nothing is read
// from disk until the first next_bundle().
inline StreamHandle open_stream(const datagen::Json& config,
                                std::optional<std::uint64_t> limit = std::nullopt) {
  return StreamHandle(config, limit);
}

inline Bundle next_bundle(StreamHandle& h) { return h.next(); }

inline void update_params(StreamHandle& h, const datagen::Json& partial) { h.update_params(partial); }

inline void close(StreamHandle& h) noexcept { h.close(); }

}  // namespace sceneforge::bridge
