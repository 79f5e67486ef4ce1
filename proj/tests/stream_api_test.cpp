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
#include <gtest/gtest.h>

#include <numeric>

#include "sceneforge/stream_api.hpp"
#include "test_support.hpp"

namespace sceneforge::bridge {
namespace {

namespace t = sceneforge::testing;
using datagen::Json;
namespace fs = std::filesystem;

struct Bridge : ::testing::Test {
  t::TempDir root{"bridge"};

  void SetUp() override {
    t::write_corpus(root / "in", MaskKind::Single, {"a", "b"}, 3);
    t::write_backgrounds(root / "bg", 2);
  }

  Json config(std::uint64_t seed = 7) const {
    return Json{{"input_dir", (root / "in").string()},
                {"background_dir", (root / "bg").string()},
                {"outputs", {"S", "MO", "C"}},
                {"emit_boxes", true},
                {"n_per_scene", 5},
                {"seed", seed}};
  }

  // Offline scenes for the same mapping.
  fs::path offline(const Json& cfg, const std::string& name, std::int64_t scenes) const {
    auto c = datagen::config_from_json(cfg);
    c.output_dir = root / name;
    c.num_scenes = scenes;
    datagen::generate_offline(c);
    return c.output_dir;
  }
};

bool equal_to_disk(const Bundle& b, const fs::path& dir) {
  if (!t::same_pixels(b.image, io::read_rgb(dir / "image.png"))) return false;
  for (const auto& [kind, m] : b.masks) {
    if (!t::same_pixels(m, io::read_rgb(dir / ("mask_" + kind + ".png")))) return false;
  }
  return true;
}

TEST_F(Bridge, DefaultsSeedSevenMatchesOfflineSceneZero) {
  const Json cfg = {{"input_dir", (root / "in").string()}, {"seed", 7}};
  const auto out = offline(cfg, "ref", 1);
  auto h = open_stream(cfg);
  EXPECT_TRUE(equal_to_disk(next_bundle(h), out / "scene_000000"));
}

TEST_F(Bridge, TenPullsMatchTenOfflineScenes) {
  const auto out = offline(config(), "ref10", 10);
  auto h = open_stream(config());
  for (std::uint64_t k = 0; k < 10; ++k) {
    const Bundle b = next_bundle(h);
    EXPECT_EQ(b.index, k);
    EXPECT_TRUE(equal_to_disk(b, out / datagen::scene_dir_name(k))) << "scene " << k;
  }
}

TEST_F(Bridge, BundleShapes) {
  auto h = open_stream(config());
  const Bundle b = next_bundle(h);
  EXPECT_TRUE(b.image.isContinuous());
  EXPECT_EQ(b.image.type(), CV_8UC3);
  ASSERT_EQ(b.masks.size(), 3u);
  for (const auto& [kind, m] : b.masks) {
    EXPECT_EQ(m.size(), b.image.size()) << kind;
    EXPECT_EQ(m.type(), CV_8UC3);
  }
  EXPECT_EQ(b.boxes.size(), 5u);
  int total = 0;
  for (const auto& [label, k] : b.counts) total += k;
  EXPECT_EQ(total, 5);
}

TEST_F(Bridge, UpdateTakesEffectAtNextScene) {
  Json shrunk = config();
  shrunk["shrinkage"] = 0.2;
  const auto base_out = offline(config(), "base", 4);
  const auto shrunk_out = offline(shrunk, "shrunk", 4);
  auto h = open_stream(config());
  EXPECT_TRUE(equal_to_disk(next_bundle(h), base_out / "scene_000000"));
  EXPECT_TRUE(equal_to_disk(next_bundle(h), base_out / "scene_000001"));
  update_params(h, Json{{"shrinkage", 0.2}});
  EXPECT_TRUE(equal_to_disk(next_bundle(h), shrunk_out / "scene_000002"));
  EXPECT_TRUE(equal_to_disk(next_bundle(h), shrunk_out / "scene_000003"));
}

TEST_F(Bridge, RejectedUpdateLeavesStreamRunning) {
  const auto out = offline(config(), "rej", 3);
  auto h = open_stream(config());
  EXPECT_TRUE(equal_to_disk(next_bundle(h), out / "scene_000000"));
  EXPECT_THROW(update_params(h, Json{{"seed", 8}}), ConfigError);
  EXPECT_THROW(update_params(h, Json{{"input_dir", "/elsewhere"}}), ConfigError);
  EXPECT_TRUE(equal_to_disk(next_bundle(h), out / "scene_000001"));
  update_params(h, Json::object());
  update_params(h, Json{{"shrinkage", 0.0}});
  EXPECT_TRUE(equal_to_disk(next_bundle(h), out / "scene_000002"));
}

TEST(StreamApi, ValidatesLikeTheCommandLine) {
  try {
    open_stream(Json{{"shrinkage", 1.5}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "shrinkage");
    EXPECT_NE(std::string(e.what()).find("[0,1)"), std::string::npos);
  }
  EXPECT_THROW(open_stream(Json{{"no_such_key", 1}}), ConfigError);
}

TEST(StreamApi, OpenAndCloseWithoutPulling) {
  auto h = open_stream(Json{{"input_dir", "/nonexistent/sceneforge"}});
  EXPECT_EQ(h.position(), 0u);
  EXPECT_FALSE(h.closed());
  close(h);
  EXPECT_TRUE(h.closed());
  EXPECT_THROW(next_bundle(h), StreamClosed);
  EXPECT_THROW(update_params(h, Json{{"noise", 1.0}}), StreamClosed);
}

TEST_F(Bridge, BoundedStreamRunsOut) {
  auto h = open_stream(config(), 2);
  next_bundle(h);
  next_bundle(h);
  EXPECT_THROW(next_bundle(h), StreamExhausted);
}

TEST_F(Bridge, DigestMatchesOfflineManifest) {
  const auto out = offline(config(), "digest", 1);
  const auto manifest = Json::parse(io::read_text(out / "manifest.json"));
  auto h = open_stream(config());
  EXPECT_EQ(h.config_digest(), manifest["config_digest"].get<std::string>());
}

}  // namespace
}  // namespace sceneforge::bridge
