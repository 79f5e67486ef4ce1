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

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "sceneforge_cli.hpp"
#include "test_support.hpp"

namespace sceneforge::cli {
namespace {

namespace t = sceneforge::testing;

struct Result {
  int code;
  std::string out, err;
};

Result run_args(std::vector<std::string> args) {
  args.insert(args.begin(), "sceneforge");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Runs the built binary; returns its exit status and stdout.
std::pair<int, std::string> run_binary(const std::string& args) {
  const std::string cmd = std::string(SCENEFORGE_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  std::string out;
  char buf[256];
  while (pipe && std::fgets(buf, sizeof buf, pipe)) out += buf;
  const int status = pipe ? ::pclose(pipe) : -1;
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(EstimateMem, DefaultsAndZero) {
  auto r = run_args({"estimate-mem", "--n", "0", "--overhead-const", "0"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "0\n");
  r = run_args({"estimate-mem", "--n", "4", "--masks", "1", "--packaging-overhead", "1",
                "--aux-overhead", "0", "--mean-height", "100", "--mean-width", "100"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "480000\n");
  r = run_args({"estimate-mem", "--n", "2", "--masks", "3", "--packaging-overhead", "1",
                "--aux-overhead", "2", "--mean-height", "100", "--mean-width", "100"});
  EXPECT_EQ(r.out, "480000\n");
}

TEST(EstimateMem, RejectsTooManyMasks) {
  const auto r = run_args({"estimate-mem", "--masks", "7"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--masks"), std::string::npos);
}

TEST(Errors, OutOfRangeNamesFlagAndRange) {
  const auto r = run_args({"generate", "--input", "x", "--out", "y", "--shrinkage", "1.5"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--shrinkage"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("[0,1)"), std::string::npos) << r.err;
}

TEST(Errors, BadMaskNames) {
  auto r = run_args({"generate", "--input", "x", "--out", "y", "--outputs", "S,XX"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--outputs"), std::string::npos) << r.err;
  r = run_args({"generate", "--input", "x", "--out", "y", "--input-kind", "MO"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--input-kind"), std::string::npos) << r.err;
  r = run_args({"generate", "--input", "x", "--out", "y", "--outputs", "MP"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("--outputs"), std::string::npos) << r.err;
}

TEST(Errors, UnknownFlagAndMissingSubcommand) {
  EXPECT_EQ(run_args({"generate", "--frobnicate"}).code, 1);
  EXPECT_EQ(run_args({}).code, 1);
  EXPECT_EQ(run_args({"--help"}).code, 0);
}

TEST(Errors, MissingInputDirectoryIsIoError) {
  t::TempDir out("cli_missing");
  const auto r = run_args({"generate", "--input", "/nonexistent/sceneforge", "--out",
                           out.path().string(), "--num-scenes", "1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/nonexistent/sceneforge"), std::string::npos);
}

TEST(Generate, WritesScenesAndIsReproducible) {
  t::TempDir root("cli_gen");
  t::write_corpus(root / "in", MaskKind::MultiPart, {"a", "b"}, 3);
  t::write_backgrounds(root / "bg", 1);
  const std::vector<std::string> common = {
      "generate", "--input", (root / "in").string(), "--backgrounds", (root / "bg").string(),
      "--num-scenes", "3", "--n-per-scene", "4", "--input-kind", "MP", "--outputs", "S,MO,MP,C",
      "--boxes", "--shrinkage", "0.2", "--seed", "7"};
  auto first = common;
  first.insert(first.end(), {"--out", (root / "o1").string()});
  auto second = common;
  second.insert(second.end(), {"--out", (root / "o2").string(), "--jobs", "2"});
  ASSERT_EQ(run_args(first).code, 0);
  ASSERT_EQ(run_args(second).code, 0);
  for (int k = 0; k < 3; ++k) {
    const std::string dir = datagen::scene_dir_name(static_cast<std::uint64_t>(k));
    for (const char* f : {"image.png", "mask_S.png", "mask_MO.png", "mask_MP.png", "mask_C.png",
                          "annotations.json"}) {
      ASSERT_TRUE(fs::exists(root / "o1" / dir / f)) << dir << "/" << f;
      EXPECT_EQ(slurp(root / "o1" / dir / f), slurp(root / "o2" / dir / f)) << dir << "/" << f;
    }
  }
  const auto manifest = datagen::Json::parse(slurp(root / "o1" / "manifest.json"));
  EXPECT_EQ(manifest["config"]["shrinkage"], 0.2);
  EXPECT_EQ(manifest["config"]["outputs"], datagen::Json({"S", "MO", "MP", "C"}));
}

TEST(Generate, DefaultsMatchLibraryDefaults) {
  t::TempDir root("cli_defaults");
  t::write_corpus(root / "in", MaskKind::Single, {"a"}, 2);
  ASSERT_EQ(run_args({"generate", "--input", (root / "in").string(), "--out", (root / "o").string(),
                      "--num-scenes", "1"})
                .code,
            0);
  const auto manifest = datagen::Json::parse(slurp(root / "o" / "manifest.json"));
  datagen::GeneratorConfig expected;
  expected.num_scenes = 1;
  EXPECT_EQ(manifest["config_digest"], datagen::config_digest(expected));
}

TEST(Preview, WritesContactSheet) {
  t::TempDir root("cli_preview");
  t::write_corpus(root / "in", MaskKind::Single, {"a"}, 2);
  const auto r = run_args({"preview", "--input", (root / "in").string(), "--out",
                           (root / "p").string(), "--outputs", "S,MO", "--scene", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const fs::path dir = root / "p" / "scene_000003";
  EXPECT_EQ(r.out, dir.string() + "\n");
  const cv::Mat sheet = io::read_rgb(dir / "contact_sheet.png");
  const cv::Mat image = io::read_rgb(dir / "image.png");
  EXPECT_EQ(sheet.cols, 3 * image.cols);
  EXPECT_EQ(sheet.rows, image.rows);
}

TEST(Bench, PrintsCsvAndKeepsOutDir) {
  t::TempDir root("cli_bench");
  t::write_corpus(root / "in", MaskKind::Single, {"a"}, 2);
  fs::create_directories(root / "keep");
  io::write_file(root / "keep" / "marker.txt", std::string("x"));
  const auto r = run_args({"bench", "--input", (root / "in").string(), "--out",
                           (root / "keep").string(), "--ns", "1,2", "--reps", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 7);
  EXPECT_TRUE(fs::exists(root / "keep" / "marker.txt"));
  EXPECT_EQ(run_args({"bench", "--input", "x", "--ns", "1,zero"}).code, 1);
}

TEST(Binary, ExitCodes) {
  EXPECT_EQ(run_binary("estimate-mem --n 0 --overhead-const 0"), std::make_pair(0, std::string("0\n")));
  EXPECT_EQ(run_binary("generate --input x --out y --shrinkage 1.5").first, 1);
  EXPECT_EQ(run_binary("generate --bogus").first, 1);
  EXPECT_EQ(run_binary("generate --input /nonexistent/sceneforge --out /tmp/sceneforge_never").first, 2);
}

}  // namespace
}  // namespace sceneforge::cli
