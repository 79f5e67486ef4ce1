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

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <opencv2/core.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "sceneforge/sceneforge.hpp"

namespace sceneforge::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kConfigError = 1, kIoError = 2 };

// Config field -> command-line flag, for error messages.
inline std::string flag_for(const std::string& field) {
  static const std::map<std::string, std::string> flags = {
      {"n_per_scene", "--n-per-scene"}, {"num_scenes", "--num-scenes"},
      {"input_kind", "--input-kind"},   {"outputs", "--outputs"},
      {"shrinkage", "--shrinkage"},     {"rotation", "--rotation"},
      {"flip_prob", "--flip-prob"},     {"salt", "--salt"},
      {"pepper", "--pepper"},           {"smooth", "--smooth"},
      {"perspective", "--perspective"}, {"noise", "--noise"},
      {"theta", "--theta"},             {"jobs", "--jobs"},
      {"output_dir", "--out"},          {"n", "--n"},
      {"m", "--masks"},                 {"p", "--packaging-overhead"},
      {"o", "--aux-overhead"},          {"overhead_const", "--overhead-const"},
      {"mean_h", "--mean-height"},      {"mean_w", "--mean-width"},
      {"reps", "--reps"},               {"mask kind", "--outputs"}};
  auto it = flags.find(field);
  return it == flags.end() ? field : it->second;
}

inline std::shared_ptr<spdlog::logger> logger() {
  static auto log = [] {
    auto l = spdlog::stderr_color_mt("sceneforge");
    const char* env = std::getenv("SCENEFORGE_LOG");
    l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return l;
  }();
  return log;
}

// Raw flag values; strings are parsed after CLI11 has run so errors can
// name the flag.
struct GeneratorFlags {
  datagen::GeneratorConfig cfg;
  std::string outputs = "S";
  std::string input_kind = "S";
  std::string input, backgrounds, out;
};

inline void add_generator_flags(CLI::App* app, GeneratorFlags& f) {
  auto& c = f.cfg;
  app->add_option("--input", f.input, "Input directory (<class>/images, <class>/masks) or JSON manifest");
  app->add_option("--backgrounds", f.backgrounds, "Directory of background images");
  app->add_option("--out", f.out, "Output directory");
  app->add_option("--num-scenes", c.num_scenes, "Number of scenes to write")->capture_default_str();
  app->add_option("--n-per-scene", c.n_per_scene, "Objects per scene")->capture_default_str();
  app->add_option("--input-kind", f.input_kind, "Input mask kind: S, MP or Sema")->capture_default_str();
  app->add_option("--outputs", f.outputs, "Output mask kinds, comma separated (S,MO,MP,Sema,C)")
      ->capture_default_str();
  app->add_flag("--boxes", c.emit_boxes, "Write bounding boxes");
  app->add_option("--shrinkage", c.transform.shrinkage, "Shrinkage ratio [0,1)")->capture_default_str();
  app->add_option("--rotation", c.transform.rotation, "Max rotation angle [0,180]")->capture_default_str();
  app->add_option("--flip-prob", c.transform.flip_prob, "Horizontal flip probability [0,1]")
      ->capture_default_str();
  app->add_option("--salt", c.transform.salt, "Per-pixel white probability [0,1]")->capture_default_str();
  app->add_option("--pepper", c.transform.pepper, "Per-pixel black probability [0,1]")
      ->capture_default_str();
  app->add_option("--smooth", c.transform.smooth, "Gaussian kernel size, odd")->capture_default_str();
  app->add_option("--perspective", c.transform.perspective, "Added width share before perspective [0,3]")
      ->capture_default_str();
  app->add_option("--noise", c.transform.noise, "Gaussian noise variance")->capture_default_str();
  app->add_option("--theta", c.theta, "Orientation coefficient (target width/height)")
      ->capture_default_str();
  app->add_flag("--same-class", c.same_class_scene, "Draw every object of a scene from one class");
  app->add_flag("--balance", c.balance_classes, "Pick classes uniformly before picking samples");
  app->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  app->add_option("--jobs", c.jobs, "Worker threads for generate")->capture_default_str();
}

inline datagen::GeneratorConfig finish(GeneratorFlags& f) {
  auto c = f.cfg;
  auto relabel = [](const ConfigError& e, const std::string& field) {
    const std::string msg = e.what();
    return ConfigError(field, e.field().empty() ? msg : msg.substr(e.field().size() + 2));
  };
  try {
    c.input_kind = parse_mask_kind(f.input_kind);
  } catch (const ConfigError& e) {
    throw relabel(e, "input_kind");
  }
  try {
    c.outputs = parse_mask_set(f.outputs);
  } catch (const ConfigError& e) {
    throw relabel(e, "outputs");
  }
  c.input_dir = f.input;
  c.background_dir = f.backgrounds;
  c.output_dir = f.out;
  c.validate();
  return c;
}

inline std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("ns", "not an integer: " + item);
    }
    if (out.back() < 1) throw ConfigError("ns", "object counts must be >= 1");
  }
  if (out.empty()) throw ConfigError("ns", "empty list");
  return out;
}

// Image and all masks side by side.
inline cv::Mat contact_sheet(const composer::SceneBundle& b) {
  std::vector<cv::Mat> tiles = {b.image};
  for (const auto& [kind, m] : b.masks) tiles.push_back(m);
  cv::Mat sheet;
  cv::hconcat(tiles, sheet);
  return sheet;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"sceneforge: composite training scenes from single-object image/mask pairs"};
  app.require_subcommand(1);

  GeneratorFlags gen_flags;
  auto* generate = app.add_subcommand("generate", "Write a dataset of scenes to disk");
  add_generator_flags(generate, gen_flags);

  GeneratorFlags preview_flags;
  std::uint64_t preview_index = 0;
  auto* preview = app.add_subcommand("preview", "Write one scene and a contact sheet");
  add_generator_flags(preview, preview_flags);
  preview->add_option("--scene", preview_index, "Scene index")->capture_default_str();

  GeneratorFlags bench_flags;
  std::string bench_ns = "1,2,4,8,16";
  int bench_reps = 5;
  auto* bench = app.add_subcommand("bench", "Time load/transform/save phases, CSV to stdout");
  add_generator_flags(bench, bench_flags);
  bench->add_option("--ns", bench_ns, "Objects per scene to time, comma separated")->capture_default_str();
  bench->add_option("--reps", bench_reps, "Scenes per measurement")->capture_default_str();

  datagen::MemoryModelParams mem;
  auto* estimate = app.add_subcommand("estimate-mem", "Average RAM per scene in bytes");
  estimate->add_option("--n", mem.n, "Objects per scene")->capture_default_str();
  estimate->add_option("--masks", mem.m, "Output masks (<= 5)")->capture_default_str();
  estimate->add_option("--packaging-overhead", mem.p, "Packaging overhead per object")->capture_default_str();
  estimate->add_option("--aux-overhead", mem.o, "Auxiliary storage overhead per object")
      ->capture_default_str();
  estimate->add_option("--overhead-const", mem.overhead_const, "Constant system overhead (bytes)")
      ->capture_default_str();
  estimate->add_option("--mean-height", mem.mean_h, "Mean object height (px)")->capture_default_str();
  estimate->add_option("--mean-width", mem.mean_w, "Mean object width (px)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*generate) {
      auto cfg = finish(gen_flags);
      if (gen_flags.input.empty()) throw ConfigError("--input", "is required");
      if (gen_flags.out.empty()) throw ConfigError("--out", "is required");
      const auto result = datagen::generate_offline(cfg);
      logger()->info("wrote {} scenes to {}", result.count, cfg.output_dir.string());
      out << result.count << " scenes written to " << cfg.output_dir.string() << "\n";
    } else if (*preview) {
      auto cfg = finish(preview_flags);
      if (preview_flags.input.empty()) throw ConfigError("--input", "is required");
      if (cfg.output_dir.empty()) {
        cfg.output_dir = fs::temp_directory_path() / ("sceneforge_preview_" + std::to_string(cfg.seed));
      }
      datagen::SceneGenerator gen(cfg);
      gen.open();
      const auto scene = gen.make(preview_index);
      const auto dir = datagen::write_scene(cfg.output_dir, scene, cfg.emit_boxes);
      io::write_file(dir / "contact_sheet.png", io::encode_png(contact_sheet(scene.bundle)));
      out << dir.string() << "\n";
    } else if (*bench) {
      auto cfg = finish(bench_flags);
      if (bench_flags.input.empty()) throw ConfigError("--input", "is required");
      datagen::BenchOptions opts;
      opts.base = cfg;
      opts.ns = parse_int_list(bench_ns);
      opts.reps = bench_reps;
      // The scratch dir is removed afterwards, so never hand over --out itself.
      if (!cfg.output_dir.empty()) opts.scratch = cfg.output_dir / "bench_scratch";
      const auto rows = datagen::run_benchmark(opts);
      out << datagen::bench_csv(rows);
    } else if (*estimate) {
      const double bytes = datagen::estimate_memory(mem);
      out << static_cast<long long>(std::ceil(bytes - 1e-6)) << "\n";
    }
  } catch (const ConfigError& e) {
    err << "error: " << flag_for(e.field()) << ": "
        << std::string(e.what()).substr(e.field().empty() ? 0 : e.field().size() + 2) << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kOk;
}

}  // namespace sceneforge::cli
