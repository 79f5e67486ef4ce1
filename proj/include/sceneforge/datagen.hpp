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
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <tuple>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>
#include <opencv2/core.hpp>

#include "sceneforge/composer.hpp"
#include "sceneforge/core.hpp"
#include "sceneforge/errors.hpp"
#include "sceneforge/io.hpp"
#include "sceneforge/rng.hpp"
#include "sceneforge/transform.hpp"

namespace sceneforge::datagen {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Everything that determines a generated dataset. The seed plus the
// generation fields fully determine every scene.
struct GeneratorConfig {
  std::int64_t n_per_scene = 9;
  std::int64_t num_scenes = 250;
  bool same_class_scene = false;
  bool balance_classes = false;
  MaskKind input_kind = MaskKind::Single;
  MaskSet outputs = {MaskKind::Single};
  bool emit_boxes = false;
  transform::TransformConfig transform;
  double theta = 1.2;
  std::uint64_t seed = 0;
  fs::path input_dir;
  fs::path background_dir;
  fs::path output_dir;
  int jobs = 1;

  void validate() const {
    if (n_per_scene < 1) throw ConfigError("n_per_scene", sceneforge::detail::range_message(n_per_scene, "[1,inf)"));
    if (num_scenes < 1) throw ConfigError("num_scenes", sceneforge::detail::range_message(num_scenes, "[1,inf)"));
    if (jobs < 1) throw ConfigError("jobs", sceneforge::detail::range_message(jobs, "[1,inf)"));
    transform.validate();
    packing::OrientationParams{theta}.validate();
    if (outputs.empty()) throw ConfigError("outputs", "at least one output mask kind is required");
    if (!is_input_kind(input_kind)) {
      throw ConfigError("input_kind", "must be one of S, MP, Sema");
    }
    const MaskSet allowed = allowed_outputs(input_kind, true);
    for (MaskKind k : outputs) {
      if (!allowed.contains(k)) {
        throw ConfigError("outputs", std::string("mask kind ") + std::string(to_string(k)) +
                                         " cannot be produced from input kind " +
                                         std::string(to_string(input_kind)) + " (allowed: " +
                                         to_string(allowed) + ")");
      }
    }
  }

  composer::ComposeOptions compose_options() const {
    return {transform, {theta}, outputs, emit_boxes};
  }
};

// Fields that affect pixels or annotations, in a fixed order.
inline Json generation_json(const GeneratorConfig& c) {
  Json j;
  j["n_per_scene"] = c.n_per_scene;
  j["same_class_scene"] = c.same_class_scene;
  j["balance_classes"] = c.balance_classes;
  j["input_kind"] = std::string(to_string(c.input_kind));
  Json outs = Json::array();
  for (MaskKind k : c.outputs) outs.push_back(std::string(to_string(k)));
  j["outputs"] = outs;
  j["emit_boxes"] = c.emit_boxes;
  j["shrinkage"] = c.transform.shrinkage;
  j["rotation"] = c.transform.rotation;
  j["flip_prob"] = c.transform.flip_prob;
  j["salt"] = c.transform.salt;
  j["pepper"] = c.transform.pepper;
  j["smooth"] = c.transform.smooth;
  j["perspective"] = c.transform.perspective;
  j["noise"] = c.transform.noise;
  j["theta"] = c.theta;
  j["seed"] = c.seed;
  return j;
}

inline Json to_json(const GeneratorConfig& c) {
  Json j = generation_json(c);
  j["num_scenes"] = c.num_scenes;
  j["input_dir"] = c.input_dir.generic_string();
  j["background_dir"] = c.background_dir.generic_string();
  j["output_dir"] = c.output_dir.generic_string();
  j["jobs"] = c.jobs;
  return j;
}

// Hex digest of the generation fields; paths and worker count excluded.
inline std::string config_digest(const GeneratorConfig& c) {
  const std::string text = generation_json(c).dump();
  return io::hex64(io::fnv1a(text.data(), text.size()));
}

namespace detail {

template <typename T>
T json_get(const Json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(key, "has the wrong type");
  }
}

inline bool is_transform_key(const std::string& key) {
  static const std::set<std::string> keys = {"shrinkage", "rotation", "flip_prob", "salt",
                                             "pepper",    "smooth",   "perspective", "noise",
                                             "theta"};
  return keys.contains(key);
}

inline void apply_key(GeneratorConfig& c, const std::string& key, const Json& v) {
  if (key == "n_per_scene") c.n_per_scene = json_get<std::int64_t>(v, key);
  else if (key == "num_scenes") c.num_scenes = json_get<std::int64_t>(v, key);
  else if (key == "same_class_scene") c.same_class_scene = json_get<bool>(v, key);
  else if (key == "balance_classes") c.balance_classes = json_get<bool>(v, key);
  else if (key == "input_kind") c.input_kind = parse_mask_kind(json_get<std::string>(v, key));
  else if (key == "outputs") {
    c.outputs.clear();
    if (v.is_string()) {
      c.outputs = parse_mask_set(v.get<std::string>());
    } else {
      for (const auto& item : json_get<std::vector<std::string>>(v, key)) {
        c.outputs.insert(parse_mask_kind(item));
      }
    }
  }
  else if (key == "emit_boxes") c.emit_boxes = json_get<bool>(v, key);
  else if (key == "shrinkage") c.transform.shrinkage = json_get<double>(v, key);
  else if (key == "rotation") c.transform.rotation = json_get<double>(v, key);
  else if (key == "flip_prob") c.transform.flip_prob = json_get<double>(v, key);
  else if (key == "salt") c.transform.salt = json_get<double>(v, key);
  else if (key == "pepper") c.transform.pepper = json_get<double>(v, key);
  else if (key == "smooth") c.transform.smooth = json_get<int>(v, key);
  else if (key == "perspective") c.transform.perspective = json_get<double>(v, key);
  else if (key == "noise") c.transform.noise = json_get<double>(v, key);
  else if (key == "theta") c.theta = json_get<double>(v, key);
  else if (key == "seed") c.seed = json_get<std::uint64_t>(v, key);
  else if (key == "input_dir") c.input_dir = json_get<std::string>(v, key);
  else if (key == "background_dir") c.background_dir = json_get<std::string>(v, key);
  else if (key == "output_dir") c.output_dir = json_get<std::string>(v, key);
  else if (key == "jobs") c.jobs = json_get<int>(v, key);
  else throw ConfigError(key, "unknown configuration key");
}

}  // namespace detail

// Builds a validated config from a flat key/value mapping. Unknown keys are
// rejected; missing keys keep the values of `base`.
inline GeneratorConfig config_from_json(const Json& mapping, GeneratorConfig base = {}) {
  if (!mapping.is_object()) throw ConfigError("", "configuration must be a JSON object");
  for (const auto& [key, value] : mapping.items()) detail::apply_key(base, key, value);
  base.validate();
  return base;
}

// ---------------------------------------------------------------------------
// Catalog

struct CatalogEntry {
  std::string class_label;
  fs::path image;
  fs::path mask;
  std::shared_ptr<const ObjectSample> sample;  // set for in-memory catalogs
};

inline bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) {
    return static_cast<char>(std::tolower(ch));
  });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" || ext == ".tif" ||
         ext == ".tiff";
}

inline std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> out;
  std::error_code ec;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec)) {
    if (it->is_regular_file() && is_image_file(it->path())) out.push_back(it->path());
  }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(out.begin(), out.end());
  return out;
}

// Input objects grouped by class. Entries are kept sorted by image path so
// draws do not depend on directory enumeration order.
class Catalog {
 public:
  // <root>/<class>/images/<stem>.* paired with <root>/<class>/masks/<stem>.*
  static Catalog from_directory(const fs::path& root) {
    if (!fs::is_directory(root)) throw IoError("input directory not found: " + root.string());
    Catalog cat;
    std::vector<fs::path> class_dirs;
    for (const auto& e : fs::directory_iterator(root)) {
      if (e.is_directory()) class_dirs.push_back(e.path());
    }
    std::sort(class_dirs.begin(), class_dirs.end());
    for (const auto& dir : class_dirs) {
      const fs::path images = dir / "images";
      const fs::path masks = dir / "masks";
      if (!fs::is_directory(images)) continue;
      std::map<std::string, fs::path> by_stem;
      if (fs::is_directory(masks)) {
        for (const auto& m : list_images(masks)) by_stem.emplace(m.stem().string(), m);
      }
      for (const auto& img : list_images(images)) {
        auto it = by_stem.find(img.stem().string());
        if (it == by_stem.end()) {
          throw InputError("no mask for " + img.string() + " (expected " +
                           (masks / img.stem()).string() + ".*)");
        }
        cat.entries_.push_back({dir.filename().string(), img, it->second, nullptr});
      }
    }
    cat.finalize();
    return cat;
  }

  // JSON file: {"samples": [{"image": ..., "mask": ..., "class": ...}]}.
  // Relative paths resolve against the file's directory.
  static Catalog from_manifest(const fs::path& file) {
    Json j;
    try {
      j = Json::parse(io::read_text(file));
    } catch (const nlohmann::json::exception& e) {
      throw InputError("cannot parse input manifest " + file.string() + ": " + e.what());
    }
    Catalog cat;
    const fs::path base = file.parent_path();
    if (!j.contains("samples") || !j["samples"].is_array()) {
      throw InputError("input manifest " + file.string() + " has no 'samples' array");
    }
    for (const auto& s : j["samples"]) {
      if (!s.contains("image") || !s.contains("mask") || !s.contains("class")) {
        throw InputError("input manifest entry needs image, mask and class: " + s.dump());
      }
      auto resolve = [&base](const std::string& p) {
        const fs::path path(p);
        return path.is_absolute() ? path : base / path;
      };
      cat.entries_.push_back({s["class"].get<std::string>(),
                              resolve(s["image"].get<std::string>()),
                              resolve(s["mask"].get<std::string>()), nullptr});
    }
    cat.finalize();
    return cat;
  }

  static Catalog open(const fs::path& input) {
    if (fs::is_regular_file(input) && input.extension() == ".json") return from_manifest(input);
    return from_directory(input);
  }

  // In-memory catalog; entry order is the given order.
  static Catalog from_samples(std::vector<ObjectSample> samples) {
    Catalog cat;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      auto ptr = std::make_shared<const ObjectSample>(std::move(samples[i]));
      std::string label = ptr->class_label();
      cat.entries_.push_back({std::move(label), "memory:" + std::to_string(i), {}, std::move(ptr)});
    }
    cat.finalize(false);
    return cat;
  }

  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<CatalogEntry>& entries() const noexcept { return entries_; }
  const std::vector<std::string>& classes() const noexcept { return classes_; }
  const std::vector<std::size_t>& members(std::size_t class_index) const {
    return members_.at(class_index);
  }

  ObjectSample load(std::size_t index, MaskKind kind) const {
    const auto& e = entries_.at(index);
    if (e.sample) return *e.sample;
    try {
      return ObjectSample::create(io::read_rgb(e.image), io::read_rgb(e.mask), e.class_label, kind);
    } catch (const InputError& err) {
      throw InputError(e.image.string() + " / " + e.mask.string() + ": " + err.what());
    }
  }

 private:
  void finalize(bool sort_entries = true) {
    if (entries_.empty()) throw InputError("input catalog is empty");
    if (sort_entries) {
      std::sort(entries_.begin(), entries_.end(),
                [](const CatalogEntry& a, const CatalogEntry& b) {
                  return std::tie(a.image, a.mask, a.class_label) <
                         std::tie(b.image, b.mask, b.class_label);
                });
    }
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < entries_.size(); ++i) groups[entries_[i].class_label].push_back(i);
    for (auto& [label, idx] : groups) {
      classes_.push_back(label);
      members_.push_back(std::move(idx));
    }
  }

  std::vector<CatalogEntry> entries_;
  std::vector<std::string> classes_;
  std::vector<std::vector<std::size_t>> members_;
};

// Draws n_per_scene catalog indices with replacement. With balancing each
// draw first picks a class uniformly; with same-class scenes one class is
// picked uniformly for the whole scene.
inline std::vector<std::size_t> select_indices(const Catalog& catalog, const GeneratorConfig& cfg,
                                               Rng& rng) {
  if (catalog.size() == 0) throw InputError("input catalog is empty");
  const auto n = static_cast<std::size_t>(cfg.n_per_scene);
  std::vector<std::size_t> out;
  out.reserve(n);
  if (cfg.same_class_scene) {
    const auto& pool = catalog.members(rng.below(catalog.classes().size()));
    for (std::size_t i = 0; i < n; ++i) out.push_back(pool[rng.below(pool.size())]);
  } else if (cfg.balance_classes) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& pool = catalog.members(rng.below(catalog.classes().size()));
      out.push_back(pool[rng.below(pool.size())]);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) out.push_back(rng.below(catalog.size()));
  }
  return out;
}

inline std::vector<ObjectSample> select_samples(const Catalog& catalog, const GeneratorConfig& cfg,
                                                Rng& rng) {
  std::vector<ObjectSample> out;
  for (std::size_t i : select_indices(catalog, cfg, rng)) {
    out.push_back(catalog.load(i, cfg.input_kind));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scene generation

struct PhaseTimes {
  double load_ms = 0.0;
  double transform_ms = 0.0;
  double save_ms = 0.0;
};

struct Scene {
  std::uint64_t index = 0;
  std::string config_digest;
  composer::SceneBundle bundle;
};

inline std::string scene_dir_name(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "scene_%06llu", static_cast<unsigned long long>(index));
  return buf;
}

inline Json annotations_json(const Scene& scene, bool emit_boxes) {
  const auto& b = scene.bundle;
  Json j;
  j["scene"] = {{"width", b.width()}, {"height", b.height()}};
  Json objects = Json::array();
  for (std::size_t i = 0; i < b.registry.size(); ++i) {
    const auto& rec = b.registry[i];
    Json o;
    o["id"] = i;
    o["class"] = rec.class_label;
    if (emit_boxes && i < b.boxes.size()) {
      const auto& box = b.boxes[i];
      o["bbox"] = {box.x, box.y, box.w, box.h};
    }
    o["mo_color"] = {rec.mo_color.r, rec.mo_color.g, rec.mo_color.b};
    o["occluded"] = rec.occluded;
    objects.push_back(std::move(o));
  }
  j["objects"] = std::move(objects);
  Json counts = Json::object();
  for (const auto& [label, k] : b.counts) counts[label] = k;
  j["counts"] = std::move(counts);
  j["config_digest"] = scene.config_digest;
  return j;
}

// File name -> encoded bytes for one scene directory.
inline std::map<std::string, io::Bytes> encode_scene(const Scene& scene, bool emit_boxes) {
  std::map<std::string, io::Bytes> files;
  files["image.png"] = io::encode_png(scene.bundle.image);
  for (const auto& [kind, mask] : scene.bundle.masks) {
    files["mask_" + std::string(to_string(kind)) + ".png"] = io::encode_png(mask);
  }
  const std::string text = annotations_json(scene, emit_boxes).dump(2) + "\n";
  files["annotations.json"] = io::Bytes(text.begin(), text.end());
  return files;
}

inline fs::path write_scene(const fs::path& out_root, const Scene& scene, bool emit_boxes) {
  const fs::path dir = out_root / scene_dir_name(scene.index);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& [name, bytes] : encode_scene(scene, emit_boxes)) io::write_file(dir / name, bytes);
  return dir;
}

// Produces scene k of a configuration. Scene k uses its own child seed, so
// any subset of scenes can be produced in any order or in parallel.
class SceneGenerator {
 public:
  explicit SceneGenerator(GeneratorConfig cfg, std::shared_ptr<const Catalog> catalog = nullptr)
      : cfg_(std::move(cfg)), catalog_(std::move(catalog)) {
    cfg_.validate();
  }

  const GeneratorConfig& config() const noexcept { return cfg_; }
  bool is_open() const noexcept { return catalog_ != nullptr && backgrounds_listed_; }

  // Lists the catalog and backgrounds. Decodes no images.
  void open() {
    if (!catalog_) catalog_ = std::make_shared<const Catalog>(Catalog::open(cfg_.input_dir));
    if (!backgrounds_listed_) {
      if (!cfg_.background_dir.empty()) {
        if (!fs::is_directory(cfg_.background_dir)) {
          throw IoError("background directory not found: " + cfg_.background_dir.string());
        }
        backgrounds_ = list_images(cfg_.background_dir);
      }
      backgrounds_listed_ = true;
    }
  }

  // Replaces the transform-level settings; takes effect at the next scene.
  void set_transform(const transform::TransformConfig& t, double theta) {
    GeneratorConfig next = cfg_;
    next.transform = t;
    next.theta = theta;
    next.validate();
    cfg_ = std::move(next);
  }

  const Catalog& catalog() const {
    if (!catalog_) throw std::logic_error("SceneGenerator::open() has not been called");
    return *catalog_;
  }

  Scene make(std::uint64_t index, PhaseTimes* times = nullptr) const {
    if (!is_open()) throw std::logic_error("SceneGenerator::open() has not been called");
    using Clock = std::chrono::steady_clock;
    auto ms = [](Clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); };

    Rng rng(child_seed(cfg_.seed, index));
    const auto t0 = Clock::now();
    std::vector<ObjectSample> samples;
    for (std::size_t i : select_indices(*catalog_, cfg_, rng)) {
      samples.push_back(catalog_->load(i, cfg_.input_kind));
    }
    std::optional<cv::Mat> background;
    if (!backgrounds_.empty()) {
      background = io::read_rgb(backgrounds_[rng.below(backgrounds_.size())]);
    }
    const auto t1 = Clock::now();
    Scene scene{index, config_digest(cfg_),
                composer::compose(samples, cfg_.compose_options(), background, rng)};
    const auto t2 = Clock::now();
    if (times) {
      times->load_ms += ms(t1 - t0);
      times->transform_ms += ms(t2 - t1);
    }
    return scene;
  }

 private:
  GeneratorConfig cfg_;
  std::shared_ptr<const Catalog> catalog_;
  std::vector<fs::path> backgrounds_;
  bool backgrounds_listed_ = false;
};

struct OfflineResult {
  std::size_t count = 0;
  std::vector<fs::path> scenes;
  fs::path manifest;
};

// Writes num_scenes scene directories and out/manifest.json. Output does
// not depend on `jobs`.
inline OfflineResult generate_offline(const GeneratorConfig& cfg,
                                      std::shared_ptr<const Catalog> catalog = nullptr) {
  SceneGenerator gen(cfg, std::move(catalog));
  gen.open();
  if (cfg.output_dir.empty()) throw ConfigError("output_dir", "an output directory is required");
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw IoError("cannot create " + cfg.output_dir.string() + ": " + ec.message());

  const auto total = static_cast<std::uint64_t>(cfg.num_scenes);
  std::atomic<std::uint64_t> next{0};
  std::mutex err_mu;
  std::optional<std::uint64_t> failed_index;
  std::string failed_what;
  bool failed_io = false;

  auto worker = [&] {
    for (;;) {
      const std::uint64_t k = next.fetch_add(1);
      if (k >= total) return;
      try {
        write_scene(cfg.output_dir, gen.make(k), cfg.emit_boxes);
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mu);
        if (!failed_index || k < *failed_index) {
          failed_index = k;
          failed_what = e.what();
          failed_io = dynamic_cast<const IoError*>(&e) != nullptr;
        }
        next.store(total);
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(total)));
  std::vector<std::thread> pool;
  for (int i = 1; i < jobs; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failed_index) {
    const std::string msg = "scene " + std::to_string(*failed_index) + ": " + failed_what;
    if (failed_io) throw IoError(msg);
    throw InputError(msg);
  }

  OfflineResult result;
  Json manifest;
  manifest["seed"] = cfg.seed;
  manifest["num_scenes"] = cfg.num_scenes;
  manifest["config_digest"] = config_digest(cfg);
  manifest["config"] = to_json(cfg);
  Json scenes = Json::array();
  for (std::uint64_t k = 0; k < total; ++k) {
    scenes.push_back(scene_dir_name(k));
    result.scenes.push_back(cfg.output_dir / scene_dir_name(k));
  }
  manifest["scenes"] = std::move(scenes);
  result.manifest = cfg.output_dir / "manifest.json";
  io::write_file(result.manifest, manifest.dump(2) + "\n");
  result.count = static_cast<std::size_t>(total);
  return result;
}

// Pull-based scene sequence. Scene k equals offline scene k for the same
// configuration. Nothing is listed or decoded before the first pull.
class SceneStream {
 public:
  explicit SceneStream(GeneratorConfig cfg, std::optional<std::uint64_t> limit = std::nullopt,
                       std::shared_ptr<const Catalog> catalog = nullptr)
      : gen_(std::move(cfg), std::move(catalog)), limit_(limit) {}

  std::optional<Scene> next() {
    if (limit_ && position_ >= *limit_) return std::nullopt;
    if (!gen_.is_open()) gen_.open();
    Scene s = gen_.make(position_);
    ++position_;
    return s;
  }

  // Index of the next scene to be produced.
  std::uint64_t position() const noexcept { return position_; }
  const GeneratorConfig& config() const noexcept { return gen_.config(); }

  void update_transform(const transform::TransformConfig& t, std::optional<double> theta = {}) {
    gen_.set_transform(t, theta.value_or(gen_.config().theta));
  }

  // Partial update from a key/value mapping; only transform-level keys are
  // accepted. On error the stream keeps its previous settings.
  void update_params(const Json& partial) {
    if (!partial.is_object()) throw ConfigError("", "update must be a JSON object");
    GeneratorConfig next = gen_.config();
    for (const auto& [key, value] : partial.items()) {
      if (!detail::is_transform_key(key)) {
        throw ConfigError(key, "cannot be changed on a running stream");
      }
      detail::apply_key(next, key, value);
    }
    gen_.set_transform(next.transform, next.theta);
  }

 private:
  SceneGenerator gen_;
  std::optional<std::uint64_t> limit_;
  std::uint64_t position_ = 0;
};

// ---------------------------------------------------------------------------
// Memory model

struct MemoryModelParams {
  double n = 9;                 // objects per scene
  double m = 1;                 // output masks, <= 5
  double p = 1.1;               // packaging overhead per object
  double o = 0.1;               // auxiliary storage overhead per object
  double overhead_const = 0.0;  // constant system overhead, bytes
  double mean_h = 385;          // mean object height, px
  double mean_w = 390;          // mean object width, px

  void validate() const {
    const std::pair<const char*, double> fields[] = {
        {"n", n}, {"m", m}, {"p", p}, {"o", o}, {"overhead_const", overhead_const},
        {"mean_h", mean_h}, {"mean_w", mean_w}};
    for (const auto& [name, v] : fields) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ConfigError(name, sceneforge::detail::range_message(v, "[0,inf)"));
      }
    }
    if (m > 5.0) throw ConfigError("m", sceneforge::detail::range_message(m, "[0,5]"));
  }
};

// Average bytes per scene: 3 n h w [(1 + m) p + o + 2] + constant.
inline double estimate_memory(const MemoryModelParams& q) {
  q.validate();
  return 3.0 * q.n * q.mean_h * q.mean_w * ((1.0 + q.m) * q.p + q.o + 2.0) + q.overhead_const;
}

// ---------------------------------------------------------------------------
// Timing benchmark

struct BenchRow {
  int n = 0;
  std::string variant;   // augmentor variant, i.e. input mask kind
  std::string features;  // SA, NA or NMA
  double load_ms = 0.0;
  double transform_ms = 0.0;
  double save_ms = 0.0;

  double total_ms() const noexcept { return load_ms + transform_ms + save_ms; }
  // Time a streaming consumer sees: nothing is written.
  double streaming_ms() const noexcept { return load_ms + transform_ms; }
};

inline const std::vector<std::string>& feature_sets() {
  static const std::vector<std::string> sets = {"SA", "NA", "NMA"};
  return sets;
}

// SA: one mask kind. NA: plus noise and smoothing. NMA: plus boxes and
// every mask kind the input supports.
inline GeneratorConfig with_features(GeneratorConfig cfg, const std::string& features) {
  cfg.outputs = {MaskKind::Single};
  cfg.emit_boxes = false;
  if (features == "SA") {
    cfg.transform.noise = 0.0;
    cfg.transform.smooth = 1;
    cfg.transform.salt = 0.0;
    cfg.transform.pepper = 0.0;
    return cfg;
  }
  if (cfg.transform.noise <= 0.0) cfg.transform.noise = 100.0;
  if (cfg.transform.smooth <= 1) cfg.transform.smooth = 5;
  if (features == "NA") return cfg;
  if (features != "NMA") throw ConfigError("features", "expected SA, NA or NMA");
  cfg.emit_boxes = true;
  cfg.outputs = allowed_outputs(cfg.input_kind, true);
  return cfg;
}

struct BenchOptions {
  GeneratorConfig base;
  std::vector<int> ns = {1, 2, 4, 8, 16};
  int reps = 5;
  fs::path scratch;  // save-phase target; a temp dir when empty
};

// Mean per-scene phase times for every (n, feature set). All feature sets
// reuse the same scene indices, so they time identical object draws. The
// sets are interleaved rep by rep so machine drift hits them alike.
inline std::vector<BenchRow> run_benchmark(const BenchOptions& opts,
                                           std::shared_ptr<const Catalog> catalog = nullptr) {
  if (opts.reps < 1) throw ConfigError("reps", "must be >= 1");
  const fs::path scratch = opts.scratch.empty()
                               ? fs::temp_directory_path() /
                                     ("sceneforge_bench_" + std::to_string(opts.base.seed))
                               : opts.scratch;
  if (!catalog) catalog = std::make_shared<const Catalog>(Catalog::open(opts.base.input_dir));
  using Clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  for (int n : opts.ns) {
    std::vector<SceneGenerator> gens;
    for (const auto& features : feature_sets()) {
      GeneratorConfig cfg = with_features(opts.base, features);
      cfg.n_per_scene = n;
      gens.emplace_back(cfg, catalog);
      gens.back().open();
      (void)gens.back().make(0);  // warm-up
    }
    std::vector<PhaseTimes> times(gens.size());
    for (int r = 0; r < opts.reps; ++r) {
      for (std::size_t f = 0; f < gens.size(); ++f) {
        const Scene s = gens[f].make(static_cast<std::uint64_t>(r), &times[f]);
        const auto start = Clock::now();
        write_scene(scratch, s, gens[f].config().emit_boxes);
        times[f].save_ms += std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      }
    }
    const double reps = opts.reps;
    for (std::size_t f = 0; f < gens.size(); ++f) {
      rows.push_back({n, std::string(to_string(gens[f].config().input_kind)), feature_sets()[f],
                      times[f].load_ms / reps, times[f].transform_ms / reps,
                      times[f].save_ms / reps});
    }
  }
  std::error_code ec;
  fs::remove_all(scratch, ec);
  return rows;
}

inline std::string bench_csv(std::span<const BenchRow> rows) {
  std::string out = "n,variant,features,load_ms,transform_ms,save_ms\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%s,%s,%.3f,%.3f,%.3f\n", r.n, r.variant.c_str(),
                  r.features.c_str(), r.load_ms, r.transform_ms, r.save_ms);
    out += buf;
  }
  return out;
}

// Coefficient of determination of the least-squares line through (x, y).
inline double linear_fit_r2(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("fit", "need >= 2 paired points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (syy == 0.0) return 1.0;
  return (sxy * sxy) / (sxx * syy);
}

}  // namespace sceneforge::datagen
