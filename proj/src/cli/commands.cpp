#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "logoco/cli/cli.hpp"
#include "logoco/cli/config.hpp"
#include "logoco/compositor/compositor.hpp"
#include "logoco/core/manifest.hpp"
#include "logoco/detector/sim_world.hpp"
#include "logoco/detector/state.hpp"
#include "logoco/engine/engine.hpp"
#include "logoco/evalkit/evalkit.hpp"
#include "logoco/webset/webset.hpp"

#ifndef LOGOCO_VERSION
#define LOGOCO_VERSION "0.0.0"
#endif

namespace logoco::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string log_path;
  std::vector<std::string> args;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

RunConfig load_config(const Globals& g) {
  json flat = json::object();
  fs::path base;
  if (!g.config_path.empty()) {
    try {
      flat = load_config_file(g.config_path);
    } catch (const IoError& e) {
      throw ConfigError({e.what()});
    }
    base = fs::path(g.config_path).parent_path();
  }
  auto c = build_config(flat, base);
  if (g.seed) c.seed = *g.seed;
  return c;
}

// Re-checks the mining block after command-line overrides.
void revalidate(const RunConfig& c) {
  try {
    validate(c.mining);
  } catch (const InvalidArgument& e) {
    throw ConfigError({e.what()});
  }
}

// Reproducibility record: command line, effective config and seed.
void write_run_log(const Globals& g, const std::string& command, const RunConfig& c,
                   const fs::path& fallback, json extra = json::object()) {
  const fs::path path = !g.log_path.empty() ? fs::path(g.log_path) : fallback;
  if (path.empty()) return;
  json log{{"tool", "logoco"},
           {"version", LOGOCO_VERSION},
           {"command", command},
           {"args", g.args},
           {"seed", c.seed},
           {"config", to_json(c)}};
  if (!extra.empty()) log["result"] = std::move(extra);
  write_json(path, log);
}

fs::path log_beside(const fs::path& file) { return fs::path(file.string() + ".run.json"); }

ClassRegistry registry_for(const RunConfig& c, const fs::path& manifest) {
  if (!c.classes.empty()) return ClassRegistry(c.classes);
  if (manifest.empty()) throw ConfigError({"classes are not configured"});
  return ClassRegistry(scan_class_names(manifest));
}

std::vector<fs::path> image_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && has_image_extension(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::vector<ImageRef> load_backgrounds(const fs::path& dir) {
  std::vector<ImageRef> out;
  for (const auto& f : image_files(dir)) {
    if (auto size = probe_image_size(f)) out.push_back(ImageRef{f.string(), *size});
  }
  if (out.empty()) throw IoError("no readable backgrounds in '" + dir.string() + "'");
  return out;
}

// Icons live in <dir>/<class name>/.
std::map<ClassId, std::vector<ImageRef>> load_icons(ClassRegistry& classes, const fs::path& dir) {
  std::map<ClassId, std::vector<ImageRef>> out;
  std::vector<std::string> missing;
  for (const auto& cls : std::vector<LogoClass>(classes.classes().begin(), classes.classes().end())) {
    const auto sub = dir / cls.name;
    std::vector<std::string> refs;
    if (fs::is_directory(sub)) {
      for (const auto& f : image_files(sub)) refs.push_back(f.string());
    }
    if (refs.empty()) {
      missing.push_back(cls.name);
      continue;
    }
    classes.set_icons(cls.id, refs);
    out[cls.id] = resolve_icons(classes.at(cls.id));
  }
  if (!missing.empty()) {
    std::string msg = "no icons under '" + dir.string() + "' for:";
    for (const auto& n : missing) msg += " " + n;
    throw ConfigError({msg});
  }
  return out;
}

std::shared_ptr<LatentTruth> load_latent(const RunConfig& c, const ClassRegistry& classes,
                                         std::span<const AnnotatedImage> eval_set) {
  auto latent = std::make_shared<LatentTruth>();
  if (!c.latent.empty()) latent->add(load_manifest(c.latent, classes));
  latent->add(eval_set);
  return latent;
}

bool any_simulated(const RunConfig& c) {
  return std::any_of(c.slots.begin(), c.slots.end(),
                     [](const SlotConfig& s) { return s.backend == Backend::simulated; });
}

json stats_json(const ClassStats& s, const ClassRegistry& classes) {
  json counts = json::object();
  for (const auto& [cls, n] : s.counts) counts[classes.name(cls)] = n;
  return {{"counts", counts},
          {"min", s.min},
          {"median", s.median},
          {"max", s.max},
          {"imbalance_ratio", s.imbalance_ratio}};
}

json eval_json(const eval::EvalResult& r, const ClassRegistry& classes, std::size_t images) {
  json ap = json::object();
  json tallies = json::object();
  for (const auto& [cls, v] : r.ap) ap[classes.name(cls)] = v;
  for (const auto& [cls, t] : r.tallies) {
    tallies[classes.name(cls)] = {{"tp", t.tp}, {"fp", t.fp}, {"fn", t.fn}};
  }
  return {{"map", r.map}, {"ap", ap}, {"tallies", tallies}, {"images", images}};
}

// ---- subcommands -------------------------------------------------------

struct CollectArgs {
  std::string source, replay, classes, out;
};

int cmd_collect(const Globals& g, const CollectArgs& a, std::ostream& out) {
  auto c = load_config(g);
  if (!a.classes.empty()) c.classes = build_config({{"classes", a.classes}}).classes;
  if (c.classes.empty()) throw ConfigError({"collect needs --classes or a configured class list"});
  ClassRegistry classes(c.classes);
  std::unique_ptr<StreamSource> source;
  if (!a.source.empty()) source = std::make_unique<DirectorySource>(a.source);
  else source = std::make_unique<ReplaySource>(a.replay);
  const auto result = collect(*source, classes.classes());
  std::vector<AnnotatedImage> records;
  for (const auto& img : result.images) records.push_back({img, {}});
  save_manifest(records, classes, a.out);
  const json summary{{"items_seen", result.items_seen},
                     {"images", result.images.size()},
                     {"skipped", result.skipped}};
  write_run_log(g, "collect", c, log_beside(a.out), summary);
  out << summary.dump() << "\n";
  return kOk;
}

struct FilterArgs {
  std::string in, out;
  int min_dim = 100;
  bool no_dedupe = false;
};

int cmd_filter(const Globals& g, const FilterArgs& a, std::ostream& out) {
  const auto c = load_config(g);
  const auto classes = registry_for(c, a.in);
  const auto records = load_manifest(a.in, classes);
  const auto images = images_of(records);
  auto kept = filter_noise(images, a.min_dim);
  const auto after_size = kept.size();
  if (!a.no_dedupe) kept = dedupe_by_size(kept);
  std::vector<AnnotatedImage> outrecs;
  for (const auto& img : kept) outrecs.push_back({img, {}});
  save_manifest(outrecs, classes, a.out);
  const json summary{{"input", images.size()},
                     {"after_size_filter", after_size},
                     {"output", kept.size()}};
  write_run_log(g, "filter", c, log_beside(a.out), summary);
  out << summary.dump() << "\n";
  return kOk;
}

struct StatsArgs {
  std::string in, oracle, out;
  std::size_t sample = 1000;
};

int cmd_stats(const Globals& g, const StatsArgs& a, std::ostream& out) {
  const auto c = load_config(g);
  const auto classes = registry_for(c, a.in);
  const auto images = images_of(load_manifest(a.in, classes));
  auto doc = stats_json(class_stats(images), classes);
  if (!a.oracle.empty()) {
    LatentTruth truth;
    truth.add(load_manifest(a.oracle, classes));
    const TruthOracle oracle = [&](const WebImage& img) {
      return truth.contains_class(img.id, img.weak_label);
    };
    json ratios = json::object();
    for (const auto& cls : classes.classes()) {
      const bool present = std::any_of(images.begin(), images.end(),
                                       [&](const WebImage& i) { return i.weak_label == cls.id; });
      if (!present) continue;
      ratios[cls.name] = estimate_noise_rate(images, cls.id, oracle, a.sample,
                                             hash_combine(c.seed, cls.id));
    }
    doc["true_logo_ratio"] = ratios;
  }
  if (!a.out.empty()) {
    write_json(a.out, doc);
    write_run_log(g, "stats", c, log_beside(a.out));
  } else {
    write_run_log(g, "stats", c, {});
  }
  out << doc.dump(2) << "\n";
  return kOk;
}

struct SynthArgs {
  std::string cls, backgrounds, icons, out;
  std::size_t count = 0;
  bool layout_only = false;
};

int cmd_synth(const Globals& g, const SynthArgs& a, std::ostream& out) {
  auto c = load_config(g);
  if (!a.backgrounds.empty()) c.backgrounds = a.backgrounds;
  if (!a.icons.empty()) c.icons = a.icons;
  require_paths(c, {"backgrounds", "icons"});
  ClassRegistry classes = c.classes.empty() ? ClassRegistry({a.cls}) : ClassRegistry(c.classes);
  const auto cls = classes.id_of(a.cls);
  ClassRegistry single({a.cls});
  const auto icons = load_icons(single, c.icons);
  const auto backgrounds = load_backgrounds(c.backgrounds);
  SynthOptions options = c.mining.synth;
  options.render = !a.layout_only;
  options.output_dir = fs::path(a.out) / "images";
  options.id_prefix = "syn-" + a.cls;
  const auto batch = synth_batch(cls, icons.at(1), a.count, backgrounds, c.seed, options);
  const auto manifest = fs::path(a.out) / "synthetic.manifest";
  fs::create_directories(a.out);
  save_manifest(batch, classes, manifest);
  const json summary{{"class", a.cls}, {"images", batch.size()}, {"manifest", manifest.string()}};
  write_run_log(g, "synth", c, fs::path(a.out) / "run.json", summary);
  out << summary.dump() << "\n";
  return kOk;
}

struct BootstrapArgs {
  std::string pool, icons, backgrounds, out;
};

int cmd_bootstrap(const Globals& g, const BootstrapArgs& a, std::ostream& out) {
  auto c = load_config(g);
  if (!a.pool.empty()) c.pool = a.pool;
  if (!a.icons.empty()) c.icons = a.icons;
  if (!a.backgrounds.empty()) c.backgrounds = a.backgrounds;
  if (!a.out.empty()) c.out = a.out;
  require_paths(c, {"icons", "backgrounds", "out"});
  if (c.mining.synth.render) c.mining.synth.output_dir = c.out / "synthetic";
  auto classes = registry_for(c, c.pool);
  const auto icons = load_icons(classes, c.icons);
  const auto backgrounds = load_backgrounds(c.backgrounds);
  const auto boot = bootstrap_set(classes, icons, backgrounds, c.mining, c.seed);
  fs::create_directories(c.out);
  std::vector<std::string> names;
  for (const auto& cls : classes.classes()) names.push_back(cls.name);
  json slots = json::array();
  for (std::size_t i = 0; i < 2; ++i) {
    auto det = make_detector(c, i, names, std::make_shared<LatentTruth>());
    det->bootstrap(boot);
    json entry{{"name", det->name()}, {"backend", std::string(to_string(det->backend()))}};
    if (auto* sim = dynamic_cast<SimulatedDetector*>(det.get())) {
      const auto path = c.out / (det->name() + ".state.json");
      save_state(*sim, path);
      entry["state"] = path.string();
    }
    slots.push_back(std::move(entry));
  }
  const json summary{{"synthetic_images", boot.size()}, {"slots", slots}};
  write_run_log(g, "bootstrap", c, c.out / "run.json", summary);
  out << summary.dump() << "\n";
  return kOk;
}

struct MineArgs {
  std::string state, pool, latent, out;
  std::optional<double> threshold;
  std::size_t slot = 1;
};

int cmd_mine(const Globals& g, const MineArgs& a, std::ostream& out) {
  auto c = load_config(g);
  if (!a.pool.empty()) c.pool = a.pool;
  if (!a.latent.empty()) c.latent = a.latent;
  if (!a.out.empty()) c.out = a.out;
  if (a.threshold) c.mining.threshold = *a.threshold;
  revalidate(c);
  require_paths(c, {"pool", "out"});
  const auto classes = registry_for(c, c.pool);
  const auto pool = images_of(load_manifest(c.pool, classes));
  std::unique_ptr<Detector> det;
  if (!a.state.empty()) {
    const auto latent = load_latent(c, classes, {});
    det = std::make_unique<SimulatedDetector>(load_state(a.state, latent));
  } else {
    if (a.slot > 1) throw ConfigError({"--slot must be 0 or 1"});
    if (c.slots[a.slot].backend != Backend::external) {
      throw ConfigError({"mine needs --state for a simulated slot"});
    }
    c.slots[a.slot].external.assume_initialized = true;
    std::vector<std::string> names;
    for (const auto& cls : classes.classes()) names.push_back(cls.name);
    det = make_detector(c, a.slot, names, nullptr);
  }
  const auto images = index_images(pool);
  const auto result = self_mine(*det, make_pool(pool), images, c.mining.threshold);
  const auto manifest = c.out / "mined.manifest";
  fs::create_directories(c.out);
  save_manifest(result.mined, classes, manifest);
  const json summary{{"slot", det->name()},
                     {"mined", result.mined.size()},
                     {"unexplored", result.pool.unexplored.size()},
                     {"failures", result.failures},
                     {"manifest", manifest.string()}};
  write_run_log(g, "mine", c, c.out / "run.json", summary);
  out << summary.dump() << "\n";
  return kOk;
}

struct ColearnArgs {
  std::string pool, icons, backgrounds, eval, latent, out, mode;
  std::optional<std::size_t> n_cls;
  std::optional<int> max_iterations;
  std::optional<double> threshold;
};

int cmd_colearn(const Globals& g, const ColearnArgs& a, std::ostream& out, std::ostream& err) {
  auto c = load_config(g);
  if (!a.pool.empty()) c.pool = a.pool;
  if (!a.icons.empty()) c.icons = a.icons;
  if (!a.backgrounds.empty()) c.backgrounds = a.backgrounds;
  if (!a.eval.empty()) c.eval = c.mining.eval_set = a.eval;
  if (!a.latent.empty()) c.latent = a.latent;
  if (!a.out.empty()) c.out = a.out;
  if (a.n_cls) c.mining.n_cls = *a.n_cls;
  if (a.max_iterations) c.mining.max_iterations = *a.max_iterations;
  if (a.threshold) c.mining.threshold = *a.threshold;
  if (!a.mode.empty()) {
    const auto mode = parse_learning_mode(a.mode);
    if (!mode) throw ConfigError({"--mode must be 'co' or 'self'"});
    c.mining.mode = *mode;
  }
  if (c.mining.synth.render) c.mining.synth.output_dir = c.out / "synthetic";
  revalidate(c);
  std::vector<std::string> required{"pool", "icons", "backgrounds", "eval", "out"};
  if (any_simulated(c)) required.push_back("latent");
  require_paths(c, required);

  RunInputs inputs;
  inputs.classes = registry_for(c, c.pool);
  inputs.icons = load_icons(inputs.classes, c.icons);
  inputs.backgrounds = load_backgrounds(c.backgrounds);
  inputs.pool = images_of(load_manifest(c.pool, inputs.classes));
  inputs.eval_set = load_manifest(c.eval, inputs.classes);
  const auto latent = load_latent(c, inputs.classes, inputs.eval_set);
  std::vector<std::string> names;
  for (const auto& cls : inputs.classes.classes()) names.push_back(cls.name);
  std::array<std::unique_ptr<Detector>, 2> detectors{make_detector(c, 0, names, latent),
                                                     make_detector(c, 1, names, latent)};

  fs::create_directories(c.out);
  write_run_log(g, "colearn", c, c.out / "run.json");
  const auto result = run(c.mining, inputs, std::move(detectors), c.seed,
                          [&](const IterationReport& r) {
                            write_json(c.out / ("iteration_" + std::to_string(r.iteration) + ".report.json"),
                                       to_json(r, inputs.classes));
                            const auto& d = r.slots.at(r.deployment_slot);
                            out << "iteration " << r.iteration << ": " << d.name << " mAP "
                                << format_double(d.map) << (r.stop ? " (stop)" : "") << "\n";
                          });
  for (std::size_t s = 0; s < 2; ++s) {
    save_manifest(result.discovered[s], inputs.classes,
                  c.out / ("T_final_" + result.slot_names[s] + ".manifest"));
  }
  json history = json::array();
  for (const auto& r : result.reports) history.push_back(to_json(r, inputs.classes));
  json summary{{"iterations", result.reports.empty() ? 0 : result.reports.back().iteration},
               {"reports", std::move(history)}};
  if (result.error) summary["error"] = *result.error;
  write_json(c.out / "reports.json", summary);
  if (result.error) {
    err << "logoco: " << *result.error << "\n";
    return kFailed;
  }
  return kOk;
}

struct EvaluateArgs {
  std::string detections, truths, out, interp = "all";
  double iou = 0.5;
  bool strict = false;
};

int cmd_evaluate(const Globals& g, const EvaluateArgs& a, std::ostream& out) {
  auto c = load_config(g);
  c.mining.eval.match.iou_threshold = a.iou;
  c.mining.eval.match.strict = a.strict;
  if (a.interp == "11pt") c.mining.eval.interpolation = eval::Interpolation::eleven_point;
  else if (a.interp != "all") throw ConfigError({"--interp must be 'all' or '11pt'"});
  revalidate(c);
  ClassRegistry classes;
  if (!c.classes.empty()) {
    classes = ClassRegistry(c.classes);
  } else {
    auto names = scan_class_names(a.truths);
    for (const auto& n : scan_class_names(a.detections)) {
      if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
    }
    classes = ClassRegistry(names);
  }
  const auto truths = load_manifest(a.truths, classes);
  const auto dets = load_detection_manifest(a.detections, classes);
  std::map<std::string, std::size_t> slot;
  std::vector<eval::EvalImage> images;
  for (const auto& t : truths) {
    if (!slot.emplace(t.image.id, images.size()).second) {
      throw InvalidArgument("duplicate image id '" + t.image.id + "' in truths");
    }
    images.push_back({{}, t.truths});
  }
  for (const auto& d : dets) {
    const auto it = slot.find(d.image.id);
    if (it == slot.end()) {
      slot.emplace(d.image.id, images.size());
      images.push_back({d.detections, {}});
    } else {
      auto& target = images[it->second].detections;
      target.insert(target.end(), d.detections.begin(), d.detections.end());
    }
  }
  const auto result = eval::evaluate(images, classes.size(), c.mining.eval);
  const auto doc = eval_json(result, classes, images.size());
  if (!a.out.empty()) {
    write_json(a.out, doc);
    write_run_log(g, "evaluate", c, log_beside(a.out));
  } else {
    write_run_log(g, "evaluate", c, {});
  }
  out << doc.dump(2) << "\n";
  return kOk;
}

struct SimulateArgs {
  std::string out;
  WorldSpec spec;
  bool run = false;
};

int cmd_simulate(const Globals& g, SimulateArgs a, std::ostream& out, std::ostream& err) {
  auto c = load_config(g);
  a.spec.seed = c.seed;
  auto world = make_world(a.spec);
  const fs::path dir(a.out);
  write_world(world, dir);
  // The generated config refers to files relative to itself.
  RunConfig generated = c;
  generated.pool = "pool.manifest";
  generated.icons = "icons";
  generated.backgrounds = "backgrounds";
  generated.eval = "eval.manifest";
  generated.latent = "latent.manifest";
  generated.out = "run";
  for (const auto& cls : world.classes.classes()) generated.classes.push_back(cls.name);
  write_text(dir / "config.toml", to_toml(generated));
  const json summary{{"classes", world.classes.size()},
                     {"pool_images", world.pool.size()},
                     {"eval_images", world.eval.size()},
                     {"config", (dir / "config.toml").string()}};
  write_run_log(g, "simulate", c, dir / "world.run.json", summary);
  out << summary.dump() << "\n";
  if (!a.run) return kOk;
  Globals inner = g;
  inner.config_path = (dir / "config.toml").string();
  inner.log_path.clear();
  return cmd_colearn(inner, ColearnArgs{}, out, err);
}

}  // namespace

const char* version() { return LOGOCO_VERSION; }

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-mining and co-learning of logo detectors from weakly labelled web images",
               "logoco"};
  app.set_version_flag("--version", std::string(LOGOCO_VERSION));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  g.args = args;
  app.add_option("--config", g.config_path, "Run configuration (TOML subset or .json)");
  app.add_option("--seed", g.seed, "Seed for every stochastic step");
  app.add_option("--log", g.log_path, "Where to write the machine-readable run log");

  CollectArgs collect_a;
  auto* collect_cmd = app.add_subcommand("collect", "Weak-label stream items by class keyword");
  auto* src = collect_cmd->add_option("--source", collect_a.source, "Directory of images with .txt sidecars");
  auto* rep = collect_cmd->add_option("--replay", collect_a.replay, "Recorded stream (JSON lines)");
  src->excludes(rep);
  collect_cmd->add_option("--classes", collect_a.classes, "Comma-separated class names");
  collect_cmd->add_option("--out", collect_a.out, "Output manifest")->required();

  FilterArgs filter_a;
  auto* filter_cmd = app.add_subcommand("filter", "Drop small images and per-class size duplicates");
  filter_cmd->add_option("--in", filter_a.in, "Input manifest")->required()->check(CLI::ExistingFile);
  filter_cmd->add_option("--out", filter_a.out, "Output manifest")->required();
  filter_cmd->add_option("--min-dim", filter_a.min_dim, "Minimum width and height")
      ->capture_default_str()->check(CLI::PositiveNumber);
  filter_cmd->add_flag("--no-dedupe", filter_a.no_dedupe, "Skip duplicate removal");

  StatsArgs stats_a;
  auto* stats_cmd = app.add_subcommand("stats", "Class counts, imbalance and true-logo ratio");
  stats_cmd->add_option("--in", stats_a.in, "Manifest")->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--oracle", stats_a.oracle, "Manifest with the real logo boxes")
      ->check(CLI::ExistingFile);
  stats_cmd->add_option("--sample", stats_a.sample, "Images inspected per class")->capture_default_str();
  stats_cmd->add_option("--out", stats_a.out, "Also write the JSON here");

  SynthArgs synth_a;
  auto* synth_cmd = app.add_subcommand("synth", "Composite icons onto backgrounds");
  synth_cmd->add_option("--class", synth_a.cls, "Class name")->required();
  synth_cmd->add_option("--count", synth_a.count, "Number of images")->required();
  synth_cmd->add_option("--backgrounds", synth_a.backgrounds, "Background image directory");
  synth_cmd->add_option("--icons", synth_a.icons, "Icon directory (one subdirectory per class)");
  synth_cmd->add_option("--out", synth_a.out, "Output directory")->required();
  synth_cmd->add_flag("--layout-only", synth_a.layout_only, "Plan boxes without rendering pixels");

  BootstrapArgs boot_a;
  auto* boot_cmd = app.add_subcommand("bootstrap", "Train both slots on synthetic images");
  boot_cmd->add_option("--pool", boot_a.pool, "Pool manifest (class names)");
  boot_cmd->add_option("--icons", boot_a.icons, "Icon directory");
  boot_cmd->add_option("--backgrounds", boot_a.backgrounds, "Background directory");
  boot_cmd->add_option("--out", boot_a.out, "Output directory for slot state");

  MineArgs mine_a;
  auto* mine_cmd = app.add_subcommand("mine", "One self-mining pass of a single slot");
  mine_cmd->add_option("--state", mine_a.state, "Simulated slot state from bootstrap")
      ->check(CLI::ExistingFile);
  mine_cmd->add_option("--slot", mine_a.slot, "Configured external slot to use (0 or 1)");
  mine_cmd->add_option("--pool", mine_a.pool, "Pool manifest");
  mine_cmd->add_option("--latent", mine_a.latent, "Hidden truths for simulated slots");
  mine_cmd->add_option("--threshold", mine_a.threshold, "Selection threshold");
  mine_cmd->add_option("--out", mine_a.out, "Output directory");

  ColearnArgs co_a;
  auto* co_cmd = app.add_subcommand("colearn", "Full bootstrap, mining and co-learning loop");
  co_cmd->add_option("--pool", co_a.pool, "Pool manifest");
  co_cmd->add_option("--icons", co_a.icons, "Icon directory");
  co_cmd->add_option("--backgrounds", co_a.backgrounds, "Background directory");
  co_cmd->add_option("--eval", co_a.eval, "Annotated evaluation manifest");
  co_cmd->add_option("--latent", co_a.latent, "Hidden truths for simulated slots");
  co_cmd->add_option("--out", co_a.out, "Output directory");
  co_cmd->add_option("--mode", co_a.mode, "co or self");
  co_cmd->add_option("--n-cls", co_a.n_cls, "Per-class target of new images per iteration");
  co_cmd->add_option("--max-iterations", co_a.max_iterations, "Iteration cap");
  co_cmd->add_option("--threshold", co_a.threshold, "Selection threshold");

  EvaluateArgs ev_a;
  auto* ev_cmd = app.add_subcommand("evaluate", "Per-class AP and mAP of a detection manifest");
  ev_cmd->add_option("--detections", ev_a.detections, "Detection manifest")->required()
      ->check(CLI::ExistingFile);
  ev_cmd->add_option("--truths", ev_a.truths, "Annotated manifest")->required()->check(CLI::ExistingFile);
  ev_cmd->add_option("--iou", ev_a.iou, "IoU threshold")->capture_default_str();
  ev_cmd->add_flag("--strict", ev_a.strict, "Require IoU strictly above the threshold");
  ev_cmd->add_option("--interp", ev_a.interp, "all or 11pt")->capture_default_str()
      ->check(CLI::IsMember({"all", "11pt"}));
  ev_cmd->add_option("--out", ev_a.out, "Also write the JSON here");

  SimulateArgs sim_a;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic web pool for simulated runs");
  sim_cmd->add_option("--out", sim_a.out, "Output directory")->required();
  sim_cmd->add_option("--classes", sim_a.spec.classes, "Number of classes")->capture_default_str();
  sim_cmd->add_option("--max-images", sim_a.spec.max_class_images, "Images of the largest class")
      ->capture_default_str();
  sim_cmd->add_option("--imbalance", sim_a.spec.imbalance_ratio, "Largest over smallest class")
      ->capture_default_str();
  sim_cmd->add_option("--true-ratio", sim_a.spec.true_ratio, "Fraction of images with a real logo")
      ->capture_default_str();
  sim_cmd->add_option("--eval-per-class", sim_a.spec.eval_per_class, "Annotated test images per class")
      ->capture_default_str();
  sim_cmd->add_flag("--run", sim_a.run, "Run colearn on the generated world");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (collect_cmd->parsed() && collect_a.source.empty() && collect_a.replay.empty()) {
    err << "logoco collect: one of --source or --replay is required\n" << collect_cmd->help();
    return kUsage;
  }

  try {
    if (collect_cmd->parsed()) return cmd_collect(g, collect_a, out);
    if (filter_cmd->parsed()) return cmd_filter(g, filter_a, out);
    if (stats_cmd->parsed()) return cmd_stats(g, stats_a, out);
    if (synth_cmd->parsed()) return cmd_synth(g, synth_a, out);
    if (boot_cmd->parsed()) return cmd_bootstrap(g, boot_a, out);
    if (mine_cmd->parsed()) return cmd_mine(g, mine_a, out);
    if (co_cmd->parsed()) return cmd_colearn(g, co_a, out, err);
    if (ev_cmd->parsed()) return cmd_evaluate(g, ev_a, out);
    if (sim_cmd->parsed()) return cmd_simulate(g, sim_a, out, err);
  } catch (const ConfigError& e) {
    err << "logoco: " << e.what() << "\n";
    return kInvalid;
  } catch (const InvalidArgument& e) {
    err << "logoco: " << e.what() << "\n";
    return kInvalid;
  } catch (const ParseError& e) {
    err << "logoco: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    err << "logoco: " << e.what() << "\n";
    return kFailed;
  }
  err << app.help();
  return kUsage;
}

}  // namespace logoco::cli
