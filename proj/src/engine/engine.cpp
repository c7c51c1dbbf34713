#include "logoco/engine/engine.hpp"

#include <algorithm>
#include <set>

#include "logoco/core/error.hpp"
#include "logoco/core/random.hpp"

namespace logoco {
namespace {

std::map<ClassId, std::size_t> zero_counts(std::size_t class_count) {
  std::map<ClassId, std::size_t> out;
  for (std::size_t c = 1; c <= class_count; ++c) out[static_cast<ClassId>(c)] = 0;
  return out;
}

std::map<ClassId, std::size_t> count_by_class(std::span<const AnnotatedImage> records,
                                              std::size_t class_count) {
  auto out = zero_counts(class_count);
  for (const auto& r : records) ++out[r.image.weak_label];
  return out;
}

void require_context(const LoopContext& ctx) {
  if (!ctx.classes || !ctx.images || !ctx.icons) {
    throw InvalidArgument("loop context is missing classes, images or icons");
  }
}

SlotReport describe(const Slot& slot, const eval::EvalResult& result, double previous_map) {
  SlotReport r;
  r.name = slot.detector->name();
  r.discovered = slot.pool.discovered.size();
  r.unexplored = slot.pool.unexplored.size();
  r.training_images = slot.training.size();
  r.ap = result.ap;
  r.map = result.map;
  r.gain = result.map - previous_map;
  return r;
}

}  // namespace

std::string_view to_string(LearningMode mode) {
  return mode == LearningMode::co ? "co" : "self";
}

std::optional<LearningMode> parse_learning_mode(std::string_view text) {
  if (text == "co") return LearningMode::co;
  if (text == "self") return LearningMode::self;
  return std::nullopt;
}

void validate(const MiningConfig& c) {
  std::vector<std::string> problems;
  if (!(c.threshold > 0.0 && c.threshold <= 1.0)) problems.push_back("threshold must lie in (0, 1]");
  if (c.max_iterations < 0) problems.push_back("max_iterations must be >= 0");
  if (c.bootstrap_per_class < 1) problems.push_back("bootstrap_per_class must be >= 1");
  if (c.deployment_slot > 1) problems.push_back("deployment_slot must be 0 or 1");
  if (!(c.eval.match.iou_threshold > 0.0 && c.eval.match.iou_threshold <= 1.0)) {
    problems.push_back("iou threshold must lie in (0, 1]");
  }
  try {
    validate(c.synth.ranges);
  } catch (const InvalidArgument& e) {
    problems.push_back(e.what());
  }
  if (c.synth.render && c.synth.output_dir.empty()) {
    problems.push_back("rendered synthesis needs an output directory");
  }
  if (problems.empty()) return;
  std::string msg = "invalid mining config:";
  for (const auto& p : problems) msg += "\n  " + p;
  throw InvalidArgument(msg);
}

ImageIndex index_images(std::span<const WebImage> images) {
  ImageIndex index;
  index.reserve(images.size());
  for (const auto& img : images) {
    if (!index.emplace(img.id, img).second) {
      throw InvalidArgument("duplicate image id '" + img.id + "' in pool");
    }
  }
  return index;
}

bool select(const Detector& detector, const WebImage& image, double threshold) {
  return max_score(detector, image, image.weak_label) >= threshold;
}

MineResult self_mine(const Detector& detector, const PoolState& pool, const ImageIndex& images,
                     double threshold) {
  validate(pool);
  MineResult out;
  out.pool = pool;
  for (const auto& id : pool.unexplored) {
    const auto it = images.find(id);
    if (it == images.end()) throw InvalidArgument("pool image '" + id + "' is not in the image index");
    const auto& image = it->second;
    std::vector<Detection> dets;
    try {
      dets = detector.detect(image);
    } catch (const Error&) {
      ++out.failures;
      continue;
    }
    if (max_score(dets, image.weak_label) < threshold) continue;
    AnnotatedImage rec{image, {}};
    for (const auto& d : dets) {
      if (d.cls == image.weak_label && d.score >= threshold) rec.truths.push_back(Truth{d.cls, d.box});
    }
    if (rec.truths.empty()) continue;
    out.pool.unexplored.erase(id);
    out.pool.discovered.insert(id);
    out.mined.push_back(std::move(rec));
  }
  return out;
}

eval::EvalResult evaluate_slot(const Detector& detector, std::span<const AnnotatedImage> eval_set,
                               std::size_t class_count, const eval::ApOptions& options) {
  std::vector<eval::EvalImage> images;
  images.reserve(eval_set.size());
  for (const auto& rec : eval_set) images.push_back({detector.detect(rec.image), rec.truths});
  return eval::evaluate(images, class_count, options);
}

IterationReport colearn_iteration(std::array<Slot, 2>& slots, const LoopContext& ctx,
                                  const MiningConfig& config, int iteration) {
  require_context(ctx);
  const std::size_t m = ctx.classes->size();

  struct Backup {
    std::unique_ptr<Detector> detector;
    PoolState pool;
    std::size_t mined = 0;
    std::size_t training = 0;
    double map = 0.0;
  };
  std::array<Backup, 2> backup;
  for (std::size_t s = 0; s < 2; ++s) {
    backup[s] = {slots[s].detector->clone(), slots[s].pool, slots[s].mined.size(),
                 slots[s].training.size(), slots[s].map};
  }

  try {
    std::array<MineResult, 2> mined;
    for (std::size_t s = 0; s < 2; ++s) {
      mined[s] = self_mine(*slots[s].detector, slots[s].pool, *ctx.images, config.threshold);
    }

    IterationReport report;
    report.iteration = iteration;
    report.deployment_slot = config.deployment_slot;
    std::array<SlotReport, 2> parts;
    for (std::size_t s = 0; s < 2; ++s) {
      const auto& feed = config.mode == LearningMode::co ? mined[1 - s].mined : mined[s].mined;
      auto& part = parts[s];
      part.mined = count_by_class(mined[s].mined, m);
      part.fed = count_by_class(feed, m);
      part.synthetic = zero_counts(m);

      std::map<ClassId, std::vector<WebImage>> feed_by_class;
      for (const auto& r : feed) feed_by_class[r.image.weak_label].push_back(r.image);

      std::vector<AnnotatedImage> batch(feed.begin(), feed.end());
      const auto& slot_name = slots[s].detector->name();
      for (std::size_t c = 1; c <= m; ++c) {
        const auto cls = static_cast<ClassId>(c);
        const auto n_syn = context_augment_count(config.n_cls, part.fed[cls]);
        if (n_syn == 0) continue;
        const auto seed = hash_combine(hash_combine(hash_combine(ctx.seed, iteration), s), c);
        const auto context = cross_class_backgrounds(feed_by_class, cls, seed,
                                                     config.max_context_backgrounds);
        const std::span<const ImageRef> backgrounds =
            context.empty() ? ctx.backgrounds : std::span<const ImageRef>(context);
        auto options = config.synth;
        options.id_prefix = slot_name + "-t" + std::to_string(iteration) + "-" + ctx.classes->name(cls);
        if (options.render) options.output_dir /= slot_name + "-t" + std::to_string(iteration);
        auto synthetic = synth_batch(cls, ctx.icons->at(cls), n_syn, backgrounds,
                                     hash_combine(seed, 0x73796eULL), options);
        part.synthetic[cls] = synthetic.size();
        std::move(synthetic.begin(), synthetic.end(), std::back_inserter(batch));
      }

      auto& slot = slots[s];
      slot.training.insert(slot.training.end(), batch.begin(), batch.end());
      if (!batch.empty()) slot.detector->fine_tune(slot.training);
    }

    for (std::size_t s = 0; s < 2; ++s) {
      auto& slot = slots[s];
      validate_transition(slot.pool, mined[s].pool);
      slot.pool = std::move(mined[s].pool);
      slot.pool.iteration = iteration;
      std::move(mined[s].mined.begin(), mined[s].mined.end(), std::back_inserter(slot.mined));

      const auto result = evaluate_slot(*slot.detector, ctx.eval_set, m, config.eval);
      auto described = describe(slot, result, slot.map);
      described.mined = std::move(parts[s].mined);
      described.fed = std::move(parts[s].fed);
      described.synthetic = std::move(parts[s].synthetic);
      described.failures = mined[s].failures;
      slot.map = result.map;
      report.cumulative_training_images += slot.training.size();
      report.slots.push_back(std::move(described));
    }
    return report;
  } catch (...) {
    for (std::size_t s = 0; s < 2; ++s) {
      auto& slot = slots[s];
      slot.detector = std::move(backup[s].detector);
      slot.pool = std::move(backup[s].pool);
      slot.mined.resize(backup[s].mined);
      slot.training.resize(backup[s].training);
      slot.map = backup[s].map;
    }
    throw;
  }
}

bool should_stop(std::span<const IterationReport> history, const StopPolicy& policy) {
  if (history.empty()) throw InvalidArgument("should_stop needs at least one report");
  const auto& last = history.back();
  if (last.iteration >= policy.max_iterations) return true;
  if (history.size() < 2) return false;
  const auto& prev = history[history.size() - 2];
  const auto d = policy.deployment_slot;
  if (d >= last.slots.size() || d >= prev.slots.size()) {
    throw InvalidArgument("deployment slot " + std::to_string(d) + " is missing from the reports");
  }
  return last.slots[d].map - prev.slots[d].map <= policy.epsilon;
}

std::vector<AnnotatedImage> bootstrap_set(const ClassRegistry& classes,
                                          const std::map<ClassId, std::vector<ImageRef>>& icons,
                                          std::span<const ImageRef> backgrounds,
                                          const MiningConfig& config, std::uint64_t seed) {
  std::vector<AnnotatedImage> boot;
  for (const auto& cls : classes.classes()) {
    const auto it = icons.find(cls.id);
    if (it == icons.end() || it->second.empty()) {
      throw InvalidArgument("class '" + cls.name + "' has no icons");
    }
    auto options = config.synth;
    options.id_prefix = "boot-" + cls.name;
    if (options.render) options.output_dir /= "bootstrap";
    auto batch = synth_batch(cls.id, it->second, config.bootstrap_per_class, backgrounds,
                             hash_combine(hash_combine(seed, 0xb007ULL), cls.id), options);
    std::move(batch.begin(), batch.end(), std::back_inserter(boot));
  }
  return boot;
}

RunResult run(const MiningConfig& config, const RunInputs& inputs,
              std::array<std::unique_ptr<Detector>, 2> detectors, std::uint64_t seed,
              const ReportCallback& on_report) {
  validate(config);
  const std::size_t m = inputs.classes.size();
  if (m == 0) throw InvalidArgument("run needs at least one class");
  if (inputs.pool.empty()) throw InvalidArgument("run needs a non-empty web pool");
  if (inputs.backgrounds.empty()) throw InvalidArgument("run needs bootstrap backgrounds");
  std::vector<std::string> missing;
  for (const auto& cls : inputs.classes.classes()) {
    const auto it = inputs.icons.find(cls.id);
    if (it == inputs.icons.end() || it->second.empty()) missing.push_back(cls.name);
  }
  if (!missing.empty()) {
    std::string msg = "classes without icons:";
    for (const auto& n : missing) msg += " " + n;
    throw InvalidArgument(msg);
  }
  std::vector<std::string> names;
  for (const auto& c : inputs.classes.classes()) names.push_back(c.name);
  for (const auto& d : detectors) {
    if (!d) throw InvalidArgument("run needs two detector slots");
    if (d->class_names() != names) {
      throw InvalidArgument("slot '" + d->name() + "' was configured for different classes");
    }
  }
  if (detectors[0]->name() == detectors[1]->name()) {
    throw InvalidArgument("the two slots need distinct names");
  }

  const auto images = index_images(inputs.pool);
  for (const auto& img : inputs.pool) validate(img, m);

  // Both slots start from the same synthetic set so they differ only in
  // their own modelling noise.
  const auto boot = bootstrap_set(inputs.classes, inputs.icons, inputs.backgrounds, config, seed);

  RunResult result;
  std::array<Slot, 2> slots;
  IterationReport first;
  first.iteration = 0;
  first.deployment_slot = config.deployment_slot;
  for (std::size_t s = 0; s < 2; ++s) {
    auto& slot = slots[s];
    slot.detector = std::move(detectors[s]);
    slot.detector->bootstrap(boot);
    slot.pool = make_pool(inputs.pool);
    result.slot_names[s] = slot.detector->name();
    const auto eval_result = evaluate_slot(*slot.detector, inputs.eval_set, m, config.eval);
    auto part = describe(slot, eval_result, eval_result.map);
    part.mined = zero_counts(m);
    part.fed = zero_counts(m);
    part.synthetic = zero_counts(m);
    for (auto& [cls, n] : part.synthetic) n = config.bootstrap_per_class;
    slot.map = eval_result.map;
    first.slots.push_back(std::move(part));
  }

  const StopPolicy policy{config.stop_epsilon, config.max_iterations, config.deployment_slot};
  result.reports.push_back(std::move(first));
  result.reports.back().stop = should_stop(result.reports, policy);
  if (on_report) on_report(result.reports.back());

  const LoopContext ctx{&inputs.classes, &images, inputs.eval_set, inputs.backgrounds,
                        &inputs.icons, seed};
  for (int t = 1; !result.reports.back().stop; ++t) {
    IterationReport report;
    try {
      report = colearn_iteration(slots, ctx, config, t);
    } catch (const Error& e) {
      result.error = "iteration " + std::to_string(t) + " aborted: " + e.what();
      break;
    }
    result.reports.push_back(std::move(report));
    result.reports.back().stop = should_stop(result.reports, policy);
    if (on_report) on_report(result.reports.back());
  }
  for (std::size_t s = 0; s < 2; ++s) result.discovered[s] = std::move(slots[s].mined);
  return result;
}

}  // namespace logoco
