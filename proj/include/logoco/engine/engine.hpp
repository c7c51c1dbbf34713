#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "logoco/compositor/compositor.hpp"
#include "logoco/core/classes.hpp"
#include "logoco/core/pool.hpp"
#include "logoco/detector/detector.hpp"
#include "logoco/engine/report.hpp"
#include "logoco/evalkit/evalkit.hpp"

namespace logoco {

enum class LearningMode {
  /// Each slot fine-tunes on the other slot's mined images.
  co,
  /// Each slot fine-tunes on its own mined images.
  self,
};

std::string_view to_string(LearningMode mode);
std::optional<LearningMode> parse_learning_mode(std::string_view text);

struct MiningConfig {
  /// Selection threshold on the weak-label detection score, in (0, 1].
  double threshold = 0.9;
  /// Per-class target of new training images per iteration (0 disables augmentation).
  std::size_t n_cls = 500;
  int max_iterations = 8;
  double stop_epsilon = 0.0;
  /// Annotated evaluation manifest; informational for the engine, read by callers.
  std::filesystem::path eval_set;
  LearningMode mode = LearningMode::co;
  std::size_t bootstrap_per_class = 1000;
  /// Slot whose mAP gates stopping and which is deployed.
  std::size_t deployment_slot = 1;
  /// Upper bound on cross-class backgrounds drawn per class (0 = all).
  std::size_t max_context_backgrounds = 0;
  SynthOptions synth;
  eval::ApOptions eval;
};

/// Throws InvalidArgument listing every violated constraint.
void validate(const MiningConfig& config);

using ImageIndex = std::unordered_map<std::string, WebImage>;
ImageIndex index_images(std::span<const WebImage> images);

/// True iff the weak-label score of `image` reaches `threshold`. Scores of
/// other classes are ignored.
bool select(const Detector& detector, const WebImage& image, double threshold);

struct MineResult {
  PoolState pool;
  /// Newly selected images with pseudo boxes, in id order.
  std::vector<AnnotatedImage> mined;
  /// Images whose detection failed; they stay unexplored.
  std::size_t failures = 0;
};

/// One pass over the unexplored images. A selected image moves to the
/// discovered set carrying the weak-label-class detections scoring >= threshold
/// as pseudo truths; an image is only moved when it has at least one such box.
MineResult self_mine(const Detector& detector, const PoolState& pool, const ImageIndex& images,
                     double threshold);

/// A detector with everything the loop tracks for it.
struct Slot {
  std::unique_ptr<Detector> detector;
  PoolState pool;
  /// Cumulative self-discovered set with pseudo boxes.
  std::vector<AnnotatedImage> mined;
  /// Cumulative fine-tuning data fed since bootstrap (real and synthetic).
  std::vector<AnnotatedImage> training;
  double map = 0.0;
};

/// Read-only inputs shared by every iteration.
struct LoopContext {
  const ClassRegistry* classes = nullptr;
  const ImageIndex* images = nullptr;
  std::span<const AnnotatedImage> eval_set;
  /// Bootstrap background pool, also the fallback for context synthesis.
  std::span<const ImageRef> backgrounds;
  const std::map<ClassId, std::vector<ImageRef>>* icons = nullptr;
  std::uint64_t seed = 0;
};

/// Runs `detector` over the eval set.
eval::EvalResult evaluate_slot(const Detector& detector, std::span<const AnnotatedImage> eval_set,
                               std::size_t class_count, const eval::ApOptions& options);

/// One round: both slots mine their pools, each learner receives the partner's
/// (co) or its own (self) new images plus per-class context synthesis up to
/// n_cls, fine-tunes on its cumulative training set, and is re-evaluated.
/// All-or-nothing: on any error both slots are restored and the error rethrown.
IterationReport colearn_iteration(std::array<Slot, 2>& slots, const LoopContext& context,
                                  const MiningConfig& config, int iteration);

struct StopPolicy {
  double epsilon = 0.0;
  int max_iterations = 8;
  std::size_t deployment_slot = 1;
};

/// True when the deployment slot's latest mAP gain is <= epsilon or the last
/// report reached max_iterations. A lone report never stops on gain. Throws
/// InvalidArgument on empty history.
bool should_stop(std::span<const IterationReport> history, const StopPolicy& policy);

struct RunInputs {
  ClassRegistry classes;
  std::vector<WebImage> pool;
  std::vector<AnnotatedImage> eval_set;
  std::vector<ImageRef> backgrounds;
  std::map<ClassId, std::vector<ImageRef>> icons;
};

struct RunResult {
  std::vector<IterationReport> reports;
  /// Final discovered sets with pseudo boxes, per slot.
  std::array<std::vector<AnnotatedImage>, 2> discovered;
  std::array<std::string, 2> slot_names;
  /// Set when an iteration aborted the run; reports before it are kept.
  std::optional<std::string> error;
};

/// The shared synthetic bootstrap set: bootstrap_per_class layout (or
/// rendered) images per class drawn over `backgrounds`.
std::vector<AnnotatedImage> bootstrap_set(const ClassRegistry& classes,
                                          const std::map<ClassId, std::vector<ImageRef>>& icons,
                                          std::span<const ImageRef> backgrounds,
                                          const MiningConfig& config, std::uint64_t seed);

using ReportCallback = std::function<void(const IterationReport&)>;

/// Bootstraps both slots on one shared synthetic set, then iterates until
/// should_stop. Report 0 describes the bootstrapped slots.
RunResult run(const MiningConfig& config, const RunInputs& inputs,
              std::array<std::unique_ptr<Detector>, 2> detectors, std::uint64_t seed,
              const ReportCallback& on_report = {});

}  // namespace logoco
