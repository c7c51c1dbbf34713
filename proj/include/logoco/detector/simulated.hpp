#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "logoco/detector/detector.hpp"

namespace logoco {

/// Hidden ground truth of images the simulated detector may see: which logo
/// instances each image really contains. Absent ids contain no logo.
class LatentTruth {
 public:
  void add(const std::string& image_id, std::vector<Truth> truths);
  void add(std::span<const AnnotatedImage> records);
  /// Empty span when the image has no logo.
  std::span<const Truth> lookup(const std::string& image_id) const;
  bool contains_class(const std::string& image_id, ClassId cls) const;
  std::size_t size() const noexcept { return truths_.size(); }

 private:
  std::unordered_map<std::string, std::vector<Truth>> truths_;
};

/// Learning response of a simulated slot to one training image.
struct GainCurve {
  /// Per synthetic instance: competence moves this fraction of the way to `synthetic_ceiling`.
  double synthetic_gain = 6.5e-4;
  /// Synthetic data alone cannot lift competence beyond this.
  double synthetic_ceiling = 0.75;
  /// Per correct real instance: competence moves this fraction of the way to 1,
  /// scaled by how informative the instance is for this slot.
  double real_gain = 0.02;
  /// Informativeness of an instance this slot already finds trivial; rises
  /// linearly to 1 with the slot's own difficulty for the instance.
  double informativeness_floor = 0.15;
  /// Per noisy instance: competence loses this fraction of itself.
  double noise_penalty = 0.01;
  /// Per noisy instance: false-fire rate moves this fraction of the way to 1.
  double drift = 5e-3;
};

struct SimulatedDetectorParams {
  /// Competence per class in [0,1], indexed by id - 1.
  std::vector<double> competence;
  /// False-fire rate per class on images without that logo, in [0,1].
  std::vector<double> false_fire;
  /// Spread of detection scores around the competence-driven centre (> 0).
  double score_spread = 0.08;
  /// How far instance difficulty moves the score centre: the centre is
  /// k + (1 - k) * spread * (0.5 - d) for difficulty d, so its mean over
  /// instances is the competence k.
  double difficulty_spread = 2.0;
  /// Localisation error at zero competence, as a fraction of box size.
  double localization_jitter = 0.2;
  /// Exponent of the false-positive score distribution u^k; larger means lower scores.
  double false_score_skew = 3.0;
  GainCurve gain;
  std::uint64_t seed = 0;
};

void validate(const SimulatedDetectorParams& params, std::size_t class_count);

/// Stochastic stand-in for a trained detector. Every random draw is a pure
/// hash of (seed, image id, instance), so detection is a deterministic
/// function of the slot state and the image, and improves monotonically with
/// competence for a fixed image. Difficulty of an instance is private to the
/// slot's seed, which makes differently seeded slots complementary.
class SimulatedDetector final : public Detector {
 public:
  SimulatedDetector(std::string name, std::vector<std::string> class_names,
                    SimulatedDetectorParams params, std::shared_ptr<const LatentTruth> latent);

  Backend backend() const noexcept override { return Backend::simulated; }
  bool initialized() const noexcept override { return initialized_; }

  std::vector<Detection> detect(const WebImage& image) const override;
  void fine_tune(std::span<const AnnotatedImage> training) override;
  void bootstrap(std::span<const AnnotatedImage> synthetic) override;
  std::unique_ptr<Detector> clone() const override;

  const SimulatedDetectorParams& params() const noexcept { return params_; }
  double competence(ClassId cls) const { return params_.competence.at(static_cast<std::size_t>(cls - 1)); }
  double false_fire(ClassId cls) const { return params_.false_fire.at(static_cast<std::size_t>(cls - 1)); }

  /// This slot's difficulty in [0,1) for instance `index` of image `image_id`.
  double difficulty(const std::string& image_id, std::size_t index) const noexcept;

  std::size_t images_learned() const noexcept { return seen_.size(); }

  // Session state for persistence.
  struct State {
    SimulatedDetectorParams params;
    std::vector<double> initial_false_fire;
    std::vector<std::uint64_t> seen;  // sorted id hashes
    bool initialized = false;
  };
  State state() const;
  void restore(const State& state);

 private:
  void learn(const AnnotatedImage& record);
  void clamp_state();

  SimulatedDetectorParams params_;
  std::vector<double> initial_false_fire_;
  std::shared_ptr<const LatentTruth> latent_;
  std::unordered_set<std::uint64_t> seen_;
  bool initialized_ = false;
};

}  // namespace logoco
