#include "logoco/detector/simulated.hpp"

#include <algorithm>
#include <cmath>

#include "logoco/core/error.hpp"
#include "logoco/core/random.hpp"
#include "logoco/evalkit/evalkit.hpp"

namespace logoco {
namespace {

// Independent draw streams per instance.
enum Draw : std::uint64_t {
  kDifficulty = 1,
  kFire = 2,
  kScoreA = 3,
  kScoreB = 4,
  kEdge = 5,  // kEdge + 0..3
  kFalseFire = 16,
  kFalseScore = 17,
  kFalseBox = 18,  // kFalseBox + 0..3
};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

int round_to_int(double v) { return static_cast<int>(std::lround(v)); }

}  // namespace

// ---- LatentTruth ---------------------------------------------------------

void LatentTruth::add(const std::string& image_id, std::vector<Truth> truths) {
  if (truths.empty()) return;
  auto& slot = truths_[image_id];
  slot.insert(slot.end(), truths.begin(), truths.end());
}

void LatentTruth::add(std::span<const AnnotatedImage> records) {
  for (const auto& r : records) add(r.image.id, r.truths);
}

std::span<const Truth> LatentTruth::lookup(const std::string& image_id) const {
  auto it = truths_.find(image_id);
  if (it == truths_.end()) return {};
  return it->second;
}

bool LatentTruth::contains_class(const std::string& image_id, ClassId cls) const {
  for (const auto& t : lookup(image_id)) {
    if (t.cls == cls) return true;
  }
  return false;
}

// ---- params ----------------------------------------------------------------

void validate(const SimulatedDetectorParams& p, std::size_t class_count) {
  if (p.competence.size() != class_count || p.false_fire.size() != class_count) {
    throw InvalidArgument("simulated detector needs one competence and false-fire value per class");
  }
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!std::all_of(p.competence.begin(), p.competence.end(), in_unit) ||
      !std::all_of(p.false_fire.begin(), p.false_fire.end(), in_unit)) {
    throw InvalidArgument("competence and false-fire rates must lie in [0,1]");
  }
  if (!(p.score_spread > 0.0)) throw InvalidArgument("score spread must be > 0");
  if (!(p.difficulty_spread >= 0.0 && p.difficulty_spread <= 4.0)) {
    throw InvalidArgument("difficulty spread must lie in [0, 4]");
  }
  if (!(p.localization_jitter >= 0.0 && p.localization_jitter < 0.5)) {
    throw InvalidArgument("localization jitter must lie in [0, 0.5)");
  }
  if (!(p.false_score_skew >= 1.0)) throw InvalidArgument("false score skew must be >= 1");
  const auto& g = p.gain;
  if (!(in_unit(g.synthetic_gain) && in_unit(g.synthetic_ceiling) && in_unit(g.real_gain) &&
        in_unit(g.informativeness_floor) && in_unit(g.noise_penalty) && in_unit(g.drift))) {
    throw InvalidArgument("gain curve parameters must lie in [0,1]");
  }
}

// ---- SimulatedDetector -----------------------------------------------------

SimulatedDetector::SimulatedDetector(std::string name, std::vector<std::string> class_names,
                                     SimulatedDetectorParams params,
                                     std::shared_ptr<const LatentTruth> latent)
    : Detector(std::move(name), std::move(class_names)),
      params_(std::move(params)),
      latent_(std::move(latent)) {
  validate(params_, class_count());
  if (!latent_) latent_ = std::make_shared<LatentTruth>();
  initial_false_fire_ = params_.false_fire;
}

double SimulatedDetector::difficulty(const std::string& image_id, std::size_t index) const noexcept {
  const auto h = hash_combine(hash_combine(params_.seed, hash_string(image_id)), index + 1);
  return to_unit(hash_combine(h, kDifficulty));
}

std::vector<Detection> SimulatedDetector::detect(const WebImage& image) const {
  require_initialized();
  std::vector<Detection> out;
  const auto base = hash_combine(params_.seed, hash_string(image.id));
  const auto truths = latent_->lookup(image.id);

  for (std::size_t k = 0; k < truths.size(); ++k) {
    const auto& truth = truths[k];
    if (truth.cls < 1 || static_cast<std::size_t>(truth.cls) > class_count()) continue;
    const double kappa = competence(truth.cls);
    const auto h = hash_combine(base, k + 1);
    const double d = to_unit(hash_combine(h, kDifficulty));
    // Easy instances sit above the competence level, hard ones below; the
    // offset vanishes as competence reaches 1.
    const double centre = kappa + (1.0 - kappa) * params_.difficulty_spread * (0.5 - d);
    if (to_unit(hash_combine(h, kFire)) >= clamp01(centre)) continue;
    const double z = normal_from_bits(hash_combine(h, kScoreA), hash_combine(h, kScoreB));
    const double score = clamp01(centre + params_.score_spread * z);

    const double amp = params_.localization_jitter * (1.0 - kappa);
    const auto& b = truth.box;
    auto shift = [&](int edge, int extent) {
      return amp * extent * (2.0 * to_unit(hash_combine(h, kEdge + edge)) - 1.0);
    };
    BoundingBox box{
        std::clamp(round_to_int(b.x_min + shift(0, b.width())), 0, image.width - 1),
        std::clamp(round_to_int(b.y_min + shift(1, b.height())), 0, image.height - 1),
        std::clamp(round_to_int(b.x_max + shift(2, b.width())), 1, image.width),
        std::clamp(round_to_int(b.y_max + shift(3, b.height())), 1, image.height)};
    if (!box.valid()) box = b;
    out.push_back(Detection{truth.cls, score, box});
  }

  // Images that do not contain their weak-label logo sometimes fire anyway,
  // with a low-skewed score.
  const ClassId weak = image.weak_label;
  if (weak >= 1 && static_cast<std::size_t>(weak) <= class_count() &&
      !latent_->contains_class(image.id, weak) &&
      to_unit(hash_combine(base, kFalseFire)) < false_fire(weak)) {
    const double score = std::pow(to_unit(hash_combine(base, kFalseScore)), params_.false_score_skew);
    auto u = [&](int i) { return to_unit(hash_combine(base, kFalseBox + i)); };
    const int w = std::max(1, round_to_int(image.width * (0.2 + 0.4 * u(0))));
    const int hgt = std::max(1, round_to_int(image.height * (0.2 + 0.4 * u(1))));
    const int x = round_to_int((image.width - w) * u(2));
    const int y = round_to_int((image.height - hgt) * u(3));
    out.push_back(Detection{weak, clamp01(score), BoundingBox{x, y, x + w, y + hgt}});
  }
  return out;
}

void SimulatedDetector::learn(const AnnotatedImage& record) {
  if (!seen_.insert(hash_string(record.image.id)).second) return;
  const auto& g = params_.gain;
  for (const auto& t : record.truths) {
    if (t.cls < 1 || static_cast<std::size_t>(t.cls) > class_count()) continue;
    auto& kappa = params_.competence[static_cast<std::size_t>(t.cls - 1)];
    auto& phi = params_.false_fire[static_cast<std::size_t>(t.cls - 1)];
    if (record.image.source == ImageSource::synthetic) {
      kappa += g.synthetic_gain * std::max(0.0, g.synthetic_ceiling - kappa);
      continue;
    }
    // A real box is correct when it localises a latent instance of its class.
    const auto latent = latent_->lookup(record.image.id);
    double best = 0.0;
    std::size_t best_k = latent.size();
    for (std::size_t k = 0; k < latent.size(); ++k) {
      if (latent[k].cls != t.cls) continue;
      const double overlap = eval::iou(latent[k].box, t.box);
      if (overlap > best) {
        best = overlap;
        best_k = k;
      }
    }
    if (best_k < latent.size() && best >= 0.5) {
      const double info = g.informativeness_floor +
                          (1.0 - g.informativeness_floor) * difficulty(record.image.id, best_k);
      kappa += g.real_gain * info * (1.0 - kappa);
    } else {
      kappa -= g.noise_penalty * kappa;
      phi += g.drift * (1.0 - phi);
    }
  }
}

void SimulatedDetector::clamp_state() {
  for (auto& v : params_.competence) v = clamp01(v);
  for (auto& v : params_.false_fire) v = clamp01(v);
}

void SimulatedDetector::fine_tune(std::span<const AnnotatedImage> training) {
  if (training.empty()) throw InvalidArgument("fine_tune needs a non-empty training batch");
  for (const auto& rec : training) {
    learn(rec);
    clamp_state();
  }
  initialized_ = true;
}

void SimulatedDetector::bootstrap(std::span<const AnnotatedImage> synthetic) {
  require_coverage(synthetic);
  std::fill(params_.competence.begin(), params_.competence.end(), 0.0);
  params_.false_fire = initial_false_fire_;
  seen_.clear();
  for (const auto& rec : synthetic) {
    learn(rec);
    clamp_state();
  }
  initialized_ = true;
}

std::unique_ptr<Detector> SimulatedDetector::clone() const {
  return std::unique_ptr<Detector>(new SimulatedDetector(*this));
}

SimulatedDetector::State SimulatedDetector::state() const {
  State s;
  s.params = params_;
  s.initial_false_fire = initial_false_fire_;
  s.seen.assign(seen_.begin(), seen_.end());
  std::sort(s.seen.begin(), s.seen.end());
  s.initialized = initialized_;
  return s;
}

void SimulatedDetector::restore(const State& s) {
  validate(s.params, class_count());
  if (s.initial_false_fire.size() != class_count()) {
    throw InvalidArgument("restored state has the wrong class count");
  }
  params_ = s.params;
  initial_false_fire_ = s.initial_false_fire;
  seen_ = std::unordered_set<std::uint64_t>(s.seen.begin(), s.seen.end());
  initialized_ = s.initialized;
}

}  // namespace logoco
