#include "logoco/detector/detector.hpp"

#include <algorithm>

#include "logoco/core/error.hpp"

namespace logoco {

std::string_view to_string(Backend backend) {
  return backend == Backend::external ? "external" : "simulated";
}

Detector::Detector(std::string name, std::vector<std::string> class_names)
    : name_(std::move(name)), class_names_(std::move(class_names)) {
  if (name_.empty()) throw InvalidArgument("detector slot needs a name");
  if (class_names_.empty()) throw InvalidArgument("detector slot needs at least one class");
}

void Detector::require_initialized() const {
  if (!initialized()) throw DetectorError("detector slot '" + name_ + "' is not initialized");
}

void Detector::require_coverage(std::span<const AnnotatedImage> synthetic) const {
  std::vector<bool> covered(class_names_.size(), false);
  for (const auto& rec : synthetic) {
    for (const auto& t : rec.truths) {
      if (t.cls >= 1 && static_cast<std::size_t>(t.cls) <= covered.size()) {
        covered[static_cast<std::size_t>(t.cls - 1)] = true;
      }
    }
  }
  std::string missing;
  for (std::size_t i = 0; i < covered.size(); ++i) {
    if (covered[i]) continue;
    if (!missing.empty()) missing += ", ";
    missing += class_names_[i];
  }
  if (!missing.empty()) {
    throw InvalidArgument("bootstrap data has no images for classes: " + missing);
  }
}

double max_score(std::span<const Detection> detections, ClassId cls) noexcept {
  double best = 0.0;
  for (const auto& d : detections) {
    if (d.cls == cls) best = std::max(best, d.score);
  }
  return best;
}

double max_score(const Detector& detector, const WebImage& image, ClassId cls) {
  return max_score(detector.detect(image), cls);
}

}  // namespace logoco
