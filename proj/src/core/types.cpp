#include "logoco/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "logoco/core/classes.hpp"
#include "logoco/core/error.hpp"
#include "logoco/core/random.hpp"

namespace logoco {

std::string_view to_string(ImageSource source) {
  switch (source) {
    case ImageSource::stream:
      return "stream";
    case ImageSource::synthetic:
      return "synthetic";
    case ImageSource::external:
      return "external";
  }
  return "stream";
}

std::optional<ImageSource> parse_image_source(std::string_view text) {
  if (text == "stream") return ImageSource::stream;
  if (text == "synthetic") return ImageSource::synthetic;
  if (text == "external") return ImageSource::external;
  return std::nullopt;
}

std::int64_t intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept {
  const std::int64_t w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const std::int64_t h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (w <= 0 || h <= 0) return 0;
  return w * h;
}

void validate(const WebImage& image, std::size_t class_count) {
  if (image.id.empty()) throw InvalidArgument("image with empty id");
  if (image.width < 1 || image.height < 1) {
    throw InvalidArgument("image '" + image.id + "' has non-positive dimensions");
  }
  if (image.weak_label < 1 || static_cast<std::size_t>(image.weak_label) > class_count) {
    throw InvalidArgument("image '" + image.id + "' has unknown weak label " +
                          std::to_string(image.weak_label));
  }
}

void validate(const AnnotatedImage& record, std::size_t class_count) {
  validate(record.image, class_count);
  for (const auto& truth : record.truths) {
    if (truth.cls < 1 || static_cast<std::size_t>(truth.cls) > class_count) {
      throw InvalidArgument("image '" + record.image.id + "' has a box of unknown class " +
                            std::to_string(truth.cls));
    }
    if (!truth.box.fits(record.image.width, record.image.height)) {
      throw InvalidArgument("image '" + record.image.id + "' has a box outside its bounds");
    }
  }
}

void validate(const Detection& detection) {
  if (!(detection.score >= 0.0 && detection.score <= 1.0)) {
    throw InvalidArgument("detection score outside [0,1]");
  }
  if (!detection.box.valid()) throw InvalidArgument("detection with degenerate box");
}

std::vector<WebImage> images_of(std::span<const AnnotatedImage> records) {
  std::vector<WebImage> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.image);
  return out;
}

// ---- ClassRegistry -------------------------------------------------------

ClassRegistry::ClassRegistry(const std::vector<std::string>& names) {
  for (const auto& n : names) add(n);
}

ClassId ClassRegistry::add(std::string name, std::vector<std::string> icon_refs) {
  if (name.empty()) throw InvalidArgument("class with empty name");
  if (by_name_.contains(name)) throw InvalidArgument("duplicate class name '" + name + "'");
  const auto id = static_cast<ClassId>(classes_.size() + 1);
  by_name_.emplace(name, id);
  classes_.push_back(LogoClass{id, std::move(name), std::move(icon_refs)});
  return id;
}

std::optional<ClassId> ClassRegistry::find(std::string_view name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

ClassId ClassRegistry::id_of(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw InvalidArgument("unknown class name '" + std::string(name) + "'");
}

const LogoClass& ClassRegistry::at(ClassId id) const {
  if (!contains(id)) throw InvalidArgument("unknown class id " + std::to_string(id));
  return classes_[static_cast<std::size_t>(id - 1)];
}

void ClassRegistry::set_icons(ClassId id, std::vector<std::string> icon_refs) {
  if (!contains(id)) throw InvalidArgument("unknown class id " + std::to_string(id));
  classes_[static_cast<std::size_t>(id - 1)].icon_refs = std::move(icon_refs);
}

// ---- random --------------------------------------------------------------

double normal_from_bits(std::uint64_t a, std::uint64_t b) noexcept {
  // u1 in (0,1] so the log is finite.
  const double u1 = 1.0 - to_unit(a);
  const double u2 = to_unit(b);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("Rng::below(0)");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw InvalidArgument("Rng::between with hi < lo");
  return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

double Rng::normal() {
  const auto a = engine_();
  const auto b = engine_();
  return normal_from_bits(a, b);
}

}  // namespace logoco
