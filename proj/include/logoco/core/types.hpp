#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace logoco {

/// Dense class index in 1..m.
using ClassId = int;

struct LogoClass {
  ClassId id = 0;
  std::string name;
  std::vector<std::string> icon_refs;
};

enum class ImageSource { stream, synthetic, external };

std::string_view to_string(ImageSource source);
std::optional<ImageSource> parse_image_source(std::string_view text);

/// Integer pixel rectangle, max coordinates exclusive.
struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const noexcept { return x_max - x_min; }
  int height() const noexcept { return y_max - y_min; }
  std::int64_t area() const noexcept {
    return static_cast<std::int64_t>(width()) * height();
  }
  bool valid() const noexcept {
    return x_min >= 0 && y_min >= 0 && x_min < x_max && y_min < y_max;
  }
  bool fits(int image_width, int image_height) const noexcept {
    return valid() && x_max <= image_width && y_max <= image_height;
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct WebImage {
  std::string id;
  int width = 0;
  int height = 0;
  /// Reference to the pixel payload (file path, possibly relative to a manifest).
  std::string pixels;
  ClassId weak_label = 0;
  ImageSource source = ImageSource::stream;

  friend bool operator==(const WebImage&, const WebImage&) = default;
};

struct Truth {
  ClassId cls = 0;
  BoundingBox box;

  friend bool operator==(const Truth&, const Truth&) = default;
};

struct Detection {
  ClassId cls = 0;
  double score = 0.0;
  BoundingBox box;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct AnnotatedImage {
  WebImage image;
  std::vector<Truth> truths;

  friend bool operator==(const AnnotatedImage&, const AnnotatedImage&) = default;
};

/// Intersection area of two boxes (0 when disjoint).
std::int64_t intersection_area(const BoundingBox& a, const BoundingBox& b) noexcept;

/// Throws InvalidArgument when a type invariant is violated. `class_count` bounds weak labels.
void validate(const WebImage& image, std::size_t class_count);
void validate(const AnnotatedImage& record, std::size_t class_count);
void validate(const Detection& detection);

std::vector<WebImage> images_of(std::span<const AnnotatedImage> records);

}  // namespace logoco
