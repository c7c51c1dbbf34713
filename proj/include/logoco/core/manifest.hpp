#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "logoco/core/classes.hpp"
#include "logoco/core/types.hpp"

namespace logoco {

// Line format, one image per line, TAB separated, LF terminated:
//   id  relative_path  width  height  weak_label_name  source  [class:x_min,y_min,x_max,y_max ...]
// A line without box columns is a plain web image (an annotated record with
// no truths). Detection manifests use scored tokens `class:x_min,y_min,x_max,y_max@score`.

std::vector<AnnotatedImage> parse_manifest(std::istream& in, const ClassRegistry& classes);
std::vector<AnnotatedImage> load_manifest(const std::filesystem::path& path,
                                          const ClassRegistry& classes);

std::string format_record(const AnnotatedImage& record, const ClassRegistry& classes);
void write_manifest(std::span<const AnnotatedImage> records, const ClassRegistry& classes,
                    std::ostream& out);
void save_manifest(std::span<const AnnotatedImage> records, const ClassRegistry& classes,
                   const std::filesystem::path& path);

struct ScoredRecord {
  WebImage image;
  std::vector<Detection> detections;

  friend bool operator==(const ScoredRecord&, const ScoredRecord&) = default;
};

std::vector<ScoredRecord> parse_detection_manifest(std::istream& in, const ClassRegistry& classes);
std::vector<ScoredRecord> load_detection_manifest(const std::filesystem::path& path,
                                                  const ClassRegistry& classes);
void save_detection_manifest(std::span<const ScoredRecord> records, const ClassRegistry& classes,
                             const std::filesystem::path& path);

/// Class names referenced by a manifest (weak labels and box tokens), in
/// order of first appearance. Used when no class list is configured.
std::vector<std::string> scan_class_names(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace logoco
