#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "logoco/compositor/image.hpp"
#include "logoco/core/random.hpp"
#include "logoco/core/types.hpp"

namespace logoco {

/// Colour and geometric transform applied to an icon before pasting.
struct TransformSpec {
  /// Multiplicative size factor on the icon.
  double scale = 1.0;
  /// Rotation about the icon centre; positive turns clockwise on screen (y points down).
  double rotation_deg = 0.0;
  /// Per-channel (R, G, B) multiplicative factors, each in [0.5, 1.5].
  std::array<double, 3> color_jitter{1.0, 1.0, 1.0};
  /// Global opacity in (0, 1], multiplied into the icon alpha.
  double opacity = 1.0;
};

void validate(const TransformSpec& transform);

struct Point {
  int x = 0;
  int y = 0;
};

/// Size of the axis-aligned rectangle enclosing the transformed icon.
ImageSize transformed_extent(ImageSize icon, const TransformSpec& transform);

struct Composite {
  Image canvas;
  /// Tight rectangle of every pixel the icon was blended into.
  BoundingBox box;
};

/// Pastes `icon` onto a copy of `background` with the enclosing rectangle's
/// top-left corner at `position`. Every pasted pixel is guaranteed to differ
/// from the background pixel beneath it, so the box can be re-measured from
/// the pixels alone. Throws InvalidArgument when the transformed icon does not
/// fit at `position` or has no visible pixels.
Composite composite(const Image& icon, const Image& background, const TransformSpec& transform,
                    Point position);
/// As above with a position drawn uniformly among those that fit.
Composite composite(const Image& icon, const Image& background, const TransformSpec& transform,
                    Rng& rng);

/// Sampling ranges for synthetic transforms. Icon size is drawn as a fraction
/// of the background's smaller dimension (applied to the icon's longer side).
struct TransformRanges {
  double min_fraction = 0.3;
  double max_fraction = 1.0;
  double max_rotation_deg = 15.0;
  double min_jitter = 0.8;
  double max_jitter = 1.2;
  double opacity = 1.0;
};

void validate(const TransformRanges& ranges);

struct SynthOptions {
  TransformRanges ranges;
  /// When false only the geometry is planned and no pixels are produced; the
  /// recorded box is then the analytic enclosing rectangle.
  bool render = false;
  /// Where rendered PNGs go. Required when `render` is set.
  std::filesystem::path output_dir;
  /// Prefix for generated image ids; ids are `<prefix>-<index>`.
  std::string id_prefix = "syn";
};

/// Generates `n` single-instance synthetic images of class `cls`. Backgrounds
/// and icons are drawn with replacement; image k uses a generator seeded from
/// (seed, k) so batches are reproducible and parallelisable.
std::vector<AnnotatedImage> synth_batch(ClassId cls, std::span<const ImageRef> icons,
                                        std::size_t n, std::span<const ImageRef> backgrounds,
                                        std::uint64_t seed, const SynthOptions& options = {});

/// Number of synthetic images topping class i up to `n_cls` new images:
/// max(0, n_cls - n_sf).
constexpr std::size_t context_augment_count(std::size_t n_cls, std::size_t n_sf) noexcept {
  return n_sf >= n_cls ? 0 : n_cls - n_sf;
}

/// Backgrounds for class `target` drawn from images mined for other classes.
/// Returns a seeded shuffle of the eligible images, truncated to `max_count`
/// (0 keeps all). Empty when no other class has mined images; callers then
/// fall back to the bootstrap background pool.
std::vector<ImageRef> cross_class_backgrounds(const std::map<ClassId, std::vector<WebImage>>& mined,
                                              ClassId target, std::uint64_t seed,
                                              std::size_t max_count = 0);

ImageRef ref_of(const WebImage& image);

/// Probes every icon reference of a class (relative paths resolved against
/// `base`). Throws IoError for unreadable icons and InvalidArgument when the
/// class has none.
std::vector<ImageRef> resolve_icons(const LogoClass& cls, const std::filesystem::path& base = {});

}  // namespace logoco
