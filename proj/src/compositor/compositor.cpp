#include "logoco/compositor/compositor.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "logoco/core/error.hpp"

namespace logoco {
namespace {

constexpr double kPi = 3.14159265358979323846;
// Absorbs floating error in cos/sin of exact right angles when taking ceil.
constexpr double kExtentSlack = 1e-9;

std::uint8_t clamp_channel(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

struct Plan {
  std::size_t background = 0;
  std::size_t icon = 0;
  TransformSpec transform;
  ImageSize extent;
  Point position;
};

Plan plan_one(Rng& rng, std::span<const ImageRef> icons, std::span<const ImageRef> backgrounds,
              const TransformRanges& ranges) {
  Plan plan;
  plan.background = static_cast<std::size_t>(rng.below(backgrounds.size()));
  plan.icon = static_cast<std::size_t>(rng.below(icons.size()));
  const auto bg = backgrounds[plan.background].size;
  const auto icon = icons[plan.icon].size;
  if (bg.width < 1 || bg.height < 1 || icon.width < 1 || icon.height < 1) {
    throw InvalidArgument("synthetic source image with unknown dimensions");
  }

  auto& t = plan.transform;
  const double fraction = rng.uniform(ranges.min_fraction, ranges.max_fraction);
  t.scale = fraction * std::min(bg.width, bg.height) / std::max(icon.width, icon.height);
  t.rotation_deg = rng.uniform(-ranges.max_rotation_deg, ranges.max_rotation_deg);
  for (auto& j : t.color_jitter) j = rng.uniform(ranges.min_jitter, ranges.max_jitter);
  t.opacity = ranges.opacity;

  // Rotation can push the enclosing rectangle past the background; shrink until it fits.
  plan.extent = transformed_extent(icon, t);
  for (int guard = 0; plan.extent.width > bg.width || plan.extent.height > bg.height; ++guard) {
    if (guard > 64) throw InvalidArgument("cannot fit icon into background");
    const double shrink = std::min(static_cast<double>(bg.width) / plan.extent.width,
                                   static_cast<double>(bg.height) / plan.extent.height);
    t.scale *= std::min(shrink, 0.999);
    plan.extent = transformed_extent(icon, t);
  }
  plan.position.x = static_cast<int>(rng.between(0, bg.width - plan.extent.width));
  plan.position.y = static_cast<int>(rng.between(0, bg.height - plan.extent.height));
  return plan;
}

}  // namespace

void validate(const TransformSpec& t) {
  if (!(t.scale > 0.0) || !std::isfinite(t.scale)) throw InvalidArgument("scale must be > 0");
  if (!std::isfinite(t.rotation_deg)) throw InvalidArgument("rotation must be finite");
  for (double j : t.color_jitter) {
    if (!(j >= 0.5 && j <= 1.5)) throw InvalidArgument("colour jitter must lie in [0.5, 1.5]");
  }
  if (!(t.opacity > 0.0 && t.opacity <= 1.0)) throw InvalidArgument("opacity must lie in (0, 1]");
}

void validate(const TransformRanges& r) {
  if (!(r.min_fraction > 0.0 && r.min_fraction <= r.max_fraction)) {
    throw InvalidArgument("icon size fraction range must satisfy 0 < min <= max");
  }
  if (!(r.max_rotation_deg >= 0.0)) throw InvalidArgument("rotation range must be >= 0");
  if (!(r.min_jitter >= 0.5 && r.min_jitter <= r.max_jitter && r.max_jitter <= 1.5)) {
    throw InvalidArgument("jitter range must lie within [0.5, 1.5]");
  }
  if (!(r.opacity > 0.0 && r.opacity <= 1.0)) throw InvalidArgument("opacity must lie in (0, 1]");
}

ImageSize transformed_extent(ImageSize icon, const TransformSpec& t) {
  const double theta = t.rotation_deg * kPi / 180.0;
  const double c = std::abs(std::cos(theta));
  const double s = std::abs(std::sin(theta));
  const double w = icon.width * t.scale;
  const double h = icon.height * t.scale;
  const auto extent = [](double v) {
    return std::max(1, static_cast<int>(std::ceil(v - kExtentSlack)));
  };
  return {extent(w * c + h * s), extent(w * s + h * c)};
}

Composite composite(const Image& icon, const Image& background, const TransformSpec& t,
                    Point position) {
  validate(t);
  if (icon.empty() || background.empty()) throw InvalidArgument("empty icon or background");
  const auto extent = transformed_extent({icon.width(), icon.height()}, t);
  if (extent.width > background.width() || extent.height > background.height()) {
    throw InvalidArgument("transformed icon " + std::to_string(extent.width) + "x" +
                          std::to_string(extent.height) + " is larger than the " +
                          std::to_string(background.width()) + "x" +
                          std::to_string(background.height()) + " background; rescale it");
  }
  if (position.x < 0 || position.y < 0 || position.x + extent.width > background.width() ||
      position.y + extent.height > background.height()) {
    throw InvalidArgument("transformed icon does not fit at the requested position");
  }

  Composite out{background, {}};
  const double theta = t.rotation_deg * kPi / 180.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double half_w = extent.width / 2.0;
  const double half_h = extent.height / 2.0;
  const double icon_cx = icon.width() / 2.0;
  const double icon_cy = icon.height() / 2.0;

  int min_x = background.width(), min_y = background.height(), max_x = -1, max_y = -1;
  for (int j = 0; j < extent.height; ++j) {
    for (int i = 0; i < extent.width; ++i) {
      // Inverse-map the output pixel centre into icon space (nearest neighbour).
      const double rx = i + 0.5 - half_w;
      const double ry = j + 0.5 - half_h;
      const double sx = (rx * cos_t + ry * sin_t) / t.scale + icon_cx;
      const double sy = (-rx * sin_t + ry * cos_t) / t.scale + icon_cy;
      const auto ix = static_cast<int>(std::floor(sx));
      const auto iy = static_cast<int>(std::floor(sy));
      if (ix < 0 || iy < 0 || ix >= icon.width() || iy >= icon.height()) continue;
      const auto src = icon.at(ix, iy);
      if (src[3] == 0) continue;

      const int x = position.x + i;
      const int y = position.y + j;
      const auto dst = background.at(x, y);
      const double alpha = src[3] / 255.0 * t.opacity;
      Image::Pixel px = dst;
      for (int ch = 0; ch < 3; ++ch) {
        const double fg = std::min(255.0, src[ch] * t.color_jitter[ch]);
        px[ch] = clamp_channel(alpha * fg + (1.0 - alpha) * dst[ch]);
      }
      px[3] = std::max(dst[3], clamp_channel(alpha * 255.0));
      if (px[0] == dst[0] && px[1] == dst[1] && px[2] == dst[2] && px[3] == dst[3]) {
        px[0] = dst[0] == 255 ? 254 : static_cast<std::uint8_t>(dst[0] + 1);
      }
      out.canvas.set(x, y, px);
      min_x = std::min(min_x, x);
      min_y = std::min(min_y, y);
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
    }
  }
  if (max_x < 0) throw InvalidArgument("icon has no visible pixels under this transform");
  out.box = BoundingBox{min_x, min_y, max_x + 1, max_y + 1};
  return out;
}

Composite composite(const Image& icon, const Image& background, const TransformSpec& t,
                    Rng& rng) {
  validate(t);
  const auto extent = transformed_extent({icon.width(), icon.height()}, t);
  if (extent.width > background.width() || extent.height > background.height()) {
    // Delegate for the diagnostic.
    return composite(icon, background, t, Point{0, 0});
  }
  Point p;
  p.x = static_cast<int>(rng.between(0, background.width() - extent.width));
  p.y = static_cast<int>(rng.between(0, background.height() - extent.height));
  return composite(icon, background, t, p);
}

std::vector<AnnotatedImage> synth_batch(ClassId cls, std::span<const ImageRef> icons,
                                        std::size_t n, std::span<const ImageRef> backgrounds,
                                        std::uint64_t seed, const SynthOptions& options) {
  std::vector<AnnotatedImage> out;
  if (n == 0) return out;
  if (backgrounds.empty()) throw InvalidArgument("synth_batch needs at least one background");
  if (icons.empty()) throw InvalidArgument("synth_batch needs at least one icon");
  validate(options.ranges);
  if (options.render) {
    if (options.output_dir.empty()) throw InvalidArgument("render requires an output directory");
    std::filesystem::create_directories(options.output_dir);
  }

  std::vector<std::optional<Image>> icon_cache(icons.size());
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Rng rng(hash_combine(seed, k));
    AnnotatedImage rec;
    auto& img = rec.image;
    img.id = options.id_prefix + "-" + std::to_string(k);
    img.weak_label = cls;
    img.source = ImageSource::synthetic;

    if (!options.render) {
      const auto plan = plan_one(rng, icons, backgrounds, options.ranges);
      const auto bg = backgrounds[plan.background].size;
      img.width = bg.width;
      img.height = bg.height;
      img.pixels = "synthetic:" + img.id;
      rec.truths.push_back(Truth{cls, BoundingBox{plan.position.x, plan.position.y,
                                                  plan.position.x + plan.extent.width,
                                                  plan.position.y + plan.extent.height}});
    } else {
      // Plan against the decoded sizes so the reference metadata cannot disagree with pixels.
      const auto bg_index = static_cast<std::size_t>(rng.below(backgrounds.size()));
      const Image background = load_image(backgrounds[bg_index].path);
      const std::array<ImageRef, 1> bg_ref{ImageRef{backgrounds[bg_index].path,
                                                    {background.width(), background.height()}}};
      std::vector<ImageRef> sized_icons(icons.begin(), icons.end());
      for (std::size_t i = 0; i < icons.size(); ++i) {
        if (!icon_cache[i]) icon_cache[i] = load_image(icons[i].path);
        sized_icons[i].size = {icon_cache[i]->width(), icon_cache[i]->height()};
      }
      const auto plan = plan_one(rng, sized_icons, bg_ref, options.ranges);
      auto comp = composite(*icon_cache[plan.icon], background, plan.transform, plan.position);
      const auto path = options.output_dir / (img.id + ".png");
      save_png(comp.canvas, path);
      img.width = comp.canvas.width();
      img.height = comp.canvas.height();
      img.pixels = path.string();
      rec.truths.push_back(Truth{cls, comp.box});
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<ImageRef> cross_class_backgrounds(const std::map<ClassId, std::vector<WebImage>>& mined,
                                              ClassId target, std::uint64_t seed,
                                              std::size_t max_count) {
  std::vector<ImageRef> eligible;
  for (const auto& [cls, images] : mined) {
    if (cls == target) continue;
    for (const auto& img : images) eligible.push_back(ref_of(img));
  }
  Rng rng(seed);
  // Fisher-Yates with the portable generator.
  for (std::size_t i = eligible.size(); i > 1; --i) {
    std::swap(eligible[i - 1], eligible[static_cast<std::size_t>(rng.below(i))]);
  }
  if (max_count != 0 && eligible.size() > max_count) eligible.resize(max_count);
  return eligible;
}

ImageRef ref_of(const WebImage& image) {
  return ImageRef{image.pixels, {image.width, image.height}};
}

std::vector<ImageRef> resolve_icons(const LogoClass& cls, const std::filesystem::path& base) {
  if (cls.icon_refs.empty()) throw InvalidArgument("class '" + cls.name + "' has no icons");
  std::vector<ImageRef> out;
  for (const auto& ref : cls.icon_refs) {
    std::filesystem::path p(ref);
    if (p.is_relative() && !base.empty()) p = base / p;
    const auto size = probe_image_size(p);
    if (!size) throw IoError("cannot read icon '" + p.string() + "' of class '" + cls.name + "'");
    out.push_back(ImageRef{p.string(), *size});
  }
  return out;
}

}  // namespace logoco
