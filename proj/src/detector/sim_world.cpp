#include "logoco/detector/sim_world.hpp"

#include <algorithm>
#include <cmath>

#include "logoco/core/error.hpp"
#include "logoco/core/manifest.hpp"
#include "logoco/core/random.hpp"

namespace logoco {
namespace {

std::string two_digits(std::size_t i) {
  return (i < 10 ? "0" : "") + std::to_string(i);
}

// One logo instance somewhere inside a w x h image.
BoundingBox random_box(Rng& rng, int w, int h) {
  const int side = std::min(w, h);
  const int bw = std::max(8, static_cast<int>(side * rng.uniform(0.15, 0.5)));
  const int bh = std::max(8, static_cast<int>(bw * rng.uniform(0.6, 1.0)));
  const int x = static_cast<int>(rng.between(0, w - bw));
  const int y = static_cast<int>(rng.between(0, h - bh));
  return {x, y, x + bw, y + bh};
}

WebImage random_image(Rng& rng, const WorldSpec& spec, std::string id, ClassId cls) {
  WebImage img;
  img.id = std::move(id);
  img.width = static_cast<int>(rng.between(spec.min_side, spec.max_side));
  img.height = static_cast<int>(rng.between(spec.min_side, spec.max_side));
  img.pixels = "sim/" + img.id + ".jpg";
  img.weak_label = cls;
  img.source = ImageSource::stream;
  return img;
}

Image icon_pixels(ImageSize size, std::uint64_t seed) {
  Rng rng(seed);
  const Image::Pixel colour{static_cast<std::uint8_t>(rng.below(256)),
                            static_cast<std::uint8_t>(rng.below(256)),
                            static_cast<std::uint8_t>(rng.below(256)), 255};
  const Image::Pixel accent{static_cast<std::uint8_t>(255 - colour[0]),
                            static_cast<std::uint8_t>(255 - colour[1]),
                            static_cast<std::uint8_t>(255 - colour[2]), 255};
  Image img(size.width, size.height, {0, 0, 0, 0});
  const double cx = size.width / 2.0, cy = size.height / 2.0;
  const double r = std::min(cx, cy);
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      const double dx = (x + 0.5 - cx) / r, dy = (y + 0.5 - cy) / r;
      const double d = dx * dx + dy * dy;
      if (d <= 1.0) img.set(x, y, d < 0.3 ? accent : colour);
    }
  }
  return img;
}

Image background_pixels(ImageSize size, std::uint64_t seed) {
  Rng rng(seed);
  const int base = static_cast<int>(rng.below(160));
  Image img(size.width, size.height);
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      const auto v = static_cast<std::uint8_t>(base + (x * 64) / size.width + (y * 32) / size.height);
      img.set(x, y, {v, static_cast<std::uint8_t>(255 - v), static_cast<std::uint8_t>(v / 2), 255});
    }
  }
  return img;
}

}  // namespace

void validate(const WorldSpec& s) {
  if (s.classes < 1) throw InvalidArgument("world needs at least one class");
  if (s.max_class_images < 1) throw InvalidArgument("max_class_images must be >= 1");
  if (!(s.imbalance_ratio >= 1.0)) throw InvalidArgument("imbalance ratio must be >= 1");
  if (!(s.true_ratio >= 0.0 && s.true_ratio <= 1.0)) throw InvalidArgument("true ratio must lie in [0,1]");
  if (s.backgrounds < 1 || s.icons_per_class < 1) {
    throw InvalidArgument("world needs backgrounds and icons");
  }
  if (s.min_side < 32 || s.max_side < s.min_side) throw InvalidArgument("bad image side range");
}

std::vector<std::size_t> power_law_counts(std::size_t classes, std::size_t max, double ratio) {
  std::vector<std::size_t> out;
  if (classes == 0) return out;
  const double a = classes == 1 ? 0.0 : std::log(ratio) / std::log(static_cast<double>(classes));
  for (std::size_t i = 1; i <= classes; ++i) {
    const double v = static_cast<double>(max) * std::pow(static_cast<double>(i), -a);
    out.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(v))));
  }
  return out;
}

World make_world(const WorldSpec& spec) {
  validate(spec);
  World w;
  w.latent = std::make_shared<LatentTruth>();
  for (std::size_t c = 1; c <= spec.classes; ++c) w.classes.add("logo" + two_digits(c));

  const auto counts = power_law_counts(spec.classes, spec.max_class_images, spec.imbalance_ratio);
  Rng rng(hash_combine(spec.seed, 0x776f726c64ULL));
  for (std::size_t c = 1; c <= spec.classes; ++c) {
    const auto cls = static_cast<ClassId>(c);
    for (std::size_t k = 0; k < counts[c - 1]; ++k) {
      AnnotatedImage rec;
      rec.image = random_image(rng, spec, "web-" + two_digits(c) + "-" + std::to_string(k), cls);
      if (rng.uniform() < spec.true_ratio) {
        rec.truths.push_back(Truth{cls, random_box(rng, rec.image.width, rec.image.height)});
      }
      w.latent->add(rec.image.id, rec.truths);
      w.pool.push_back(rec.image);
      w.pool_truth.push_back(std::move(rec));
    }
    for (std::size_t k = 0; k < spec.eval_per_class + spec.eval_negatives_per_class; ++k) {
      AnnotatedImage rec;
      rec.image = random_image(rng, spec, "eval-" + two_digits(c) + "-" + std::to_string(k), cls);
      if (k < spec.eval_per_class) {
        rec.truths.push_back(Truth{cls, random_box(rng, rec.image.width, rec.image.height)});
      }
      w.latent->add(rec.image.id, rec.truths);
      w.eval.push_back(std::move(rec));
    }
    auto& icons = w.icons[cls];
    for (std::size_t k = 0; k < spec.icons_per_class; ++k) {
      const int side = static_cast<int>(rng.between(32, 64));
      icons.push_back(ImageRef{"icon:" + w.classes.name(cls) + "-" + std::to_string(k),
                               {side, static_cast<int>(rng.between(side / 2, side))}});
    }
  }
  for (std::size_t k = 0; k < spec.backgrounds; ++k) {
    w.backgrounds.push_back(ImageRef{"background:" + std::to_string(k),
                                     {static_cast<int>(rng.between(spec.min_side, spec.max_side)),
                                      static_cast<int>(rng.between(spec.min_side, spec.max_side))}});
  }
  return w;
}

void write_world(World& world, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "icons");
  fs::create_directories(dir / "backgrounds");
  const auto pool = [&] {
    std::vector<AnnotatedImage> recs;
    for (const auto& img : world.pool) recs.push_back(AnnotatedImage{img, {}});
    return recs;
  }();
  save_manifest(pool, world.classes, dir / "pool.manifest");
  save_manifest(world.eval, world.classes, dir / "eval.manifest");
  save_manifest(world.pool_truth, world.classes, dir / "latent.manifest");

  for (auto& [cls, icons] : world.icons) {
    const auto& name = world.classes.name(cls);
    fs::create_directories(dir / "icons" / name);
    std::vector<std::string> refs;
    for (std::size_t k = 0; k < icons.size(); ++k) {
      const auto rel = fs::path("icons") / name / ("icon-" + std::to_string(k) + ".png");
      save_png(icon_pixels(icons[k].size, hash_string(icons[k].path)), dir / rel);
      icons[k].path = (dir / rel).string();
      refs.push_back(rel.string());
    }
    world.classes.set_icons(cls, refs);
  }
  for (std::size_t k = 0; k < world.backgrounds.size(); ++k) {
    auto& bg = world.backgrounds[k];
    const auto path = dir / "backgrounds" / ("bg-" + two_digits(k) + ".png");
    save_png(background_pixels(bg.size, hash_string(bg.path)), path);
    bg.path = path.string();
  }
}

}  // namespace logoco
