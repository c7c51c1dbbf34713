#include <doctest.h>

#include <cstdio>
#include <set>

#include <jpeglib.h>

#include "helpers.hpp"
#include "oracles.hpp"
#include "logoco/compositor/compositor.hpp"
#include "logoco/core/error.hpp"

using namespace logoco;

namespace {

Image solid(int w, int h, Image::Pixel px) { return Image(w, h, px); }

Image noisy(int w, int h, Rng& rng) {
  Image img(w, h);
  for (auto& b : img.bytes()) b = static_cast<std::uint8_t>(rng.below(256));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      auto p = img.at(x, y);
      p[3] = 255;
      img.set(x, y, p);
    }
  return img;
}

using oracle::measure_diff;

void write_jpeg(const Image& img, const std::filesystem::path& path, int quality) {
  FILE* f = std::fopen(path.c_str(), "wb");
  REQUIRE(f != nullptr);
  jpeg_compress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, f);
  cinfo.image_width = static_cast<JDIMENSION>(img.width());
  cinfo.image_height = static_cast<JDIMENSION>(img.height());
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  std::vector<JSAMPLE> row(static_cast<std::size_t>(img.width()) * 3);
  while (cinfo.next_scanline < cinfo.image_height) {
    const int y = static_cast<int>(cinfo.next_scanline);
    for (int x = 0; x < img.width(); ++x) {
      const auto p = img.at(x, y);
      for (int c = 0; c < 3; ++c) row[static_cast<std::size_t>(x) * 3 + c] = p[c];
    }
    JSAMPROW rows[1] = {row.data()};
    jpeg_write_scanlines(&cinfo, rows, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  std::fclose(f);
}

WebImage web(const std::string& id, ClassId cls) { return {id, 100, 80, id + ".jpg", cls, ImageSource::stream}; }

}  // namespace

TEST_SUITE("compositor") {

TEST_CASE("identity transform places the icon at the position") {
  const auto icon = solid(50, 50, {200, 10, 10, 255});
  const auto bg = solid(200, 200, {0, 0, 0, 255});
  const auto c = composite(icon, bg, TransformSpec{}, Point{10, 20});
  CHECK(c.box == BoundingBox{10, 20, 60, 70});
  CHECK(c.canvas.at(10, 20) == Image::Pixel{200, 10, 10, 255});
  CHECK(c.canvas.at(9, 20) == Image::Pixel{0, 0, 0, 255});
  CHECK(measure_diff(c.canvas, bg) == c.box);
}

TEST_CASE("scale doubles the extent") {
  TransformSpec t;
  t.scale = 2.0;
  const auto c = composite(solid(50, 50, {1, 2, 3, 255}), solid(200, 200, {90, 90, 90, 255}), t, Point{0, 0});
  CHECK(c.box == BoundingBox{0, 0, 100, 100});
  CHECK(measure_diff(c.canvas, solid(200, 200, {90, 90, 90, 255})) == c.box);
}

TEST_CASE("quarter turn swaps the sides") {
  TransformSpec t;
  t.rotation_deg = 90.0;
  const auto icon = solid(40, 20, {5, 200, 5, 255});
  CHECK(transformed_extent({40, 20}, t) == ImageSize{20, 40});
  const auto bg = solid(100, 100, {0, 0, 0, 255});
  const auto c = composite(icon, bg, t, Point{5, 5});
  CHECK(c.box == BoundingBox{5, 5, 25, 45});
  CHECK(measure_diff(c.canvas, bg) == c.box);
}

TEST_CASE("transformed extent equals the hull of the rotated corners") {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const int w = static_cast<int>(rng.between(1, 80));
    const int h = static_cast<int>(rng.between(1, 80));
    TransformSpec t;
    t.scale = rng.uniform(0.2, 3.0);
    t.rotation_deg = rng.uniform(-180, 180);
    const double th = t.rotation_deg * 3.14159265358979323846 / 180.0;
    double xs[4], ys[4];
    const double cx[4] = {-w / 2.0, w / 2.0, w / 2.0, -w / 2.0};
    const double cy[4] = {-h / 2.0, -h / 2.0, h / 2.0, h / 2.0};
    for (int k = 0; k < 4; ++k) {
      xs[k] = t.scale * (cx[k] * std::cos(th) - cy[k] * std::sin(th));
      ys[k] = t.scale * (cx[k] * std::sin(th) + cy[k] * std::cos(th));
    }
    const double hw = *std::max_element(xs, xs + 4) - *std::min_element(xs, xs + 4);
    const double hh = *std::max_element(ys, ys + 4) - *std::min_element(ys, ys + 4);
    const auto e = transformed_extent({w, h}, t);
    CHECK(std::abs(e.width - std::max(1.0, std::ceil(hw))) <= 1);
    CHECK(e.width >= hw - 1e-6);
    CHECK(e.height >= hh - 1e-6);
    CHECK(e.height < hh + 1.0 + 1e-6);
  }
}

TEST_CASE("icon larger than the background is an error") {
  TransformSpec t;
  t.scale = 5.0;
  CHECK_THROWS_AS(composite(solid(50, 50, {1, 1, 1, 255}), solid(200, 200, {0, 0, 0, 255}), t, Point{0, 0}),
                  InvalidArgument);
  CHECK_THROWS_AS(composite(solid(50, 50, {1, 1, 1, 255}), solid(200, 200, {0, 0, 0, 255}), TransformSpec{},
                            Point{151, 0}),
                  InvalidArgument);
  TransformSpec bad;
  bad.color_jitter = {1.6, 1.0, 1.0};
  CHECK_THROWS_AS(composite(solid(5, 5, {1, 1, 1, 255}), solid(20, 20, {0, 0, 0, 255}), bad, Point{0, 0}),
                  InvalidArgument);
  bad = {};
  bad.opacity = 0.0;
  CHECK_THROWS_AS(validate(bad), InvalidArgument);
  // Fully transparent icon leaves nothing to measure.
  CHECK_THROWS_AS(composite(solid(5, 5, {1, 1, 1, 0}), solid(20, 20, {0, 0, 0, 255}), TransformSpec{}, Point{0, 0}),
                  InvalidArgument);
}

TEST_CASE("pasted region re-measures exactly even when colours collide") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    auto icon = noisy(static_cast<int>(rng.between(3, 30)), static_cast<int>(rng.between(3, 30)), rng);
    // Transparent corners and a pixel that equals the background colour.
    icon.set(0, 0, {0, 0, 0, 0});
    const Image bg = solid(80, 80, {icon.at(1, 1)[0], icon.at(1, 1)[1], icon.at(1, 1)[2], 255});
    TransformSpec t;
    t.scale = rng.uniform(0.5, 2.0);
    t.rotation_deg = rng.uniform(-45, 45);
    for (auto& j : t.color_jitter) j = 1.0;
    try {
      const auto c = composite(icon, bg, t, rng);
      CHECK(measure_diff(c.canvas, bg) == c.box);
      CHECK(c.box.fits(bg.width(), bg.height()));
    } catch (const InvalidArgument&) {
      // too large for this background, legitimately rejected
      CHECK(transformed_extent({icon.width(), icon.height()}, t).width > 0);
    }
  }
}

TEST_CASE("synth_batch sizes, determinism and errors") {
  const std::vector<ImageRef> icons{{"icon:a", {40, 30}}, {"icon:b", {25, 60}}};
  const std::vector<ImageRef> bgs{{"bg:0", {320, 240}}, {"bg:1", {200, 500}}};
  CHECK(synth_batch(1, icons, 0, {}, 9).empty());
  const auto a = synth_batch(2, icons, 300, bgs, 42);
  const auto b = synth_batch(2, icons, 300, bgs, 42);
  const auto c = synth_batch(2, icons, 300, bgs, 43);
  REQUIRE(a.size() == 300);
  CHECK(a == b);
  CHECK(a != c);
  std::set<std::string> ids;
  for (const auto& r : a) {
    ids.insert(r.image.id);
    CHECK(r.image.source == ImageSource::synthetic);
    CHECK(r.image.weak_label == 2);
    REQUIRE(r.truths.size() == 1);
    CHECK(r.truths[0].cls == 2);
    CHECK(r.truths[0].box.fits(r.image.width, r.image.height));
  }
  CHECK(ids.size() == 300);
  // Image k depends only on (seed, k): a prefix of a larger batch is the smaller batch.
  const auto prefix = synth_batch(2, icons, 10, bgs, 42);
  CHECK(std::equal(prefix.begin(), prefix.end(), a.begin()));

  CHECK_THROWS_AS(synth_batch(1, icons, 1, {}, 0), InvalidArgument);
  CHECK_THROWS_AS(synth_batch(1, {}, 1, bgs, 0), InvalidArgument);
  SynthOptions bad;
  bad.ranges.min_fraction = 0.9;
  bad.ranges.max_fraction = 0.5;
  CHECK_THROWS_AS(synth_batch(1, icons, 1, bgs, 0, bad), InvalidArgument);
  SynthOptions no_dir;
  no_dir.render = true;
  CHECK_THROWS_AS(synth_batch(1, icons, 1, bgs, 0, no_dir), InvalidArgument);
}

TEST_CASE("classes times per-class count gives the batch total") {
  const std::vector<ImageRef> icons{{"icon", {10, 10}}};
  const std::vector<ImageRef> bgs{{"bg", {64, 64}}};
  std::size_t total = 0;
  for (ClassId cls = 1; cls <= 194; ++cls) total += synth_batch(cls, icons, 1000, bgs, cls).size();
  CHECK(total == 194000);
}

TEST_CASE("rendered batch writes PNGs whose diff equals the truth") {
  testing::TempDir dir("render");
  Rng rng(4);
  save_png(noisy(30, 20, rng), dir / "icon.png");
  save_png(solid(160, 120, {30, 60, 90, 255}), dir / "bg.png");
  const std::vector<ImageRef> icons{{(dir / "icon.png").string(), {30, 20}}};
  const std::vector<ImageRef> bgs{{(dir / "bg.png").string(), {160, 120}}};
  SynthOptions opt;
  opt.render = true;
  opt.output_dir = dir / "out";
  opt.id_prefix = "r";
  const auto batch = synth_batch(1, icons, 25, bgs, 8, opt);
  const auto bg = load_image(dir / "bg.png");
  for (const auto& rec : batch) {
    const auto img = load_image(rec.image.pixels);
    CHECK(measure_diff(img, bg) == rec.truths[0].box);
  }
  CHECK(std::filesystem::exists(dir / "out" / "r-0.png"));
}

TEST_CASE("context augmentation count") {
  CHECK(context_augment_count(500, 200) == 300);
  CHECK(context_augment_count(500, 700) == 0);
  CHECK(context_augment_count(500, 500) == 0);
  CHECK(context_augment_count(0, 0) == 0);
  for (std::size_t n_sf = 0; n_sf <= 500; ++n_sf) CHECK(n_sf + context_augment_count(500, n_sf) >= 500);
}

TEST_CASE("cross-class backgrounds exclude the target class") {
  const std::map<ClassId, std::vector<WebImage>> mined{{1, {web("p", 1), web("q", 1)}}, {2, {web("r", 2)}}};
  const auto only_r = cross_class_backgrounds(mined, 1, 5);
  REQUIRE(only_r.size() == 1);
  CHECK(only_r[0].path == "r.jpg");
  CHECK(only_r[0].size == ImageSize{100, 80});

  CHECK(cross_class_backgrounds({{1, {web("p", 1)}}}, 1, 5).empty());

  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    std::map<ClassId, std::vector<WebImage>> m;
    std::multiset<std::string> eligible;
    const auto target = static_cast<ClassId>(rng.between(1, 6));
    for (ClassId c = 1; c <= 5; ++c) {
      const auto n = rng.below(4);
      for (std::uint64_t k = 0; k < n; ++k) {
        m[c].push_back(web("c" + std::to_string(c) + "-" + std::to_string(k), c));
        if (c != target) eligible.insert(m[c].back().pixels);
      }
    }
    const auto got = cross_class_backgrounds(m, target, trial);
    std::multiset<std::string> paths;
    for (const auto& r : got) paths.insert(r.path);
    CHECK(paths == eligible);
    CHECK(got == cross_class_backgrounds(m, target, trial));
    if (eligible.size() > 2) CHECK(cross_class_backgrounds(m, target, trial, 2).size() == 2);
  }
}

TEST_CASE("PNG round trip and header probe") {
  testing::TempDir dir("png");
  Rng rng(1);
  auto img = noisy(37, 23, rng);
  img.set(3, 3, {1, 2, 3, 17});
  save_png(img, dir / "a.png");
  CHECK(load_image(dir / "a.png") == img);
  CHECK(probe_image_size(dir / "a.png") == ImageSize{37, 23});
  CHECK_FALSE(probe_image_size(dir / "missing.png").has_value());
  testing::write_file(dir / "junk.png", "not an image");
  CHECK_FALSE(probe_image_size(dir / "junk.png").has_value());
  CHECK_THROWS_AS(load_image(dir / "junk.png"), IoError);
  CHECK(has_image_extension("x.PNG"));
  CHECK(has_image_extension("x.jpeg"));
  CHECK_FALSE(has_image_extension("x.txt"));
}

TEST_CASE("JPEG decoding") {
  testing::TempDir dir("jpeg");
  const auto img = solid(48, 33, {120, 40, 200, 255});
  write_jpeg(img, dir / "a.jpg", 100);
  CHECK(probe_image_size(dir / "a.jpg") == ImageSize{48, 33});
  const auto back = load_image(dir / "a.jpg");
  REQUIRE(back.width() == 48);
  REQUIRE(back.height() == 33);
  for (int y = 0; y < 33; ++y)
    for (int x = 0; x < 48; ++x) {
      const auto p = back.at(x, y);
      CHECK(std::abs(p[0] - 120) <= 3);
      CHECK(std::abs(p[1] - 40) <= 3);
      CHECK(std::abs(p[2] - 200) <= 3);
      CHECK(p[3] == 255);
    }
}

TEST_CASE("icons resolve against a base directory") {
  testing::TempDir dir("icons");
  save_png(solid(12, 9, {1, 1, 1, 255}), dir / "n.png");
  LogoClass cls{1, "Nike", {"n.png"}};
  const auto refs = resolve_icons(cls, dir.path());
  REQUIRE(refs.size() == 1);
  CHECK(refs[0].size == ImageSize{12, 9});
  CHECK_THROWS_AS(resolve_icons(LogoClass{1, "Nike", {}}), InvalidArgument);
  CHECK_THROWS_AS(resolve_icons(LogoClass{1, "Nike", {"gone.png"}}, dir.path()), IoError);
}

}  // TEST_SUITE
