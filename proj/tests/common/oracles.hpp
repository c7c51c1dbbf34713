#pragma once

// Reference implementations used as test oracles. They are written for
// clarity, not speed, and share no code with the library.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include "logoco/compositor/image.hpp"
#include "logoco/core/random.hpp"
#include "logoco/core/types.hpp"
#include "logoco/evalkit/evalkit.hpp"

namespace oracle {

// IoU by counting covered pixels one by one.
inline double pixel_iou(const logoco::BoundingBox& a, const logoco::BoundingBox& b) {
  const int x0 = std::min(a.x_min, b.x_min), x1 = std::max(a.x_max, b.x_max);
  const int y0 = std::min(a.y_min, b.y_min), y1 = std::max(a.y_max, b.y_max);
  long inter = 0, uni = 0;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      const bool in_a = x >= a.x_min && x < a.x_max && y >= a.y_min && y < a.y_max;
      const bool in_b = x >= b.x_min && x < b.x_max && y >= b.y_min && y < b.y_max;
      inter += in_a && in_b;
      uni += in_a || in_b;
    }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// IoU from interval overlaps.
inline double area_iou(const logoco::BoundingBox& a, const logoco::BoundingBox& b) {
  const long w = std::max(0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
  const long h = std::max(0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
  const long inter = w * h;
  const long ua = static_cast<long>(a.x_max - a.x_min) * (a.y_max - a.y_min);
  const long ub = static_cast<long>(b.x_max - b.x_min) * (b.y_max - b.y_min);
  const long uni = ua + ub - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

// Greedy matching by repeated selection of the best remaining detection.
inline std::vector<bool> match(const std::vector<logoco::Detection>& dets,
                               const std::vector<logoco::Truth>& truths, double thr, bool strict) {
  std::vector<bool> done(dets.size(), false), tp(dets.size(), false), used(truths.size(), false);
  for (std::size_t round = 0; round < dets.size(); ++round) {
    std::size_t pick = dets.size();
    for (std::size_t d = 0; d < dets.size(); ++d) {
      if (!done[d] && (pick == dets.size() || dets[d].score > dets[pick].score)) pick = d;
    }
    done[pick] = true;
    std::size_t best = truths.size();
    double best_iou = -1;
    for (std::size_t t = 0; t < truths.size(); ++t) {
      if (used[t] || truths[t].cls != dets[pick].cls) continue;
      const double v = area_iou(dets[pick].box, truths[t].box);
      if (v > best_iou) {
        best_iou = v;
        best = t;
      }
    }
    if (best < truths.size() && (strict ? best_iou > thr : best_iou >= thr)) {
      used[best] = true;
      tp[pick] = true;
    }
  }
  return tp;
}

// AP by enumerating every cut of the global ranking. All-points: each true
// positive contributes 1/npos times the best precision at any deeper cut.
// Eleven-point: mean over recall levels of the best precision reaching them.
inline std::optional<double> average_precision(logoco::ClassId cls,
                                               const std::vector<logoco::eval::EvalImage>& images,
                                               bool eleven_point, double thr = 0.5,
                                               bool strict = false) {
  struct Ranked {
    double score;
    std::size_t image, index;
    bool tp;
  };
  std::vector<Ranked> all;
  std::size_t npos = 0;
  for (std::size_t i = 0; i < images.size(); ++i) {
    std::vector<logoco::Detection> dets;
    std::vector<logoco::Truth> truths;
    for (const auto& d : images[i].detections)
      if (d.cls == cls) dets.push_back(d);
    for (const auto& t : images[i].truths)
      if (t.cls == cls) truths.push_back(t);
    npos += truths.size();
    const auto tp = match(dets, truths, thr, strict);
    for (std::size_t k = 0; k < dets.size(); ++k) all.push_back({dets[k].score, i, k, tp[k]});
  }
  if (npos == 0) return std::nullopt;
  // Insertion sort: descending score, ties by (image, index).
  for (std::size_t i = 1; i < all.size(); ++i) {
    for (std::size_t j = i; j > 0; --j) {
      const auto& a = all[j - 1];
      const auto& b = all[j];
      const bool swap = b.score > a.score ||
                        (b.score == a.score && (b.image < a.image || (b.image == a.image && b.index < a.index)));
      if (!swap) break;
      std::swap(all[j - 1], all[j]);
    }
  }
  std::vector<double> prec(all.size()), rec(all.size());
  for (std::size_t cut = 1; cut <= all.size(); ++cut) {
    std::size_t tp = 0;
    for (std::size_t k = 0; k < cut; ++k) tp += all[k].tp;
    prec[cut - 1] = static_cast<double>(tp) / static_cast<double>(cut);
    rec[cut - 1] = static_cast<double>(tp) / static_cast<double>(npos);
  }
  if (eleven_point) {
    double sum = 0;
    for (int s = 0; s <= 10; ++s) {
      double best = 0;
      for (std::size_t k = 0; k < all.size(); ++k)
        if (rec[k] >= s / 10.0) best = std::max(best, prec[k]);
      sum += best;
    }
    return sum / 11.0;
  }
  double ap = 0;
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (!all[k].tp) continue;
    double best = 0;
    for (std::size_t j = k; j < all.size(); ++j) best = std::max(best, prec[j]);
    ap += best / static_cast<double>(npos);
  }
  return ap;
}

// Tight rectangle of the pixels that differ between two same-sized rasters.
inline std::optional<logoco::BoundingBox> measure_diff(const logoco::Image& a, const logoco::Image& b) {
  int x0 = a.width(), y0 = a.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      if (a.at(x, y) == b.at(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  if (x1 < 0) return std::nullopt;
  return logoco::BoundingBox{x0, y0, x1 + 1, y1 + 1};
}

// Random evaluation instance: boxes clustered so overlaps are common.
inline std::vector<logoco::eval::EvalImage> random_instance(logoco::Rng& rng, int max_dets, int max_truths,
                                                            int classes, bool ties) {
  const auto n_images = static_cast<std::size_t>(rng.between(1, 4));
  std::vector<logoco::eval::EvalImage> images(n_images);
  const auto n_truths = rng.between(0, max_truths);
  const auto n_dets = rng.between(0, max_dets);
  auto box_near = [&](const logoco::BoundingBox& c) {
    auto j = [&] { return static_cast<int>(rng.between(-6, 6)); };
    logoco::BoundingBox b{std::max(0, c.x_min + j()), std::max(0, c.y_min + j()), c.x_max + j(), c.y_max + j()};
    if (b.x_max <= b.x_min) b.x_max = b.x_min + 1;
    if (b.y_max <= b.y_min) b.y_max = b.y_min + 1;
    return b;
  };
  auto random_box = [&] {
    const int x = static_cast<int>(rng.between(0, 60)), y = static_cast<int>(rng.between(0, 60));
    return logoco::BoundingBox{x, y, x + static_cast<int>(rng.between(5, 40)), y + static_cast<int>(rng.between(5, 40))};
  };
  for (std::int64_t t = 0; t < n_truths; ++t) {
    auto& img = images[rng.below(n_images)];
    img.truths.push_back({static_cast<logoco::ClassId>(rng.between(1, classes)), random_box()});
  }
  for (std::int64_t d = 0; d < n_dets; ++d) {
    const auto i = rng.below(n_images);
    auto& img = images[i];
    logoco::Detection det;
    det.score = ties ? static_cast<double>(rng.below(5)) / 4.0 : rng.uniform();
    if (!img.truths.empty() && rng.uniform() < 0.7) {
      const auto& t = img.truths[rng.below(img.truths.size())];
      det.cls = rng.uniform() < 0.85 ? t.cls : static_cast<logoco::ClassId>(rng.between(1, classes));
      det.box = box_near(t.box);
    } else {
      det.cls = static_cast<logoco::ClassId>(rng.between(1, classes));
      det.box = random_box();
    }
    img.detections.push_back(det);
  }
  return images;
}

}  // namespace oracle
