#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <vector>

#include "logoco/compositor/image.hpp"
#include "logoco/core/classes.hpp"
#include "logoco/detector/simulated.hpp"

namespace logoco {

/// Shape of a synthetic web pool for desk-scale runs of the learning loop.
struct WorldSpec {
  std::size_t classes = 8;
  /// Image count of the largest class; the others follow a power law.
  std::size_t max_class_images = 1500;
  /// Largest over smallest class count.
  double imbalance_ratio = 100.0;
  /// Chance that a pool image really contains its weak-label logo.
  double true_ratio = 0.4;
  std::size_t eval_per_class = 30;
  /// Eval images carrying a weak label but no logo.
  std::size_t eval_negatives_per_class = 10;
  std::size_t backgrounds = 40;
  std::size_t icons_per_class = 2;
  int min_side = 120;
  int max_side = 640;
  std::uint64_t seed = 0;
};

void validate(const WorldSpec& spec);

/// count_i = round(max * i^-a) for i = 1..m with a = ln(ratio) / ln(m), so the
/// first class holds `max` images and the last about max / ratio (at least 1).
std::vector<std::size_t> power_law_counts(std::size_t classes, std::size_t max, double ratio);

struct World {
  ClassRegistry classes;
  std::vector<WebImage> pool;
  /// Pool images with their hidden truths (the noise oracle).
  std::vector<AnnotatedImage> pool_truth;
  std::vector<AnnotatedImage> eval;
  /// Hidden truths of pool and eval images.
  std::shared_ptr<LatentTruth> latent;
  std::vector<ImageRef> backgrounds;
  std::map<ClassId, std::vector<ImageRef>> icons;
};

/// Deterministic in `spec.seed`. Icons and backgrounds are virtual references
/// (sizes only) until written with write_world.
World make_world(const WorldSpec& spec);

/// Writes the world under `dir`:
///   pool.manifest, eval.manifest, latent.manifest (pool with hidden truths),
///   icons/<class>/icon-<k>.png, backgrounds/bg-<k>.png.
/// Icon and background references of `world` are rewritten to the files.
void write_world(World& world, const std::filesystem::path& dir);

}  // namespace logoco
