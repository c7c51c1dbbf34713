#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "logoco/core/types.hpp"

namespace logoco::eval {

/// Intersection over union; 0 for disjoint boxes.
double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

enum class Interpolation { all_points, eleven_point };

struct MatchOptions {
  double iou_threshold = 0.5;
  /// Require IoU strictly above the threshold instead of at-or-above.
  bool strict = false;
};

/// TP/FP label for each detection, index-aligned with the input. Per class,
/// detections are visited in descending score order (ties keep input order)
/// and each claims the unmatched same-class truth of highest IoU when that
/// IoU passes the threshold.
std::vector<bool> match_detections(std::span<const Detection> detections,
                                   std::span<const Truth> truths, const MatchOptions& options = {});

/// One evaluated image: what the detector returned and the ground truth.
struct EvalImage {
  std::vector<Detection> detections;
  std::vector<Truth> truths;
};

struct ApOptions {
  MatchOptions match;
  Interpolation interpolation = Interpolation::all_points;
};

/// Precision-recall points of one class over a dataset, as (tp flag) in the
/// global ranking. Exposed for diagnostics and tests.
struct RankedLabels {
  std::vector<bool> is_tp;  // descending score order
  std::size_t truth_count = 0;
};

RankedLabels rank_class(ClassId cls, std::span<const EvalImage> images, const MatchOptions& options);

/// Area under the PR curve for an already-ranked label list.
double ap_from_ranking(const RankedLabels& ranking, Interpolation interpolation);

/// AP of `cls`, or nullopt when the class has no truths (excluded from mAP).
std::optional<double> average_precision(ClassId cls, std::span<const EvalImage> images,
                                        const ApOptions& options = {});

struct ClassTally {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  friend bool operator==(const ClassTally&, const ClassTally&) = default;
};

struct EvalResult {
  std::map<ClassId, double> ap;  // evaluated classes only
  double map = 0.0;
  std::map<ClassId, ClassTally> tallies;
};

/// Unweighted mean of the APs. Throws InvalidArgument when empty.
double mean_ap(const std::map<ClassId, double>& ap);

/// Evaluates every class in 1..class_count that has at least one truth.
EvalResult evaluate(std::span<const EvalImage> images, std::size_t class_count,
                    const ApOptions& options = {});

}  // namespace logoco::eval
