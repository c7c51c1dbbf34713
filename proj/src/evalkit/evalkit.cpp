#include "logoco/evalkit/evalkit.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "logoco/core/error.hpp"

namespace logoco::eval {
namespace {

bool passes(double overlap, const MatchOptions& o) {
  return o.strict ? overlap > o.iou_threshold : overlap >= o.iou_threshold;
}

// Descending score, ties in input order.
std::vector<std::size_t> score_order(std::span<const Detection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  return order;
}

}  // namespace

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const auto inter = intersection_area(a, b);
  if (inter == 0) return 0.0;
  const auto uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<bool> match_detections(std::span<const Detection> detections,
                                   std::span<const Truth> truths, const MatchOptions& options) {
  std::vector<bool> tp(detections.size(), false);
  std::vector<bool> claimed(truths.size(), false);
  for (std::size_t d : score_order(detections)) {
    const auto& det = detections[d];
    double best = -1.0;
    std::size_t best_truth = truths.size();
    for (std::size_t t = 0; t < truths.size(); ++t) {
      if (claimed[t] || truths[t].cls != det.cls) continue;
      const double overlap = iou(det.box, truths[t].box);
      if (overlap > best) {
        best = overlap;
        best_truth = t;
      }
    }
    if (best_truth < truths.size() && passes(best, options)) {
      claimed[best_truth] = true;
      tp[d] = true;
    }
  }
  return tp;
}

RankedLabels rank_class(ClassId cls, std::span<const EvalImage> images, const MatchOptions& options) {
  // (score, image index, detection index, tp)
  std::vector<std::tuple<double, std::size_t, std::size_t, bool>> scored;
  RankedLabels out;
  std::vector<Detection> dets;
  std::vector<Truth> truths;
  for (std::size_t i = 0; i < images.size(); ++i) {
    dets.clear();
    truths.clear();
    for (const auto& d : images[i].detections) {
      if (d.cls == cls) dets.push_back(d);
    }
    for (const auto& t : images[i].truths) {
      if (t.cls == cls) truths.push_back(t);
    }
    out.truth_count += truths.size();
    const auto labels = match_detections(dets, truths, options);
    for (std::size_t k = 0; k < dets.size(); ++k) scored.emplace_back(dets[k].score, i, k, labels[k]);
  }
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
  out.is_tp.reserve(scored.size());
  for (const auto& s : scored) out.is_tp.push_back(std::get<3>(s));
  return out;
}

double ap_from_ranking(const RankedLabels& ranking, Interpolation interpolation) {
  if (ranking.truth_count == 0) throw InvalidArgument("AP is undefined without truths");
  const auto n = ranking.is_tp.size();
  std::vector<double> recall(n), precision(n);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (ranking.is_tp[k]) ++tp;
    recall[k] = static_cast<double>(tp) / static_cast<double>(ranking.truth_count);
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
  }

  if (interpolation == Interpolation::eleven_point) {
    double sum = 0.0;
    for (int step = 0; step <= 10; ++step) {
      const double r = step / 10.0;
      double best = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (recall[k] >= r) best = std::max(best, precision[k]);
      }
      sum += best;
    }
    return sum / 11.0;
  }

  // All-points: sentinel-padded envelope, summed over recall steps.
  std::vector<double> mrec(n + 2), mpre(n + 2);
  mrec[0] = 0.0;
  mpre[0] = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mrec[k + 1] = recall[k];
    mpre[k + 1] = precision[k];
  }
  mrec[n + 1] = 1.0;
  mpre[n + 1] = 0.0;
  for (std::size_t k = n + 1; k > 0; --k) mpre[k - 1] = std::max(mpre[k - 1], mpre[k]);
  double ap = 0.0;
  for (std::size_t k = 1; k < n + 2; ++k) {
    if (mrec[k] != mrec[k - 1]) ap += (mrec[k] - mrec[k - 1]) * mpre[k];
  }
  return ap;
}

std::optional<double> average_precision(ClassId cls, std::span<const EvalImage> images,
                                        const ApOptions& options) {
  const auto ranking = rank_class(cls, images, options.match);
  if (ranking.truth_count == 0) return std::nullopt;
  return ap_from_ranking(ranking, options.interpolation);
}

double mean_ap(const std::map<ClassId, double>& ap) {
  if (ap.empty()) throw InvalidArgument("mean AP needs at least one evaluated class");
  double sum = 0.0;
  for (const auto& [cls, v] : ap) sum += v;
  return sum / static_cast<double>(ap.size());
}

EvalResult evaluate(std::span<const EvalImage> images, std::size_t class_count,
                    const ApOptions& options) {
  EvalResult result;
  for (std::size_t c = 1; c <= class_count; ++c) {
    const auto cls = static_cast<ClassId>(c);
    const auto ranking = rank_class(cls, images, options.match);
    ClassTally tally;
    for (bool tp : ranking.is_tp) tp ? ++tally.tp : ++tally.fp;
    tally.fn = ranking.truth_count - tally.tp;
    if (ranking.truth_count == 0 && ranking.is_tp.empty()) continue;
    result.tallies.emplace(cls, tally);
    if (ranking.truth_count > 0) result.ap.emplace(cls, ap_from_ranking(ranking, options.interpolation));
  }
  result.map = mean_ap(result.ap);
  return result;
}

}  // namespace logoco::eval
