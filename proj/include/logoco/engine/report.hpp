#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "logoco/core/classes.hpp"

namespace logoco {

struct SlotReport {
  std::string name;
  /// Images this slot newly mined, per weak-label class (N_sf of its pool).
  std::map<ClassId, std::size_t> mined;
  /// Real images that entered this slot's training this round, per class.
  std::map<ClassId, std::size_t> fed;
  /// Context synthesis added for this slot, per class.
  std::map<ClassId, std::size_t> synthetic;
  std::size_t discovered = 0;
  std::size_t unexplored = 0;
  /// Cumulative fine-tuning images since bootstrap.
  std::size_t training_images = 0;
  std::size_t failures = 0;
  std::map<ClassId, double> ap;
  double map = 0.0;
  /// mAP change against the previous report (0 for the bootstrap report).
  double gain = 0.0;

  friend bool operator==(const SlotReport&, const SlotReport&) = default;
};

struct IterationReport {
  int iteration = 0;
  std::vector<SlotReport> slots;
  /// Sum of the slots' cumulative training counts.
  std::size_t cumulative_training_images = 0;
  std::size_t deployment_slot = 1;
  bool stop = false;

  friend bool operator==(const IterationReport&, const IterationReport&) = default;
};

/// Class-keyed maps are written with class names; keys come out sorted, so
/// equal reports serialize to identical bytes.
nlohmann::json to_json(const IterationReport& report, const ClassRegistry& classes);
IterationReport report_from_json(const nlohmann::json& j, const ClassRegistry& classes);

}  // namespace logoco
