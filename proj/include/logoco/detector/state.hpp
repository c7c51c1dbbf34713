#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "logoco/detector/simulated.hpp"

namespace logoco {

nlohmann::json to_json(const SimulatedDetectorParams& params);
SimulatedDetectorParams params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SimulatedDetector::State& state);
SimulatedDetector::State state_from_json(const nlohmann::json& j);

/// Writes the slot's session state (name, classes, parameters, learned ids).
void save_state(const SimulatedDetector& detector, const std::filesystem::path& path);

/// Rebuilds a slot written by save_state. Throws IoError, or Error on malformed content.
SimulatedDetector load_state(const std::filesystem::path& path,
                             std::shared_ptr<const LatentTruth> latent);

}  // namespace logoco
