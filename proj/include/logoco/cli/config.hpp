#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "logoco/core/error.hpp"
#include "logoco/detector/external.hpp"
#include "logoco/detector/simulated.hpp"
#include "logoco/engine/engine.hpp"

namespace logoco::cli {

/// Parses the flat TOML subset used for run configs into a flat JSON object
/// with dotted keys. Supported: `# comments`, `[section]` and `[a.b]` headers
/// (prefixing later keys), `key = value` with basic or literal strings,
/// integers, floats, booleans and single-line arrays of those.
/// Throws ParseError naming the line.
nlohmann::json parse_toml(std::string_view text);

/// Flattens nested JSON objects into dotted keys; arrays stay values.
nlohmann::json flatten(const nlohmann::json& doc);

/// Reads a config file: `.json` files as JSON, everything else as TOML.
/// Returns a flat object. Relative path values are later resolved against
/// the file's directory.
nlohmann::json load_config_file(const std::filesystem::path& path);

struct SlotConfig {
  std::string name;
  Backend backend = Backend::simulated;
  /// `unix:<socket>` or `exec:<command>` for the external backend.
  std::string endpoint;
  ExternalOptions external;
  /// Simulated parameters; competence and false-fire vectors are filled per class.
  SimulatedDetectorParams sim;
  double initial_competence = 0.0;
  double initial_false_fire = 0.05;
  /// Unset means derived from the run seed and slot index.
  std::optional<std::uint64_t> seed;
};

struct RunConfig {
  std::filesystem::path pool;
  std::filesystem::path icons;
  std::filesystem::path backgrounds;
  std::filesystem::path eval;
  std::filesystem::path latent;
  std::filesystem::path out;
  std::vector<std::string> classes;
  MiningConfig mining;
  std::array<SlotConfig, 2> slots;
  std::uint64_t seed = 0;
};

/// A list of config problems; the CLI prints them and exits 1.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Builds a config from flat keys. Relative paths resolve against `base`.
/// Throws ConfigError listing every unknown key and bad value.
RunConfig build_config(const nlohmann::json& flat, const std::filesystem::path& base = {});

/// Keys understood by build_config, for documentation and diagnostics.
std::vector<std::string> known_keys();

/// Machine-readable form of the effective configuration.
nlohmann::json to_json(const RunConfig& config);

/// Paths named in `required` ("pool", "icons", ...) must be set and exist.
/// Throws ConfigError.
void require_paths(const RunConfig& config, const std::vector<std::string>& required);

/// Creates a detector for slot `index` over `class_names`.
std::unique_ptr<Detector> make_detector(const RunConfig& config, std::size_t index,
                                        const std::vector<std::string>& class_names,
                                        std::shared_ptr<const LatentTruth> latent);

/// Writes a TOML config that round-trips through build_config.
std::string to_toml(const RunConfig& config);

}  // namespace logoco::cli
