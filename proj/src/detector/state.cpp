#include "logoco/detector/state.hpp"

#include <fstream>

#include "logoco/core/error.hpp"

namespace logoco {

using nlohmann::json;

json to_json(const SimulatedDetectorParams& p) {
  const auto& g = p.gain;
  return json{{"competence", p.competence},
              {"false_fire", p.false_fire},
              {"score_spread", p.score_spread},
              {"difficulty_spread", p.difficulty_spread},
              {"localization_jitter", p.localization_jitter},
              {"false_score_skew", p.false_score_skew},
              {"seed", p.seed},
              {"gain",
               {{"synthetic_gain", g.synthetic_gain},
                {"synthetic_ceiling", g.synthetic_ceiling},
                {"real_gain", g.real_gain},
                {"informativeness_floor", g.informativeness_floor},
                {"noise_penalty", g.noise_penalty},
                {"drift", g.drift}}}};
}

SimulatedDetectorParams params_from_json(const json& j) {
  SimulatedDetectorParams p;
  p.competence = j.at("competence").get<std::vector<double>>();
  p.false_fire = j.at("false_fire").get<std::vector<double>>();
  p.score_spread = j.at("score_spread").get<double>();
  p.difficulty_spread = j.at("difficulty_spread").get<double>();
  p.localization_jitter = j.at("localization_jitter").get<double>();
  p.false_score_skew = j.at("false_score_skew").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  const auto& g = j.at("gain");
  p.gain.synthetic_gain = g.at("synthetic_gain").get<double>();
  p.gain.synthetic_ceiling = g.at("synthetic_ceiling").get<double>();
  p.gain.real_gain = g.at("real_gain").get<double>();
  p.gain.informativeness_floor = g.at("informativeness_floor").get<double>();
  p.gain.noise_penalty = g.at("noise_penalty").get<double>();
  p.gain.drift = g.at("drift").get<double>();
  return p;
}

json to_json(const SimulatedDetector::State& s) {
  return json{{"params", to_json(s.params)},
              {"initial_false_fire", s.initial_false_fire},
              {"seen", s.seen},
              {"initialized", s.initialized}};
}

SimulatedDetector::State state_from_json(const json& j) {
  SimulatedDetector::State s;
  s.params = params_from_json(j.at("params"));
  s.initial_false_fire = j.at("initial_false_fire").get<std::vector<double>>();
  s.seen = j.at("seen").get<std::vector<std::uint64_t>>();
  s.initialized = j.at("initialized").get<bool>();
  return s;
}

void save_state(const SimulatedDetector& detector, const std::filesystem::path& path) {
  const json doc{{"name", detector.name()},
                 {"backend", "simulated"},
                 {"classes", detector.class_names()},
                 {"state", to_json(detector.state())}};
  const auto text = doc.dump(2) + "\n";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write detector state '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("failed writing detector state '" + path.string() + "'");
}

SimulatedDetector load_state(const std::filesystem::path& path,
                             std::shared_ptr<const LatentTruth> latent) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read detector state '" + path.string() + "'");
  try {
    const auto doc = json::parse(in);
    auto state = state_from_json(doc.at("state"));
    SimulatedDetector det(doc.at("name").get<std::string>(),
                          doc.at("classes").get<std::vector<std::string>>(), state.params,
                          std::move(latent));
    det.restore(state);
    return det;
  } catch (const json::exception& e) {
    throw Error("malformed detector state '" + path.string() + "': " + e.what());
  }
}

}  // namespace logoco
