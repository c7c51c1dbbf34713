#include "logoco/engine/report.hpp"

#include "logoco/core/error.hpp"

namespace logoco {
namespace {

using nlohmann::json;

template <typename T>
json by_name(const std::map<ClassId, T>& values, const ClassRegistry& classes) {
  json out = json::object();
  for (const auto& [cls, v] : values) out[classes.name(cls)] = v;
  return out;
}

template <typename T>
std::map<ClassId, T> from_names(const json& j, const ClassRegistry& classes) {
  std::map<ClassId, T> out;
  for (const auto& [name, v] : j.items()) out[classes.id_of(name)] = v.template get<T>();
  return out;
}

}  // namespace

json to_json(const IterationReport& report, const ClassRegistry& classes) {
  json slots = json::array();
  for (const auto& s : report.slots) {
    slots.push_back({{"name", s.name},
                     {"mined", by_name(s.mined, classes)},
                     {"fed", by_name(s.fed, classes)},
                     {"synthetic", by_name(s.synthetic, classes)},
                     {"discovered", s.discovered},
                     {"unexplored", s.unexplored},
                     {"training_images", s.training_images},
                     {"failures", s.failures},
                     {"ap", by_name(s.ap, classes)},
                     {"map", s.map},
                     {"gain", s.gain}});
  }
  return {{"iteration", report.iteration},
          {"slots", std::move(slots)},
          {"cumulative_training_images", report.cumulative_training_images},
          {"deployment_slot", report.deployment_slot},
          {"stop", report.stop}};
}

IterationReport report_from_json(const json& j, const ClassRegistry& classes) {
  try {
    IterationReport r;
    r.iteration = j.at("iteration").get<int>();
    r.cumulative_training_images = j.at("cumulative_training_images").get<std::size_t>();
    r.deployment_slot = j.at("deployment_slot").get<std::size_t>();
    r.stop = j.at("stop").get<bool>();
    for (const auto& s : j.at("slots")) {
      SlotReport p;
      p.name = s.at("name").get<std::string>();
      p.mined = from_names<std::size_t>(s.at("mined"), classes);
      p.fed = from_names<std::size_t>(s.at("fed"), classes);
      p.synthetic = from_names<std::size_t>(s.at("synthetic"), classes);
      p.discovered = s.at("discovered").get<std::size_t>();
      p.unexplored = s.at("unexplored").get<std::size_t>();
      p.training_images = s.at("training_images").get<std::size_t>();
      p.failures = s.at("failures").get<std::size_t>();
      p.ap = from_names<double>(s.at("ap"), classes);
      p.map = s.at("map").get<double>();
      p.gain = s.at("gain").get<double>();
      r.slots.push_back(std::move(p));
    }
    return r;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed iteration report: ") + e.what());
  }
}

}  // namespace logoco
