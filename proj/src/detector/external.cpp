#include "logoco/detector/external.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "logoco/core/classes.hpp"
#include "logoco/core/manifest.hpp"

namespace logoco {
namespace {

using nlohmann::json;

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> out;
  std::istringstream in{std::string(text)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

json parse_reply(const std::string& reply, const std::string& slot) {
  json j;
  try {
    j = json::parse(reply);
  } catch (const json::exception& e) {
    throw DetectorError("slot '" + slot + "': malformed reply: " + e.what());
  }
  if (!j.is_object()) throw DetectorError("slot '" + slot + "': reply is not a JSON object");
  if (j.contains("error")) {
    throw DetectorError("slot '" + slot + "': backend error: " + j["error"].dump());
  }
  return j;
}

}  // namespace

TransportFactory make_transport_factory(std::string_view endpoint) {
  if (endpoint.starts_with("unix:")) {
    std::string path(endpoint.substr(5));
    return [path] { return wire::connect_unix(path); };
  }
  if (endpoint.starts_with("exec:")) {
    auto argv = split_words(endpoint.substr(5));
    if (argv.empty()) throw InvalidArgument("empty exec: endpoint");
    return [argv] { return std::make_unique<wire::ProcessTransport>(argv); };
  }
  throw InvalidArgument("endpoint must start with unix: or exec:, got '" + std::string(endpoint) + "'");
}

ExternalDetector::ExternalDetector(std::string name, std::vector<std::string> class_names,
                                   TransportFactory factory, ExternalOptions options)
    : Detector(std::move(name), std::move(class_names)),
      session_(std::make_shared<Session>()),
      options_(std::move(options)),
      initialized_(options_.assume_initialized) {
  if (!factory) throw InvalidArgument("external detector needs a transport factory");
  if (options_.retries < 0) throw InvalidArgument("retries must be >= 0");
  session_->factory = std::move(factory);
}

std::string ExternalDetector::request(const std::string& message) const {
  std::lock_guard lock(session_->mutex);
  const int attempts = options_.retries + 1;
  std::string last_error;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    try {
      if (!session_->transport) session_->transport = session_->factory();
      return session_->transport->round_trip(message, options_.timeout);
    } catch (const wire::WireError& e) {
      // Drop the connection; the next attempt reconnects.
      session_->transport.reset();
      last_error = e.what();
    }
  }
  throw TransportError("slot '" + name() + "': " + last_error, attempts);
}

std::vector<Detection> ExternalDetector::detect(const WebImage& image) const {
  require_initialized();
  const auto reply = parse_reply(request(json{{"op", "detect"}, {"image", image.pixels}}.dump()), name());
  std::vector<Detection> out;
  try {
    for (const auto& d : reply.at("detections")) {
      const auto cls_name = d.at("class").get<std::string>();
      ClassId cls = 0;
      for (std::size_t i = 0; i < class_count(); ++i) {
        if (class_names()[i] == cls_name) cls = static_cast<ClassId>(i + 1);
      }
      if (cls == 0) throw DetectorError("slot '" + name() + "' returned unknown class '" + cls_name + "'");
      const auto& b = d.at("box");
      Detection det{cls, d.at("score").get<double>(),
                    BoundingBox{b.at(0).get<int>(), b.at(1).get<int>(), b.at(2).get<int>(),
                                b.at(3).get<int>()}};
      if (!(det.score >= 0.0 && det.score <= 1.0) || !det.box.valid()) {
        throw DetectorError("slot '" + name() + "' returned an invalid detection");
      }
      out.push_back(det);
    }
  } catch (const json::exception& e) {
    throw DetectorError("slot '" + name() + "': malformed detect reply: " + e.what());
  }
  return out;
}

void ExternalDetector::send_training(std::span<const AnnotatedImage> records, bool bootstrap) {
  ClassRegistry classes(class_names());
  std::filesystem::create_directories(options_.work_dir);
  const auto manifest = options_.work_dir / (name() + (bootstrap ? "-bootstrap-" : "-finetune-") +
                                             std::to_string(updates_ + 1) + ".manifest");
  save_manifest(records, classes, manifest);
  json msg{{"op", "finetune"}, {"manifest", manifest.string()}, {"images", records.size()}};
  if (bootstrap) msg["bootstrap"] = true;
  const auto reply = parse_reply(request(msg.dump()), name());
  if (!reply.value("ok", false)) throw DetectorError("slot '" + name() + "': finetune not acknowledged");
  // Local state only advances once the backend acknowledged.
  ++updates_;
  initialized_ = true;
}

void ExternalDetector::fine_tune(std::span<const AnnotatedImage> training) {
  if (training.empty()) throw InvalidArgument("fine_tune needs a non-empty training batch");
  send_training(training, false);
}

void ExternalDetector::bootstrap(std::span<const AnnotatedImage> synthetic) {
  require_coverage(synthetic);
  send_training(synthetic, true);
}

std::unique_ptr<Detector> ExternalDetector::clone() const {
  // The model lives in the backend; a clone shares the session.
  return std::unique_ptr<Detector>(new ExternalDetector(*this));
}

}  // namespace logoco
