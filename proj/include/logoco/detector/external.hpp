#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "logoco/detector/detector.hpp"
#include "logoco/detector/wire.hpp"

namespace logoco {

struct ExternalOptions {
  std::chrono::milliseconds timeout{30000};
  /// Extra attempts after the first failed one.
  int retries = 2;
  /// Where fine-tune manifests are written for the backend to read.
  std::filesystem::path work_dir = std::filesystem::temp_directory_path();
  /// Treat the remote model as already trained (skips the bootstrap requirement).
  bool assume_initialized = false;
};

using TransportFactory = std::function<std::unique_ptr<wire::Transport>()>;

/// Parses an endpoint string: `unix:<socket path>` or `exec:<command line>`
/// (whitespace separated, no quoting).
TransportFactory make_transport_factory(std::string_view endpoint);

/// Detector living in another process (a real network such as a two-stage
/// or grid-regression model), reached over length-prefixed JSON:
///   {"op":"detect","image":"<path>"} -> {"detections":[{"class":..,"score":..,"box":[x1,y1,x2,y2]}]}
///   {"op":"finetune","manifest":"<path>","images":n} -> {"ok":true}
/// Bootstrap is a finetune request carrying "bootstrap":true. A reply with an
/// "error" member is a backend failure and is not retried; transport failures
/// reconnect and retry.
class ExternalDetector final : public Detector {
 public:
  ExternalDetector(std::string name, std::vector<std::string> class_names,
                   TransportFactory factory, ExternalOptions options = {});

  Backend backend() const noexcept override { return Backend::external; }
  bool initialized() const noexcept override { return initialized_; }

  std::vector<Detection> detect(const WebImage& image) const override;
  void fine_tune(std::span<const AnnotatedImage> training) override;
  void bootstrap(std::span<const AnnotatedImage> synthetic) override;
  std::unique_ptr<Detector> clone() const override;

  /// Sends a raw JSON request and returns the raw JSON reply.
  std::string request(const std::string& message) const;

 private:
  struct Session {
    TransportFactory factory;
    std::unique_ptr<wire::Transport> transport;
    std::mutex mutex;
  };

  void send_training(std::span<const AnnotatedImage> records, bool bootstrap);

  std::shared_ptr<Session> session_;
  ExternalOptions options_;
  bool initialized_ = false;
  int updates_ = 0;
};

}  // namespace logoco
