#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logoco/core/types.hpp"

namespace logoco {

enum class Backend { external, simulated };

std::string_view to_string(Backend backend);

/// A detector slot: one independently trained model behind a uniform
/// interface. Slots never share training state; `clone` yields an
/// independent copy of the local session state.
class Detector {
 public:
  Detector(std::string name, std::vector<std::string> class_names);
  virtual ~Detector() = default;

  const std::string& name() const noexcept { return name_; }
  /// Class names indexed by id - 1.
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  std::size_t class_count() const noexcept { return class_names_.size(); }

  virtual Backend backend() const noexcept = 0;
  virtual bool initialized() const noexcept = 0;

  /// Throws DetectorError when the slot is not initialized.
  virtual std::vector<Detection> detect(const WebImage& image) const = 0;

  /// Incremental update. Throws InvalidArgument on an empty batch; the slot
  /// is left unchanged when the update fails.
  virtual void fine_tune(std::span<const AnnotatedImage> training) = 0;

  /// Resets the slot and trains it from synthetic data covering every class.
  /// Throws InvalidArgument listing the classes without images.
  virtual void bootstrap(std::span<const AnnotatedImage> synthetic) = 0;

  virtual std::unique_ptr<Detector> clone() const = 0;

 protected:
  Detector(const Detector&) = default;
  Detector& operator=(const Detector&) = default;

  void require_initialized() const;
  /// Throws InvalidArgument when some class in 1..m has no truth box in `synthetic`.
  void require_coverage(std::span<const AnnotatedImage> synthetic) const;

 private:
  std::string name_;
  std::vector<std::string> class_names_;
};

/// Maximal score of class `cls` among `detections`; 0 when there is none.
double max_score(std::span<const Detection> detections, ClassId cls) noexcept;
double max_score(const Detector& detector, const WebImage& image, ClassId cls);

}  // namespace logoco
