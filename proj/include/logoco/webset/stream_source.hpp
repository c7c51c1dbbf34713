#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace logoco {

/// One pulled item: an image payload plus the text it was posted with.
struct StreamItem {
  std::string id;
  std::string payload;  // file reference
  std::string text;
};

/// Pull interface over a stream of posts. Each item is yielded at most once.
class StreamSource {
 public:
  virtual ~StreamSource() = default;
  /// nullopt once the source is exhausted.
  virtual std::optional<StreamItem> next() = 0;
};

/// Directory of images, each with an optional sidecar text file named
/// `<image file>.txt` (falling back to `<stem>.txt`). Items are yielded in
/// lexicographic filename order.
class DirectorySource : public StreamSource {
 public:
  explicit DirectorySource(const std::filesystem::path& dir);
  std::optional<StreamItem> next() override;

 private:
  std::vector<std::filesystem::path> files_;
  std::size_t cursor_ = 0;
};

/// Replays a recorded stream: JSON lines `{"id":..., "image":..., "text":...}`.
/// Relative image paths resolve against the recording's directory.
class ReplaySource : public StreamSource {
 public:
  explicit ReplaySource(const std::filesystem::path& recording);
  std::optional<StreamItem> next() override;

 private:
  std::vector<StreamItem> items_;
  std::size_t cursor_ = 0;
};

/// In-memory source, handy for tests and bindings.
class VectorSource : public StreamSource {
 public:
  explicit VectorSource(std::vector<StreamItem> items) : items_(std::move(items)) {}
  std::optional<StreamItem> next() override;

 private:
  std::vector<StreamItem> items_;
  std::size_t cursor_ = 0;
};

}  // namespace logoco
