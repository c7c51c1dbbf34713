#include "logoco/webset/stream_source.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "logoco/compositor/image.hpp"
#include "logoco/core/error.hpp"

namespace logoco {
namespace {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

DirectorySource::DirectorySource(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw IoError("stream directory '" + dir.string() + "' does not exist");
  }
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && has_image_extension(entry.path())) {
      files_.push_back(entry.path());
    }
  }
  std::sort(files_.begin(), files_.end());
}

std::optional<StreamItem> DirectorySource::next() {
  if (cursor_ >= files_.size()) return std::nullopt;
  const auto& file = files_[cursor_++];
  StreamItem item;
  item.id = file.stem().string();
  item.payload = file.string();
  auto sidecar = file;
  sidecar += ".txt";
  if (!std::filesystem::exists(sidecar)) sidecar = file.parent_path() / (file.stem().string() + ".txt");
  if (std::filesystem::exists(sidecar)) item.text = read_text_file(sidecar);
  return item;
}

ReplaySource::ReplaySource(const std::filesystem::path& recording) {
  std::ifstream in(recording, std::ios::binary);
  if (!in) throw IoError("cannot open recording '" + recording.string() + "'");
  const auto base = recording.parent_path();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      StreamItem item;
      item.id = j.at("id").get<std::string>();
      std::filesystem::path image(j.at("image").get<std::string>());
      if (image.is_relative()) image = base / image;
      item.payload = image.string();
      item.text = j.value("text", std::string{});
      items_.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("bad recording entry: ") + e.what());
    }
  }
}

std::optional<StreamItem> ReplaySource::next() {
  if (cursor_ >= items_.size()) return std::nullopt;
  return items_[cursor_++];
}

std::optional<StreamItem> VectorSource::next() {
  if (cursor_ >= items_.size()) return std::nullopt;
  return items_[cursor_++];
}

}  // namespace logoco
