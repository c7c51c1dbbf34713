#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace logoco {

/// 8-bit RGBA raster, row-major, no padding.
class Image {
 public:
  using Pixel = std::array<std::uint8_t, 4>;

  Image() = default;
  Image(int width, int height, Pixel fill = {0, 0, 0, 255});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return width_ == 0 || height_ == 0; }

  Pixel at(int x, int y) const noexcept {
    const auto* p = &data_[offset(x, y)];
    return {p[0], p[1], p[2], p[3]};
  }
  void set(int x, int y, Pixel px) noexcept {
    auto* p = &data_[offset(x, y)];
    p[0] = px[0];
    p[1] = px[1];
    p[2] = px[2];
    p[3] = px[3];
  }

  const std::vector<std::uint8_t>& bytes() const noexcept { return data_; }
  std::vector<std::uint8_t>& bytes() noexcept { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t offset(int x, int y) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) * 4;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

struct ImageSize {
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// A payload reference with known dimensions. Virtual references (no file on
/// disk) are allowed wherever pixels are not needed.
struct ImageRef {
  std::string path;
  ImageSize size;

  friend bool operator==(const ImageRef&, const ImageRef&) = default;
};

/// Decodes PNG or JPEG (by content signature). Throws IoError.
Image load_image(const std::filesystem::path& path);
void save_png(const Image& image, const std::filesystem::path& path);

/// Reads only the header. Returns nullopt for missing or undecodable files.
std::optional<ImageSize> probe_image_size(const std::filesystem::path& path);

bool has_image_extension(const std::filesystem::path& path);

}  // namespace logoco
