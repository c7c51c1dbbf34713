#include "logoco/compositor/image.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <cctype>

// jpeglib.h expects FILE and size_t to be declared first.
#include <jpeglib.h>

#include "logoco/core/error.hpp"

namespace logoco {
namespace {

enum class Format { png, jpeg, unknown };

Format sniff(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char sig[8] = {};
  if (!in.read(reinterpret_cast<char*>(sig), sizeof(sig))) return Format::unknown;
  static constexpr unsigned char png_sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (std::memcmp(sig, png_sig, 8) == 0) return Format::png;
  if (sig[0] == 0xff && sig[1] == 0xd8 && sig[2] == 0xff) return Format::jpeg;
  return Format::unknown;
}

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

// Decodes a JPEG into `out`, or only reads its header when `out` is null.
// Returns an empty string on success, the decoder message otherwise. No
// locals with destructors may be live across the longjmp error path.
std::string read_jpeg(const std::filesystem::path& path, Image* out, ImageSize* size) {
  std::FILE* file = std::fopen(path.c_str(), "rb");
  if (file == nullptr) return "cannot open file";
  jpeg_decompress_struct cinfo;
  JpegError err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    std::fclose(file);
    return std::string(err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file);
  jpeg_read_header(&cinfo, TRUE);
  size->width = static_cast<int>(cinfo.image_width);
  size->height = static_cast<int>(cinfo.image_height);
  if (out != nullptr) {
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);
    *out = Image(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height));
    // Row buffer owned by the decoder's pool, released by jpeg_destroy.
    JSAMPARRAY rows = (*cinfo.mem->alloc_sarray)(reinterpret_cast<j_common_ptr>(&cinfo),
                                                 JPOOL_IMAGE, cinfo.output_width * 3, 1);
    while (cinfo.output_scanline < cinfo.output_height) {
      const int y = static_cast<int>(cinfo.output_scanline);
      jpeg_read_scanlines(&cinfo, rows, 1);
      for (int x = 0; x < out->width(); ++x) {
        const auto* p = &rows[0][static_cast<std::size_t>(x) * 3];
        out->set(x, y, {p[0], p[1], p[2], 255});
      }
    }
    jpeg_finish_decompress(&cinfo);
  }
  jpeg_destroy_decompress(&cinfo);
  std::fclose(file);
  return {};
}

Image load_png(const std::filesystem::path& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    throw IoError("cannot decode PNG '" + path.string() + "': " + img.message);
  }
  img.format = PNG_FORMAT_RGBA;
  Image out(static_cast<int>(img.width), static_cast<int>(img.height));
  if (!png_image_finish_read(&img, nullptr, out.bytes().data(), 0, nullptr)) {
    png_image_free(&img);
    throw IoError("cannot decode PNG '" + path.string() + "': " + img.message);
  }
  return out;
}

}  // namespace

Image::Image(int width, int height, Pixel fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw InvalidArgument("negative image dimensions");
  data_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 4);
  for (std::size_t i = 0; i < data_.size(); i += 4) {
    std::memcpy(&data_[i], fill.data(), 4);
  }
}

Image load_image(const std::filesystem::path& path) {
  switch (sniff(path)) {
    case Format::png:
      return load_png(path);
    case Format::jpeg: {
      Image out;
      ImageSize size;
      if (auto msg = read_jpeg(path, &out, &size); !msg.empty()) {
        throw IoError("cannot decode JPEG '" + path.string() + "': " + msg);
      }
      return out;
    }
    case Format::unknown:
      break;
  }
  throw IoError("'" + path.string() + "' is not a PNG or JPEG file");
}

void save_png(const Image& image, const std::filesystem::path& path) {
  if (image.empty()) throw InvalidArgument("cannot save an empty image");
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width());
  img.height = static_cast<png_uint_32>(image.height());
  img.format = PNG_FORMAT_RGBA;
  if (!png_image_write_to_file(&img, path.c_str(), 0, image.bytes().data(), 0, nullptr)) {
    throw IoError("cannot write PNG '" + path.string() + "': " + img.message);
  }
}

std::optional<ImageSize> probe_image_size(const std::filesystem::path& path) {
  switch (sniff(path)) {
    case Format::png: {
      // IHDR is always the first chunk: width and height are big-endian at bytes 16..23.
      std::ifstream in(path, std::ios::binary);
      unsigned char head[24];
      if (!in.read(reinterpret_cast<char*>(head), sizeof(head))) return std::nullopt;
      if (std::memcmp(head + 12, "IHDR", 4) != 0) return std::nullopt;
      auto be32 = [](const unsigned char* p) {
        return (static_cast<std::uint32_t>(p[0]) << 24) | (static_cast<std::uint32_t>(p[1]) << 16) |
               (static_cast<std::uint32_t>(p[2]) << 8) | static_cast<std::uint32_t>(p[3]);
      };
      const auto w = be32(head + 16);
      const auto h = be32(head + 20);
      if (w == 0 || h == 0 || w > 1u << 30 || h > 1u << 30) return std::nullopt;
      return ImageSize{static_cast<int>(w), static_cast<int>(h)};
    }
    case Format::jpeg: {
      ImageSize size;
      if (!read_jpeg(path, nullptr, &size).empty() || size.width < 1 || size.height < 1) {
        return std::nullopt;
      }
      return size;
    }
    case Format::unknown:
      break;
  }
  return std::nullopt;
}

bool has_image_extension(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace logoco
