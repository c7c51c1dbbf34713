#include "logoco/core/manifest.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "logoco/core/error.hpp"

namespace logoco {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

struct BoxToken {
  std::string_view class_name;
  BoundingBox box;
  std::optional<double> score;
};

// "name:x1,y1,x2,y2" or "name:x1,y1,x2,y2@score". The class name may itself
// contain ':' so the coordinate part starts after the last one.
BoxToken parse_box_token(std::string_view token, std::size_t line_no) {
  const auto colon = token.rfind(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw ParseError(line_no, "malformed box token '" + std::string(token) + "'");
  }
  BoxToken out;
  out.class_name = token.substr(0, colon);
  std::string_view coords = token.substr(colon + 1);
  if (const auto at = coords.find('@'); at != std::string_view::npos) {
    double score = 0.0;
    if (!parse_number(coords.substr(at + 1), score)) {
      throw ParseError(line_no, "malformed score in '" + std::string(token) + "'");
    }
    out.score = score;
    coords = coords.substr(0, at);
  }
  int values[4];
  for (int i = 0; i < 4; ++i) {
    const auto comma = coords.find(',');
    const auto part = i < 3 ? coords.substr(0, comma) : coords;
    if ((i < 3 && comma == std::string_view::npos) || !parse_number(part, values[i])) {
      throw ParseError(line_no, "malformed box coordinates in '" + std::string(token) + "'");
    }
    if (i < 3) coords = coords.substr(comma + 1);
  }
  out.box = BoundingBox{values[0], values[1], values[2], values[3]};
  return out;
}

struct ParsedLine {
  WebImage image;
  std::vector<BoxToken> boxes;
};

ParsedLine parse_line(std::string_view line, std::size_t line_no, const ClassRegistry& classes) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  const auto fields = split_tabs(line);
  if (fields.size() < 6) {
    throw ParseError(line_no, "expected at least 6 tab-separated fields, got " +
                                  std::to_string(fields.size()));
  }
  ParsedLine out;
  auto& img = out.image;
  img.id = std::string(fields[0]);
  if (img.id.empty()) throw ParseError(line_no, "empty image id");
  img.pixels = std::string(fields[1]);
  if (!parse_number(fields[2], img.width) || !parse_number(fields[3], img.height) ||
      img.width < 1 || img.height < 1) {
    throw ParseError(line_no, "width and height must be positive integers");
  }
  const auto label = classes.find(fields[4]);
  if (!label) throw ParseError(line_no, "unknown class name '" + std::string(fields[4]) + "'");
  img.weak_label = *label;
  const auto source = parse_image_source(fields[5]);
  if (!source) throw ParseError(line_no, "unknown source '" + std::string(fields[5]) + "'");
  img.source = *source;

  for (std::size_t i = 6; i < fields.size(); ++i) {
    auto token = parse_box_token(fields[i], line_no);
    if (!classes.find(token.class_name)) {
      throw ParseError(line_no, "unknown class name '" + std::string(token.class_name) + "'");
    }
    if (!token.box.fits(img.width, img.height)) {
      throw ParseError(line_no, "box '" + std::string(fields[i]) +
                                    "' is degenerate or outside the image bounds");
    }
    out.boxes.push_back(token);
  }
  return out;
}

template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    fn(std::string_view(line), line_no);
  }
}

void check_field(const std::string& value, const char* what) {
  if (value.find_first_of("\t\n\r") != std::string::npos) {
    throw InvalidArgument(std::string(what) + " '" + value + "' contains a tab or newline");
  }
}

void append_image_fields(std::string& out, const WebImage& img, const ClassRegistry& classes) {
  check_field(img.id, "image id");
  check_field(img.pixels, "image path");
  out += img.id;
  out += '\t';
  out += img.pixels;
  out += '\t';
  out += std::to_string(img.width);
  out += '\t';
  out += std::to_string(img.height);
  out += '\t';
  out += classes.name(img.weak_label);
  out += '\t';
  out += to_string(img.source);
}

void append_box(std::string& out, ClassId cls, const BoundingBox& b, const ClassRegistry& classes) {
  out += '\t';
  out += classes.name(cls);
  out += ':';
  out += std::to_string(b.x_min);
  out += ',';
  out += std::to_string(b.y_min);
  out += ',';
  out += std::to_string(b.x_max);
  out += ',';
  out += std::to_string(b.y_max);
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw InvalidArgument("cannot format number");
  return std::string(buf, ptr);
}

std::vector<AnnotatedImage> parse_manifest(std::istream& in, const ClassRegistry& classes) {
  std::vector<AnnotatedImage> records;
  for_each_line(in, [&](std::string_view line, std::size_t line_no) {
    auto parsed = parse_line(line, line_no, classes);
    AnnotatedImage rec{std::move(parsed.image), {}};
    for (const auto& token : parsed.boxes) {
      if (token.score) throw ParseError(line_no, "scored box in a truth manifest");
      rec.truths.push_back(Truth{*classes.find(token.class_name), token.box});
    }
    records.push_back(std::move(rec));
  });
  return records;
}

std::vector<AnnotatedImage> load_manifest(const std::filesystem::path& path,
                                          const ClassRegistry& classes) {
  auto in = open_for_read(path);
  return parse_manifest(in, classes);
}

std::string format_record(const AnnotatedImage& record, const ClassRegistry& classes) {
  validate(record, classes.size());
  std::string line;
  append_image_fields(line, record.image, classes);
  for (const auto& t : record.truths) append_box(line, t.cls, t.box, classes);
  return line;
}

void write_manifest(std::span<const AnnotatedImage> records, const ClassRegistry& classes,
                    std::ostream& out) {
  for (const auto& r : records) out << format_record(r, classes) << '\n';
}

void save_manifest(std::span<const AnnotatedImage> records, const ClassRegistry& classes,
                   const std::filesystem::path& path) {
  // Format everything first so a validation failure leaves no partial file.
  std::ostringstream buffer;
  write_manifest(records, classes, buffer);
  auto out = open_for_write(path);
  out << buffer.str();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<ScoredRecord> parse_detection_manifest(std::istream& in,
                                                   const ClassRegistry& classes) {
  std::vector<ScoredRecord> records;
  for_each_line(in, [&](std::string_view line, std::size_t line_no) {
    auto parsed = parse_line(line, line_no, classes);
    ScoredRecord rec{std::move(parsed.image), {}};
    for (const auto& token : parsed.boxes) {
      if (!token.score) throw ParseError(line_no, "detection box without '@score'");
      if (!(*token.score >= 0.0 && *token.score <= 1.0)) {
        throw ParseError(line_no, "detection score outside [0,1]");
      }
      rec.detections.push_back(Detection{*classes.find(token.class_name), *token.score, token.box});
    }
    records.push_back(std::move(rec));
  });
  return records;
}

std::vector<ScoredRecord> load_detection_manifest(const std::filesystem::path& path,
                                                  const ClassRegistry& classes) {
  auto in = open_for_read(path);
  return parse_detection_manifest(in, classes);
}

void save_detection_manifest(std::span<const ScoredRecord> records, const ClassRegistry& classes,
                             const std::filesystem::path& path) {
  std::ostringstream buffer;
  for (const auto& r : records) {
    validate(r.image, classes.size());
    std::string line;
    append_image_fields(line, r.image, classes);
    for (const auto& d : r.detections) {
      validate(d);
      append_box(line, d.cls, d.box, classes);
      line += '@';
      line += format_double(d.score);
    }
    buffer << line << '\n';
  }
  auto out = open_for_write(path);
  out << buffer.str();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<std::string> scan_class_names(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  std::vector<std::string> names;
  std::set<std::string, std::less<>> seen;
  auto note = [&](std::string_view name) {
    if (!name.empty() && !seen.contains(name)) {
      seen.emplace(name);
      names.emplace_back(name);
    }
  };
  for_each_line(in, [&](std::string_view line, std::size_t line_no) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto fields = split_tabs(line);
    if (fields.size() < 6) throw ParseError(line_no, "expected at least 6 tab-separated fields");
    note(fields[4]);
    for (std::size_t i = 6; i < fields.size(); ++i) {
      note(parse_box_token(fields[i], line_no).class_name);
    }
  });
  return names;
}

}  // namespace logoco
