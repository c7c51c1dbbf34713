#include "logoco/webset/webset.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>
#include <utility>

#include "logoco/core/error.hpp"
#include "logoco/core/random.hpp"

namespace logoco {
namespace {

char lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') ||
         u == '_';
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = lower(c);
  return out;
}

}  // namespace

std::optional<ImageSize> probe_payload(const StreamItem& item) {
  return probe_image_size(item.payload);
}

bool contains_keyword(std::string_view text, std::string_view name) {
  if (name.empty()) return false;
  const std::string hay = to_lower(text);
  const std::string needle = to_lower(name);
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
    const bool left_ok = pos == 0 || !is_word_char(hay[pos - 1]);
    const auto end = pos + needle.size();
    const bool right_ok = end == hay.size() || !is_word_char(hay[end]);
    if (left_ok && right_ok) return true;
  }
  return false;
}

CollectResult collect(StreamSource& source, std::span<const LogoClass> classes,
                      const DimensionProbe& probe) {
  for (const auto& cls : classes) {
    if (cls.name.empty()) throw InvalidArgument("class " + std::to_string(cls.id) + " has no name");
  }
  CollectResult result;
  while (auto item = source.next()) {
    ++result.items_seen;
    std::vector<ClassId> matched;
    for (const auto& cls : classes) {
      if (contains_keyword(item->text, cls.name)) matched.push_back(cls.id);
    }
    if (matched.empty()) continue;
    const auto size = probe(*item);
    if (!size || size->width < 1 || size->height < 1) {
      ++result.skipped;
      continue;
    }
    for (ClassId id : matched) {
      WebImage img;
      img.id = item->id + "#" + std::to_string(id);
      img.width = size->width;
      img.height = size->height;
      img.pixels = item->payload;
      img.weak_label = id;
      img.source = ImageSource::stream;
      result.images.push_back(std::move(img));
    }
  }
  return result;
}

std::vector<WebImage> filter_noise(std::span<const WebImage> images, int min_dim) {
  if (min_dim < 1) throw InvalidArgument("min_dim must be >= 1");
  std::vector<WebImage> out;
  std::copy_if(images.begin(), images.end(), std::back_inserter(out), [&](const WebImage& img) {
    return img.width >= min_dim && img.height >= min_dim;
  });
  return out;
}

std::vector<WebImage> dedupe_by_size(std::span<const WebImage> images) {
  std::set<std::tuple<ClassId, int, int>> seen;
  std::vector<WebImage> out;
  for (const auto& img : images) {
    if (seen.emplace(img.weak_label, img.width, img.height).second) out.push_back(img);
  }
  return out;
}

ClassStats class_stats(const std::map<ClassId, std::size_t>& counts) {
  std::vector<std::size_t> values;
  for (const auto& [cls, n] : counts) {
    if (n > 0) values.push_back(n);
  }
  if (values.empty()) throw InvalidArgument("class_stats needs at least one image");
  std::sort(values.begin(), values.end());
  ClassStats stats;
  for (const auto& [cls, n] : counts) {
    if (n > 0) stats.counts.emplace(cls, n);
  }
  stats.min = values.front();
  stats.max = values.back();
  const auto mid = values.size() / 2;
  stats.median = values.size() % 2 == 1
                     ? static_cast<double>(values[mid])
                     : (static_cast<double>(values[mid - 1]) + static_cast<double>(values[mid])) / 2.0;
  stats.imbalance_ratio = static_cast<double>(stats.max) / static_cast<double>(stats.min);
  return stats;
}

ClassStats class_stats(std::span<const WebImage> images) {
  if (images.empty()) throw InvalidArgument("class_stats needs at least one image");
  std::map<ClassId, std::size_t> counts;
  for (const auto& img : images) ++counts[img.weak_label];
  return class_stats(counts);
}

double estimate_noise_rate(std::span<const WebImage> images, ClassId cls, const TruthOracle& oracle,
                           std::size_t sample_n, std::uint64_t seed) {
  std::vector<const WebImage*> members;
  for (const auto& img : images) {
    if (img.weak_label == cls) members.push_back(&img);
  }
  if (members.empty()) {
    throw InvalidArgument("class " + std::to_string(cls) + " has no images to sample");
  }
  const std::size_t k = std::min(sample_n, members.size());
  if (k == 0) throw InvalidArgument("sample_n must be >= 1");
  // Partial Fisher-Yates: the first k slots become a uniform sample without replacement.
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.below(members.size() - i));
    std::swap(members[i], members[j]);
  }
  std::size_t positives = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (oracle(*members[i])) ++positives;
  }
  return static_cast<double>(positives) / static_cast<double>(k);
}

}  // namespace logoco
