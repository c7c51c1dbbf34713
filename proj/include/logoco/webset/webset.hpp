#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "logoco/compositor/image.hpp"
#include "logoco/core/types.hpp"
#include "logoco/webset/stream_source.hpp"

namespace logoco {

/// Resolves an item payload to pixel dimensions; nullopt means undecodable.
using DimensionProbe = std::function<std::optional<ImageSize>(const StreamItem&)>;

/// Default probe: reads the PNG/JPEG header of the payload file.
std::optional<ImageSize> probe_payload(const StreamItem& item);

struct CollectResult {
  std::vector<WebImage> images;
  std::size_t items_seen = 0;
  std::size_t skipped = 0;  // undecodable payloads
};

/// True when `name` occurs in `text` as a whole word, ASCII case-insensitive.
/// Multi-word names match as a phrase; bytes >= 0x80 count as word characters.
bool contains_keyword(std::string_view text, std::string_view name);

/// Weak-labels every stream item whose text mentions a class name. An item
/// mentioning k classes yields k images with ids `<item id>#<class id>`.
CollectResult collect(StreamSource& source, std::span<const LogoClass> classes,
                      const DimensionProbe& probe = probe_payload);

/// Keeps images whose width and height are both at least `min_dim`.
std::vector<WebImage> filter_noise(std::span<const WebImage> images, int min_dim = 100);

/// Within each weak-label class keeps the first image of every distinct
/// (width, height) pair.
std::vector<WebImage> dedupe_by_size(std::span<const WebImage> images);

struct ClassStats {
  std::map<ClassId, std::size_t> counts;
  std::size_t min = 0;
  double median = 0.0;
  std::size_t max = 0;
  double imbalance_ratio = 1.0;
};

/// Per-class counts over classes that appear. Even class counts take the mean
/// of the two middle values as median. Throws InvalidArgument on empty input.
ClassStats class_stats(std::span<const WebImage> images);
ClassStats class_stats(const std::map<ClassId, std::size_t>& counts);

using TruthOracle = std::function<bool(const WebImage&)>;

/// Fraction of oracle-true (real logo) images among min(sample_n, |class|)
/// images of `cls` drawn uniformly without replacement. The oracle stands in
/// for manual inspection; the label noise rate is one minus the result.
double estimate_noise_rate(std::span<const WebImage> images, ClassId cls, const TruthOracle& oracle,
                           std::size_t sample_n = 1000, std::uint64_t seed = 0);

}  // namespace logoco
