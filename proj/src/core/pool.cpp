#include "logoco/core/pool.hpp"

#include <algorithm>

#include "logoco/core/error.hpp"

namespace logoco {

PoolState make_pool(std::span<const WebImage> images) {
  PoolState pool;
  for (const auto& image : images) {
    if (!pool.unexplored.insert(image.id).second) {
      throw InvalidArgument("duplicate image id '" + image.id + "' in pool");
    }
  }
  return pool;
}

void validate(const PoolState& pool) {
  if (pool.iteration < 0) throw InvalidArgument("pool iteration is negative");
  // Both sets are ordered, so a merge walk finds any shared id.
  auto a = pool.discovered.begin();
  auto b = pool.unexplored.begin();
  while (a != pool.discovered.end() && b != pool.unexplored.end()) {
    if (*a < *b) {
      ++a;
    } else if (*b < *a) {
      ++b;
    } else {
      throw InvalidArgument("image '" + *a + "' is both discovered and unexplored");
    }
  }
}

void validate_transition(const PoolState& before, const PoolState& after) {
  validate(after);
  if (before.total() != after.total()) {
    throw InvalidArgument("pool size changed from " + std::to_string(before.total()) + " to " +
                          std::to_string(after.total()));
  }
  if (!std::includes(after.discovered.begin(), after.discovered.end(), before.discovered.begin(),
                     before.discovered.end())) {
    throw InvalidArgument("discovered set shrank");
  }
  if (!std::includes(before.unexplored.begin(), before.unexplored.end(),
                     after.unexplored.begin(), after.unexplored.end())) {
    throw InvalidArgument("image returned to the unexplored pool");
  }
}

}  // namespace logoco
