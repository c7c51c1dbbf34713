#pragma once

#include <set>
#include <span>
#include <string>

#include "logoco/core/types.hpp"

namespace logoco {

/// Self-discovered training ids and the still-unexplored remainder of one
/// detector slot's view of the web pool.
struct PoolState {
  std::set<std::string> discovered;
  std::set<std::string> unexplored;
  int iteration = 0;

  std::size_t total() const noexcept { return discovered.size() + unexplored.size(); }

  friend bool operator==(const PoolState&, const PoolState&) = default;
};

/// Fresh state: nothing discovered, every image unexplored, iteration 0.
PoolState make_pool(std::span<const WebImage> images);

/// Throws InvalidArgument when discovered and unexplored overlap or t < 0.
void validate(const PoolState& pool);

/// Validates `after` and that it is a legal successor of `before`: same
/// universe size, discovered set only grows, nothing returns to unexplored.
void validate_transition(const PoolState& before, const PoolState& after);

}  // namespace logoco
