#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logoco/core/types.hpp"

namespace logoco {

/// Ordered set of logo classes with dense ids 1..m assigned in insertion order.
class ClassRegistry {
 public:
  ClassRegistry() = default;
  explicit ClassRegistry(const std::vector<std::string>& names);

  ClassId add(std::string name, std::vector<std::string> icon_refs = {});

  std::optional<ClassId> find(std::string_view name) const;
  /// Throws InvalidArgument naming the token when `name` is unknown.
  ClassId id_of(std::string_view name) const;

  const LogoClass& at(ClassId id) const;
  const std::string& name(ClassId id) const { return at(id).name; }
  bool contains(ClassId id) const noexcept {
    return id >= 1 && static_cast<std::size_t>(id) <= classes_.size();
  }

  std::size_t size() const noexcept { return classes_.size(); }
  bool empty() const noexcept { return classes_.empty(); }
  std::span<const LogoClass> classes() const noexcept { return classes_; }

  void set_icons(ClassId id, std::vector<std::string> icon_refs);

 private:
  std::vector<LogoClass> classes_;
  std::map<std::string, ClassId, std::less<>> by_name_;
};

}  // namespace logoco
