#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tag {

struct TypeEntry {
  std::string name;
  /// "#RRGGBB", upper case.
  std::string color;
  std::vector<TypeEntry> children;

  bool operator==(const TypeEntry&) const = default;
};

/// Tree of annotation types carrying display colors. Names are unique
/// across the whole tree.
class Taxonomy {
 public:
  Taxonomy() = default;
  /// Throws DuplicateTypeName or InvalidColor.
  explicit Taxonomy(std::vector<TypeEntry> roots);

  const std::vector<TypeEntry>& roots() const { return roots_; }
  bool empty() const { return roots_.empty(); }

  const TypeEntry* find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name) != nullptr; }
  /// Parent chain from the direct parent up to the root; empty for roots
  /// and unknown names.
  std::vector<std::string> ancestors(std::string_view name) const;
  /// Names of every entry below `name`, depth-first.
  std::vector<std::string> descendants(std::string_view name) const;
  /// Every name, depth-first pre-order.
  std::vector<std::string> names() const;
  std::map<std::string, std::string> color_map() const;

  bool operator==(const Taxonomy&) const = default;

 private:
  std::vector<TypeEntry> roots_;
};

bool is_valid_color(std::string_view color);
/// Validates and upper-cases a "#RRGGBB" string; throws InvalidColor.
std::string normalize_color(std::string_view color);

/// Returns a new taxonomy with `type_name` recolored, and every descendant
/// too when `cascade` is set. Throws UnknownType.
Taxonomy recolor_type(const Taxonomy& taxonomy, std::string_view type_name,
                      std::string_view color, bool cascade);

}  // namespace tag
