#include "tag/taxonomy.hpp"

#include <cctype>
#include <functional>
#include <set>

#include "tag/error.hpp"

namespace tag {

namespace {

const TypeEntry* find_in(const std::vector<TypeEntry>& entries, std::string_view name) {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
    if (const TypeEntry* hit = find_in(e.children, name)) return hit;
  }
  return nullptr;
}

bool path_to(const std::vector<TypeEntry>& entries, std::string_view name,
             std::vector<std::string>& path) {
  for (const auto& e : entries) {
    if (e.name == name) return true;
    path.push_back(e.name);
    if (path_to(e.children, name, path)) return true;
    path.pop_back();
  }
  return false;
}

void collect(const std::vector<TypeEntry>& entries, std::vector<std::string>& out) {
  for (const auto& e : entries) {
    out.push_back(e.name);
    collect(e.children, out);
  }
}

void paint(TypeEntry& entry, const std::string& color) {
  entry.color = color;
  for (auto& c : entry.children) paint(c, color);
}

bool recolor_in(std::vector<TypeEntry>& entries, std::string_view name, const std::string& color,
                bool cascade) {
  for (auto& e : entries) {
    if (e.name == name) {
      if (cascade) {
        paint(e, color);
      } else {
        e.color = color;
      }
      return true;
    }
    if (recolor_in(e.children, name, color, cascade)) return true;
  }
  return false;
}

}  // namespace

bool is_valid_color(std::string_view color) {
  if (color.size() != 7 || color[0] != '#') return false;
  for (std::size_t i = 1; i < 7; ++i) {
    if (!std::isxdigit(static_cast<unsigned char>(color[i]))) return false;
  }
  return true;
}

std::string normalize_color(std::string_view color) {
  if (!is_valid_color(color)) {
    throw Error(ErrorCode::InvalidColor, "'" + std::string(color) + "' is not a #RRGGBB color");
  }
  std::string out(color);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

Taxonomy::Taxonomy(std::vector<TypeEntry> roots) : roots_(std::move(roots)) {
  std::set<std::string, std::less<>> seen;
  std::function<void(std::vector<TypeEntry>&)> check = [&](std::vector<TypeEntry>& entries) {
    for (auto& e : entries) {
      if (!seen.insert(e.name).second) {
        throw Error(ErrorCode::DuplicateTypeName, "type '" + e.name + "' appears more than once");
      }
      e.color = normalize_color(e.color);
      check(e.children);
    }
  };
  check(roots_);
}

const TypeEntry* Taxonomy::find(std::string_view name) const { return find_in(roots_, name); }

std::vector<std::string> Taxonomy::ancestors(std::string_view name) const {
  std::vector<std::string> path;
  if (!path_to(roots_, name, path)) return {};
  return {path.rbegin(), path.rend()};
}

std::vector<std::string> Taxonomy::descendants(std::string_view name) const {
  std::vector<std::string> out;
  if (const TypeEntry* e = find(name)) collect(e->children, out);
  return out;
}

std::vector<std::string> Taxonomy::names() const {
  std::vector<std::string> out;
  collect(roots_, out);
  return out;
}

std::map<std::string, std::string> Taxonomy::color_map() const {
  std::map<std::string, std::string> out;
  std::function<void(const std::vector<TypeEntry>&)> walk = [&](const std::vector<TypeEntry>& es) {
    for (const auto& e : es) {
      out.emplace(e.name, e.color);
      walk(e.children);
    }
  };
  walk(roots_);
  return out;
}

Taxonomy recolor_type(const Taxonomy& taxonomy, std::string_view type_name,
                      std::string_view color, bool cascade) {
  const std::string normalized = normalize_color(color);
  std::vector<TypeEntry> roots = taxonomy.roots();
  if (!recolor_in(roots, type_name, normalized, cascade)) {
    throw Error(ErrorCode::UnknownType, "unknown type '" + std::string(type_name) + "'");
  }
  return Taxonomy(std::move(roots));
}

}  // namespace tag
