#include <array>

#include "format_common.hpp"
#include "tag/formats.hpp"

namespace tag {

namespace {

constexpr std::array<std::string_view, 10> kPalette = {
    "#1F77B4", "#FF7F0E", "#2CA02C", "#D62728", "#9467BD",
    "#8C564B", "#E377C2", "#7F7F7F", "#BCBD22", "#17BECF",
};

struct Line {
  std::size_t number;
  std::size_t depth;
  std::string name;
  std::string color;
};

[[noreturn]] void indentation_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::IndentationError, "line " + std::to_string(line) + ": " + what);
}

// Builds the subtree starting at lines[i]; advances i past it.
TypeEntry build(const std::vector<Line>& lines, std::size_t& i, const std::string& inherited,
                std::size_t& palette_next) {
  const Line& line = lines[i++];
  TypeEntry entry;
  entry.name = line.name;
  if (!line.color.empty()) {
    entry.color = line.color;
  } else if (!inherited.empty()) {
    entry.color = inherited;
  } else {
    entry.color = kPalette[palette_next++ % kPalette.size()];
  }
  while (i < lines.size() && lines[i].depth > line.depth) {
    entry.children.push_back(build(lines, i, entry.color, palette_next));
  }
  return entry;
}

void write(std::string& out, const TypeEntry& e, std::size_t depth) {
  out.append(depth * 2, ' ');
  out += e.name + ": " + e.color + "\n";
  for (const auto& c : e.children) write(out, c, depth + 1);
}

}  // namespace

Taxonomy parse_taxonomy(std::string_view input) {
  std::vector<Line> lines;
  std::size_t number = 0;
  for (auto raw : detail::lines_of(input)) {
    ++number;
    if (detail::trim(raw).empty() || detail::trim(raw).starts_with('#')) continue;
    std::size_t spaces = 0;
    while (spaces < raw.size() && raw[spaces] == ' ') ++spaces;
    if (spaces < raw.size() && raw[spaces] == '\t') indentation_error(number, "tab in indentation");
    if (spaces % 2 != 0) indentation_error(number, "indentation must be a multiple of two spaces");
    const std::size_t depth = spaces / 2;
    const std::size_t limit = lines.empty() ? 0 : lines.back().depth + 1;
    if (depth > limit) indentation_error(number, "indented more than one level below its parent");

    std::string_view body = detail::trim(raw);
    Line line{number, depth, std::string(body), ""};
    if (auto colon = body.rfind(':'); colon != std::string_view::npos) {
      line.name = std::string(detail::trim(body.substr(0, colon)));
      line.color = normalize_color(detail::trim(body.substr(colon + 1)));
    }
    if (line.name.empty()) {
      throw Error(ErrorCode::MalformedLine, "line " + std::to_string(number) + ": missing type name");
    }
    lines.push_back(std::move(line));
  }

  std::vector<TypeEntry> roots;
  std::size_t palette_next = 0;
  std::size_t i = 0;
  while (i < lines.size()) roots.push_back(build(lines, i, "", palette_next));
  return Taxonomy(std::move(roots));
}

std::string serialize_taxonomy(const Taxonomy& taxonomy) {
  std::string out;
  for (const auto& r : taxonomy.roots()) write(out, r, 0);
  return out;
}

}  // namespace tag
