#include "format_common.hpp"

#include <algorithm>
#include <charconv>
#include <set>

namespace tag::detail {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> out;
  for (auto part : split(s, ' ')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::optional<std::size_t> parse_index(std::string_view s) {
  std::size_t value = 0;
  if (s.empty()) return std::nullopt;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::vector<std::string_view> lines_of(std::string_view s) {
  auto lines = split(s, '\n');
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  }
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

OffsetMap::OffsetMap(std::string_view text) {
  byte_of_.reserve(text.size() + 1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    const auto c = static_cast<unsigned char>(text[i]);
    if ((c & 0xC0) == 0x80) {
      ascii_ = false;
      continue;
    }
    if (c >= 0x80) ascii_ = false;
    byte_of_.push_back(i);
  }
  byte_of_.push_back(text.size());
}

std::optional<std::size_t> OffsetMap::to_byte(std::size_t cp) const {
  if (cp >= byte_of_.size()) return std::nullopt;
  return byte_of_[cp];
}

std::size_t OffsetMap::to_code_point(std::size_t byte) const {
  if (ascii_) return byte;
  auto it = std::lower_bound(byte_of_.begin(), byte_of_.end(), byte);
  return static_cast<std::size_t>(it - byte_of_.begin());
}

void throw_parse_error(ErrorCode code, ParseReport report) {
  std::string message;
  for (const auto& e : report.errors) {
    if (!message.empty()) message += "; ";
    message += e.locator + ": " + e.message;
  }
  throw ParseError(code, message, std::move(report));
}

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace tag::detail

namespace tag {

std::vector<Token> tokenize(std::string_view text, const MentionMap& mentions) {
  std::set<std::size_t> cuts;
  for (const auto& [id, m] : mentions) {
    for (const auto& a : m.anchors) {
      cuts.insert(a.start);
      cuts.insert(a.end);
    }
  }
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  std::vector<Token> tokens;
  auto emit = [&](std::size_t b, std::size_t e) {
    Token t;
    t.index = tokens.size();
    t.span = {b, e};
    t.surface = std::string(text.substr(b, e - b));
    tokens.push_back(std::move(t));
  };
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) {
      ++i;
      if (i < text.size() && !is_space(text[i]) && cuts.contains(i)) {
        emit(start, i);
        start = i;
      }
    }
    emit(start, i);
  }
  return tokens;
}

}  // namespace tag
