#pragma once

// Helpers shared by the format readers and writers. Not installed.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tag/formats.hpp"

namespace tag::detail {

std::vector<std::string_view> split(std::string_view s, char sep);
/// Splits on runs of spaces.
std::vector<std::string_view> split_words(std::string_view s);
std::string_view trim(std::string_view s);
std::optional<std::size_t> parse_index(std::string_view s);
std::vector<std::string_view> lines_of(std::string_view s);

/// Maps Unicode code point offsets to UTF-8 byte offsets and back.
class OffsetMap {
 public:
  explicit OffsetMap(std::string_view text);

  std::size_t code_points() const { return byte_of_.size() - 1; }
  /// nullopt when `cp` is past the end.
  std::optional<std::size_t> to_byte(std::size_t cp) const;
  /// Byte offset must sit on a code point boundary.
  std::size_t to_code_point(std::size_t byte) const;

 private:
  std::vector<std::size_t> byte_of_;
  bool ascii_ = true;
};

/// Every trigger/argument must resolve and the reference graph must be a
/// DAG. Problems are appended to report.errors, located via `locate`.
template <class Locate>
void check_references(const Document& doc, ParseReport& report, Locate&& locate) {
  for (const auto& [id, rel] : doc.relations) {
    for (const auto& ep : endpoints(rel)) {
      if (!resolves(doc, ep)) {
        report.errors.push_back(
            {locate(id), "'" + id + "' references unknown element '" + element_id(ep) + "'"});
      }
    }
  }
  if (!report.errors.empty()) return;
  for (const auto& issue : validate(doc)) {
    if (issue.severity == Severity::Error) {
      report.errors.push_back({locate(issue.element), issue.message});
    }
  }
}

[[noreturn]] void throw_parse_error(ErrorCode code, ParseReport report);

std::string xml_escape(std::string_view s);

}  // namespace tag::detail

namespace tag {

SerializedDocument serialize_brat(const Document& doc);
SerializedDocument serialize_conllx(const Document& doc);

}  // namespace tag
