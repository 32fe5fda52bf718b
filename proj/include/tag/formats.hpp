#pragma once

// Readers and writers for BRAT standoff, CoNLL-X, BioC XML and the
// taxonomy file. Internal offsets are UTF-8 byte offsets; BRAT and BioC
// offsets on disk count Unicode code points and are converted on the way
// in and out.

#include <string>
#include <string_view>
#include <vector>

#include "tag/error.hpp"
#include "tag/graph.hpp"
#include "tag/taxonomy.hpp"

namespace tag {

struct ReportEntry {
  /// "line 12", "document D1/annotation T3", an element id, ...
  std::string locator;
  std::string message;

  bool operator==(const ReportEntry&) const = default;
};

struct ParseReport {
  SourceFormat source_format = SourceFormat::Brat;
  std::vector<ReportEntry> warnings;
  /// Input fragments (or, when serializing, document content) that could
  /// not be represented.
  std::vector<ReportEntry> dropped;
  /// Fatal problems; only populated on a thrown ParseError.
  std::vector<ReportEntry> errors;

  bool clean() const { return warnings.empty() && dropped.empty() && errors.empty(); }
};

/// Thrown when input cannot be turned into a valid Document. The report
/// lists every problem found, not just the first.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, const std::string& message, ParseReport report)
      : Error(code, message), report_(std::move(report)) {}

  const ParseReport& report() const { return report_; }

 private:
  ParseReport report_;
};

struct ParsedDocument {
  Document document;
  ParseReport report;
};

struct ParsedCollection {
  std::vector<Document> documents;
  ParseReport report;
};

ParsedDocument parse_brat(std::string_view txt, std::string_view ann,
                          std::string document_id = "document");
ParsedDocument parse_conllx(std::string_view input, std::string document_id = "document");
ParsedCollection parse_bioc(std::string_view xml);

/// Adds the CoNLL-X tokens, part-of-speech mentions and dependencies as a
/// syntactic layer over an existing document with the same text. Forms are
/// aligned left to right against the text; tokens are re-split so both
/// layers share boundaries.
ParsedDocument overlay_conllx(const Document& base, std::string_view conllx);

Taxonomy parse_taxonomy(std::string_view input);
std::string serialize_taxonomy(const Taxonomy& taxonomy);

/// Splits text at whitespace and at every mention anchor boundary.
std::vector<Token> tokenize(std::string_view text, const MentionMap& mentions);

struct SerializedDocument {
  /// .ann body, CoNLL-X rows or BioC XML.
  std::string content;
  /// BRAT .txt body; empty for the other formats.
  std::string text;
  /// Content that the target format cannot carry.
  ParseReport report;
};

/// Throws NotRepresentable only when nothing of the document fits the
/// target format (CoNLL-X without tokens).
SerializedDocument serialize(const Document& doc, SourceFormat format);
SerializedDocument serialize_bioc(const std::vector<Document>& docs);

}  // namespace tag
