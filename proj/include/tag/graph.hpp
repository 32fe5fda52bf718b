#pragma once

// Unified annotation graph: tokens, labeled spans (mentions) and relations
// whose endpoints may themselves be relations. Documents are plain values;
// every operation below takes a version and returns a new one.

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tag {

class Taxonomy;

enum class Layer { Semantic, Syntactic };
enum class Directionality { Directed, Undirected, Bidirectional };
enum class SourceFormat { Brat, Conllx, Bioc };

std::string_view to_string(Layer layer);
std::string_view to_string(Directionality dir);
std::string_view to_string(SourceFormat format);
Layer parse_layer(std::string_view s);
Directionality parse_directionality(std::string_view s);
SourceFormat parse_source_format(std::string_view s);

/// Half-open character range [start, end) into Document::text.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  auto operator<=>(const Span&) const = default;
};

struct Token {
  std::size_t index = 0;
  Span span;
  std::string surface;
  /// Format-specific columns that have no graph meaning (CoNLL-X LEMMA, FEATS, ...).
  std::map<std::string, std::string> fields;

  bool operator==(const Token&) const = default;
};

/// BRAT-style attribute; rendered as a label suffix on its target.
struct Attribute {
  std::string id;
  std::string name;
  std::optional<std::string> value;

  bool operator==(const Attribute&) const = default;
};

struct Mention {
  std::string id;
  std::string label;
  std::optional<std::string> type;
  /// Sorted, non-overlapping; more than one entry encodes a discontinuous span.
  std::vector<Span> anchors;
  Layer layer = Layer::Semantic;
  std::vector<Attribute> attributes;

  bool operator==(const Mention&) const = default;
};

struct TokenRef {
  std::size_t index = 0;
  auto operator<=>(const TokenRef&) const = default;
};
struct MentionRef {
  std::string id;
  auto operator<=>(const MentionRef&) const = default;
};
struct RelationRef {
  std::string id;
  auto operator<=>(const RelationRef&) const = default;
};

/// Reference to a token, a mention or a relation. Relation references are
/// what make links-to-links possible.
using AnchorRef = std::variant<TokenRef, MentionRef, RelationRef>;

struct Argument {
  std::string role;
  AnchorRef target;

  bool operator==(const Argument&) const = default;
};

struct Relation {
  std::string id;
  /// Absent for trigger-free relations, which then need at least two arguments.
  std::optional<AnchorRef> trigger;
  std::vector<Argument> arguments;
  Directionality direction = Directionality::Directed;
  std::string label;
  std::optional<std::string> type;
  Layer layer = Layer::Semantic;
  std::vector<Attribute> attributes;

  bool operator==(const Relation&) const = default;
};

/// A sentence (CoNLL-X) or passage (BioC) boundary.
struct Segment {
  Span span;
  std::string label;
  std::map<std::string, std::string> fields;

  bool operator==(const Segment&) const = default;
};

/// Opaque record carried through unchanged, e.g. BRAT N- and #-lines.
struct MetadataRecord {
  std::string id;
  std::string kind;
  std::string target;
  std::string body;

  bool operator==(const MetadataRecord&) const = default;
};

/// Orders ids like "T2" before "T10".
struct NaturalLess {
  bool operator()(std::string_view a, std::string_view b) const;
  using is_transparent = void;
};

using MentionMap = std::map<std::string, Mention, NaturalLess>;
using RelationMap = std::map<std::string, Relation, NaturalLess>;

struct Document {
  std::string id;
  std::string text;
  std::vector<Token> tokens;
  MentionMap mentions;
  RelationMap relations;
  SourceFormat source_format = SourceFormat::Brat;
  std::optional<std::string> taxonomy_ref;
  std::vector<Segment> segments;
  std::vector<MetadataRecord> metadata;

  bool operator==(const Document&) const = default;

  const Mention* find_mention(std::string_view id) const;
  const Relation* find_relation(std::string_view id) const;
};

// ---------------------------------------------------------------------------
// Element ids. Mentions and relations use their own ids; tokens are addressed
// as "tok:<index>".

std::string token_element_id(std::size_t index);
std::string element_id(const AnchorRef& ref);
/// Resolves an element id against the document, or nullopt if unknown.
std::optional<AnchorRef> resolve_element(const Document& doc, std::string_view id);
bool resolves(const Document& doc, const AnchorRef& ref);
bool is_relation_ref(const AnchorRef& ref);

/// Trigger (if any) followed by argument targets, in stored order.
std::vector<AnchorRef> endpoints(const Relation& rel);

std::string display_label(const Mention& m);
std::string display_label(const Relation& r);

// ---------------------------------------------------------------------------
// Operations. All are pure: the input document is never modified.

Document add_mention(const Document& doc, Mention mention);
Document add_relation(const Document& doc, Relation rel);

struct DeleteResult {
  Document document;
  std::set<std::string, NaturalLess> removed_ids;
};

/// Removes the element and, transitively, every relation that referenced a
/// removed element via its trigger or an argument.
DeleteResult delete_element(const Document& doc, std::string_view id);

/// Appends an argument to an existing relation. Throws UnknownId,
/// DanglingReference or CycleDetected.
Document add_argument(const Document& doc, std::string_view relation_id, Argument arg);

Document relabel(const Document& doc, std::string_view id, std::string label);
Document retype(const Document& doc, std::string_view id, std::optional<std::string> type);
Document reattach(const Document& doc, std::string_view relation_id, std::size_t arg_index,
                  AnchorRef target);

/// True when `from` reaches `to` through trigger/argument references
/// (a relation reaches itself).
bool relation_reaches(const Document& doc, std::string_view from, std::string_view to);

// ---------------------------------------------------------------------------
// Validation (used by the CLI `validate` command and by parsers).

enum class Severity { Warning, Error };

struct Issue {
  Severity severity = Severity::Error;
  std::string element;
  std::string message;
};

std::vector<Issue> validate(const Document& doc);

// ---------------------------------------------------------------------------
// Structural equality.

enum class EqualityScope {
  /// Everything except the document id and source format.
  Full,
  /// Text, token spans and the annotation graph; ignores format-specific
  /// token fields, segments and metadata. Used across formats.
  Annotations,
};

bool structurally_equal(const Document& a, const Document& b,
                        EqualityScope scope = EqualityScope::Full);
/// Human-readable description of the first difference, empty when equal.
std::string first_difference(const Document& a, const Document& b,
                             EqualityScope scope = EqualityScope::Full);

// ---------------------------------------------------------------------------
// Visibility filtering.

struct VisibilityFilter {
  std::optional<std::set<std::string>> include_types;
  std::optional<std::set<std::string>> exclude_types;
  bool show_semantic = true;
  bool show_syntactic = true;
  std::set<std::string> hidden_ids;

  bool operator==(const VisibilityFilter&) const = default;
};

struct FilterResult {
  std::set<std::string, NaturalLess> visible_ids;
  std::vector<std::string> warnings;

  bool visible(std::string_view id) const { return visible_ids.contains(id); }
};

/// Tokens are always visible. A mention is visible when its layer is shown,
/// its type passes the include/exclude sets and it is not hidden. A relation
/// additionally needs every endpoint to be visible. When a taxonomy is given,
/// a type matches a filter name if the name is the type or one of its
/// ancestors; names missing from the taxonomy produce warnings.
FilterResult apply_filter(const Document& doc, const VisibilityFilter& filter,
                          const Taxonomy* taxonomy = nullptr);

}  // namespace tag
