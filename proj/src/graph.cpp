#include "tag/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <deque>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "tag/error.hpp"
#include "tag/taxonomy.hpp"

namespace tag {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::DanglingReference: return "DANGLING_REFERENCE";
    case ErrorCode::CycleDetected: return "CYCLE_DETECTED";
    case ErrorCode::DuplicateId: return "DUPLICATE_ID";
    case ErrorCode::UnknownId: return "UNKNOWN_ID";
    case ErrorCode::UnknownType: return "UNKNOWN_TYPE";
    case ErrorCode::InvalidSpan: return "INVALID_SPAN";
    case ErrorCode::InvalidOperation: return "INVALID_OPERATION";
    case ErrorCode::MalformedLine: return "MALFORMED_LINE";
    case ErrorCode::OffsetOutOfBounds: return "OFFSET_OUT_OF_BOUNDS";
    case ErrorCode::TextMismatch: return "TEXT_MISMATCH";
    case ErrorCode::ColumnCountMismatch: return "COLUMN_COUNT_MISMATCH";
    case ErrorCode::NonNumericHead: return "NON_NUMERIC_HEAD";
    case ErrorCode::HeadOutOfRange: return "HEAD_OUT_OF_RANGE";
    case ErrorCode::XmlMalformed: return "XML_MALFORMED";
    case ErrorCode::UnknownRefId: return "UNKNOWN_REF_ID";
    case ErrorCode::DuplicateTypeName: return "DUPLICATE_TYPE_NAME";
    case ErrorCode::IndentationError: return "INDENTATION_ERROR";
    case ErrorCode::InvalidColor: return "INVALID_COLOR";
    case ErrorCode::NotRepresentable: return "NOT_REPRESENTABLE";
    case ErrorCode::TokenTooWide: return "TOKEN_TOO_WIDE";
    case ErrorCode::RangeOutOfBounds: return "RANGE_OUT_OF_BOUNDS";
    case ErrorCode::UnknownRef: return "UNKNOWN_REF";
    case ErrorCode::InvalidArgIndex: return "INVALID_ARG_INDEX";
    case ErrorCode::NothingToUndo: return "NOTHING_TO_UNDO";
    case ErrorCode::BaseMismatch: return "BASE_MISMATCH";
    case ErrorCode::ReplayConflict: return "REPLAY_CONFLICT";
    case ErrorCode::BadRequest: return "BAD_REQUEST";
    case ErrorCode::NotFound: return "NOT_FOUND";
  }
  return "UNKNOWN";
}

std::string_view to_string(Layer layer) {
  return layer == Layer::Semantic ? "semantic" : "syntactic";
}

std::string_view to_string(Directionality dir) {
  switch (dir) {
    case Directionality::Directed: return "directed";
    case Directionality::Undirected: return "undirected";
    case Directionality::Bidirectional: return "bidirectional";
  }
  return "directed";
}

std::string_view to_string(SourceFormat format) {
  switch (format) {
    case SourceFormat::Brat: return "brat";
    case SourceFormat::Conllx: return "conllx";
    case SourceFormat::Bioc: return "bioc";
  }
  return "brat";
}

Layer parse_layer(std::string_view s) {
  if (s == "semantic") return Layer::Semantic;
  if (s == "syntactic") return Layer::Syntactic;
  throw Error(ErrorCode::BadRequest, "unknown layer '" + std::string(s) + "'");
}

Directionality parse_directionality(std::string_view s) {
  if (s == "directed") return Directionality::Directed;
  if (s == "undirected") return Directionality::Undirected;
  if (s == "bidirectional") return Directionality::Bidirectional;
  throw Error(ErrorCode::BadRequest, "unknown directionality '" + std::string(s) + "'");
}

SourceFormat parse_source_format(std::string_view s) {
  if (s == "brat") return SourceFormat::Brat;
  if (s == "conllx" || s == "conll") return SourceFormat::Conllx;
  if (s == "bioc") return SourceFormat::Bioc;
  throw Error(ErrorCode::BadRequest, "unknown format '" + std::string(s) + "'");
}

bool NaturalLess::operator()(std::string_view a, std::string_view b) const {
  std::size_t i = 0, j = 0;
  auto is_digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  while (i < a.size() && j < b.size()) {
    if (is_digit(a[i]) && is_digit(b[j])) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && is_digit(a[ie])) ++ie;
      while (je < b.size() && is_digit(b[je])) ++je;
      auto na = a.substr(i, ie - i), nb = b.substr(j, je - j);
      while (na.size() > 1 && na.front() == '0') na.remove_prefix(1);
      while (nb.size() > 1 && nb.front() == '0') nb.remove_prefix(1);
      if (na.size() != nb.size()) return na.size() < nb.size();
      if (na != nb) return na < nb;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  if ((a.size() - i) != (b.size() - j)) return (a.size() - i) < (b.size() - j);
  return a < b;
}

const Mention* Document::find_mention(std::string_view id) const {
  auto it = mentions.find(id);
  return it == mentions.end() ? nullptr : &it->second;
}

const Relation* Document::find_relation(std::string_view id) const {
  auto it = relations.find(id);
  return it == relations.end() ? nullptr : &it->second;
}

namespace {

constexpr std::string_view kTokenPrefix = "tok:";

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += " -> ";
    out += id;
  }
  return out;
}

bool has_id(const Document& doc, std::string_view id) {
  return doc.mentions.contains(id) || doc.relations.contains(id);
}

// Path of relation ids from `from` to `to`, empty when unreachable.
std::vector<std::string> find_path(const Document& doc, std::string_view from,
                                   std::string_view to) {
  std::vector<std::string> path;
  std::unordered_set<std::string> seen;
  std::function<bool(const std::string&)> visit = [&](const std::string& id) -> bool {
    path.push_back(id);
    if (id == to) return true;
    if (seen.insert(id).second) {
      if (const Relation* rel = doc.find_relation(id)) {
        for (const auto& ep : endpoints(*rel)) {
          if (const auto* r = std::get_if<RelationRef>(&ep)) {
            if (visit(r->id)) return true;
          }
        }
      }
    }
    path.pop_back();
    return false;
  };
  visit(std::string(from));
  return path;
}

void check_resolves(const Document& doc, const AnchorRef& ref, std::string_view owner) {
  if (!resolves(doc, ref)) {
    throw Error(ErrorCode::DanglingReference,
                std::string(owner) + " references unknown element '" + element_id(ref) + "'");
  }
}

// A new edge owner -> target closes a cycle when target already reaches owner.
void check_acyclic_edge(const Document& doc, std::string_view owner, const AnchorRef& target) {
  const auto* r = std::get_if<RelationRef>(&target);
  if (r == nullptr) return;
  if (r->id == owner) {
    throw Error(ErrorCode::CycleDetected, "relation '" + std::string(owner) + "' references itself");
  }
  auto path = find_path(doc, r->id, owner);
  if (!path.empty()) {
    path.insert(path.begin(), std::string(owner));
    throw Error(ErrorCode::CycleDetected, "reference cycle: " + join_ids(path));
  }
}

void check_spans(const Document& doc, const std::vector<Span>& anchors, std::string_view owner) {
  if (anchors.empty()) {
    throw Error(ErrorCode::InvalidSpan, "mention '" + std::string(owner) + "' has no anchors");
  }
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const Span& s = anchors[i];
    if (s.start >= s.end || s.end > doc.text.size()) {
      throw Error(ErrorCode::InvalidSpan, "mention '" + std::string(owner) + "' has span (" +
                                              std::to_string(s.start) + "," + std::to_string(s.end) +
                                              ") outside the text or empty");
    }
    if (i > 0 && anchors[i - 1].end > s.start) {
      throw Error(ErrorCode::InvalidSpan,
                  "mention '" + std::string(owner) + "' has unsorted or overlapping anchors");
    }
  }
}

}  // namespace

std::string token_element_id(std::size_t index) {
  return std::string(kTokenPrefix) + std::to_string(index);
}

std::string element_id(const AnchorRef& ref) {
  return std::visit(Overloaded{
                        [](const TokenRef& t) { return token_element_id(t.index); },
                        [](const MentionRef& m) { return m.id; },
                        [](const RelationRef& r) { return r.id; },
                    },
                    ref);
}

std::optional<AnchorRef> resolve_element(const Document& doc, std::string_view id) {
  if (doc.mentions.contains(id)) return MentionRef{std::string(id)};
  if (doc.relations.contains(id)) return RelationRef{std::string(id)};
  if (id.starts_with(kTokenPrefix)) {
    auto digits = id.substr(kTokenPrefix.size());
    std::size_t index = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty() &&
        index < doc.tokens.size()) {
      return TokenRef{index};
    }
  }
  return std::nullopt;
}

bool resolves(const Document& doc, const AnchorRef& ref) {
  return std::visit(Overloaded{
                        [&](const TokenRef& t) { return t.index < doc.tokens.size(); },
                        [&](const MentionRef& m) { return doc.mentions.contains(m.id); },
                        [&](const RelationRef& r) { return doc.relations.contains(r.id); },
                    },
                    ref);
}

bool is_relation_ref(const AnchorRef& ref) { return std::holds_alternative<RelationRef>(ref); }

std::vector<AnchorRef> endpoints(const Relation& rel) {
  std::vector<AnchorRef> out;
  out.reserve(rel.arguments.size() + 1);
  if (rel.trigger) out.push_back(*rel.trigger);
  for (const auto& arg : rel.arguments) out.push_back(arg.target);
  return out;
}

namespace {
std::string with_attributes(std::string label, const std::vector<Attribute>& attributes) {
  for (const auto& a : attributes) {
    label += " [" + a.name;
    if (a.value) label += "=" + *a.value;
    label += "]";
  }
  return label;
}
}  // namespace

std::string display_label(const Mention& m) { return with_attributes(m.label, m.attributes); }
std::string display_label(const Relation& r) { return with_attributes(r.label, r.attributes); }

Document add_mention(const Document& doc, Mention mention) {
  if (mention.id.empty() || has_id(doc, mention.id) || resolve_element(doc, mention.id)) {
    throw Error(ErrorCode::DuplicateId, "element id '" + mention.id + "' is empty or already in use");
  }
  check_spans(doc, mention.anchors, mention.id);
  Document out = doc;
  std::string id = mention.id;
  out.mentions.emplace(std::move(id), std::move(mention));
  return out;
}

Document add_relation(const Document& doc, Relation rel) {
  if (rel.id.empty() || has_id(doc, rel.id) || resolve_element(doc, rel.id)) {
    throw Error(ErrorCode::DuplicateId, "element id '" + rel.id + "' is empty or already in use");
  }
  // Self-reference is reported as a cycle even though the id is not yet known.
  for (const auto& ep : endpoints(rel)) {
    if (const auto* r = std::get_if<RelationRef>(&ep); r && r->id == rel.id) {
      throw Error(ErrorCode::CycleDetected, "relation '" + rel.id + "' references itself");
    }
  }
  if (rel.arguments.empty()) {
    throw Error(ErrorCode::InvalidOperation, "relation '" + rel.id + "' has no arguments");
  }
  if (!rel.trigger && rel.arguments.size() < 2) {
    throw Error(ErrorCode::InvalidOperation,
                "trigger-free relation '" + rel.id + "' needs at least two arguments");
  }
  for (const auto& ep : endpoints(rel)) check_resolves(doc, ep, rel.id);
  Document out = doc;
  std::string id = rel.id;
  out.relations.emplace(std::move(id), std::move(rel));
  return out;
}

DeleteResult delete_element(const Document& doc, std::string_view id) {
  if (id.starts_with(kTokenPrefix) && resolve_element(doc, id)) {
    throw Error(ErrorCode::InvalidOperation, "tokens cannot be deleted");
  }
  if (!has_id(doc, id)) {
    throw Error(ErrorCode::UnknownId, "unknown element '" + std::string(id) + "'");
  }

  std::unordered_map<std::string, std::vector<std::string>> referrers;
  for (const auto& [rid, rel] : doc.relations) {
    for (const auto& ep : endpoints(rel)) referrers[element_id(ep)].push_back(rid);
  }

  DeleteResult result;
  std::deque<std::string> queue{std::string(id)};
  result.removed_ids.insert(std::string(id));
  while (!queue.empty()) {
    std::string cur = std::move(queue.front());
    queue.pop_front();
    auto it = referrers.find(cur);
    if (it == referrers.end()) continue;
    for (const auto& rid : it->second) {
      if (result.removed_ids.insert(rid).second) queue.push_back(rid);
    }
  }

  result.document = doc;
  for (const auto& removed : result.removed_ids) {
    if (auto m = result.document.mentions.find(removed); m != result.document.mentions.end()) {
      result.document.mentions.erase(m);
    } else {
      result.document.relations.erase(result.document.relations.find(removed));
    }
  }
  return result;
}

Document add_argument(const Document& doc, std::string_view relation_id, Argument arg) {
  const Relation* rel = doc.find_relation(relation_id);
  if (rel == nullptr) {
    throw Error(ErrorCode::UnknownId, "unknown relation '" + std::string(relation_id) + "'");
  }
  check_acyclic_edge(doc, relation_id, arg.target);
  check_resolves(doc, arg.target, relation_id);
  Document out = doc;
  out.relations.find(relation_id)->second.arguments.push_back(std::move(arg));
  return out;
}

Document relabel(const Document& doc, std::string_view id, std::string label) {
  Document out = doc;
  if (auto m = out.mentions.find(id); m != out.mentions.end()) {
    m->second.label = std::move(label);
  } else if (auto r = out.relations.find(id); r != out.relations.end()) {
    r->second.label = std::move(label);
  } else {
    throw Error(ErrorCode::UnknownId, "unknown element '" + std::string(id) + "'");
  }
  return out;
}

Document retype(const Document& doc, std::string_view id, std::optional<std::string> type) {
  Document out = doc;
  if (auto m = out.mentions.find(id); m != out.mentions.end()) {
    m->second.type = std::move(type);
  } else if (auto r = out.relations.find(id); r != out.relations.end()) {
    r->second.type = std::move(type);
  } else {
    throw Error(ErrorCode::UnknownId, "unknown element '" + std::string(id) + "'");
  }
  return out;
}

Document reattach(const Document& doc, std::string_view relation_id, std::size_t arg_index,
                  AnchorRef target) {
  const Relation* rel = doc.find_relation(relation_id);
  if (rel == nullptr) {
    throw Error(ErrorCode::UnknownId, "unknown relation '" + std::string(relation_id) + "'");
  }
  if (arg_index >= rel->arguments.size()) {
    throw Error(ErrorCode::InvalidArgIndex, "relation '" + std::string(relation_id) + "' has " +
                                                std::to_string(rel->arguments.size()) +
                                                " arguments; index " + std::to_string(arg_index) +
                                                " is out of range");
  }
  check_resolves(doc, target, relation_id);
  check_acyclic_edge(doc, relation_id, target);
  Document out = doc;
  out.relations.find(relation_id)->second.arguments[arg_index].target = std::move(target);
  return out;
}

bool relation_reaches(const Document& doc, std::string_view from, std::string_view to) {
  return !find_path(doc, from, to).empty();
}

std::vector<Issue> validate(const Document& doc) {
  std::vector<Issue> issues;
  auto error = [&](std::string element, std::string message) {
    issues.push_back({Severity::Error, std::move(element), std::move(message)});
  };
  auto warning = [&](std::string element, std::string message) {
    issues.push_back({Severity::Warning, std::move(element), std::move(message)});
  };

  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    const Token& t = doc.tokens[i];
    const std::string id = token_element_id(i);
    if (t.index != i) error(id, "token index " + std::to_string(t.index) + " out of order");
    if (t.span.start >= t.span.end || t.span.end > doc.text.size()) {
      error(id, "token span outside the text or empty");
      continue;
    }
    if (doc.text.compare(t.span.start, t.span.length(), t.surface) != 0) {
      error(id, "token surface does not match the text");
    }
    if (i > 0 && doc.tokens[i - 1].span.end > t.span.start) {
      error(id, "token overlaps or precedes the previous token");
    }
  }

  for (const auto& [id, m] : doc.mentions) {
    if (id != m.id) error(id, "mention key does not match its id");
    try {
      check_spans(doc, m.anchors, id);
    } catch (const Error& e) {
      error(id, e.what());
    }
  }

  for (const auto& [id, rel] : doc.relations) {
    if (id != rel.id) error(id, "relation key does not match its id");
    if (doc.mentions.contains(id)) error(id, "id used by both a mention and a relation");
    if (rel.arguments.empty()) error(id, "relation has no arguments");
    if (!rel.trigger && rel.arguments.size() < 2) {
      error(id, "trigger-free relation has fewer than two arguments");
    }
    std::set<std::string> seen;
    for (const auto& ep : endpoints(rel)) {
      if (!resolves(doc, ep)) error(id, "dangling reference to '" + element_id(ep) + "'");
      if (!seen.insert(element_id(ep)).second) {
        warning(id, "element '" + element_id(ep) + "' appears in more than one role");
      }
    }
  }

  // Cycle check: iterative three-color DFS over relation references.
  enum class Color { White, Grey, Black };
  std::unordered_map<std::string, Color> color;
  for (const auto& [id, rel] : doc.relations) color[id] = Color::White;
  for (const auto& [start, unused] : doc.relations) {
    if (color[start] != Color::White) continue;
    std::vector<std::pair<std::string, std::size_t>> stack{{start, 0}};
    color[start] = Color::Grey;
    while (!stack.empty()) {
      auto& [cur, next] = stack.back();
      auto eps = endpoints(doc.relations.find(cur)->second);
      if (next >= eps.size()) {
        color[cur] = Color::Black;
        stack.pop_back();
        continue;
      }
      const AnchorRef ep = eps[next++];
      const auto* r = std::get_if<RelationRef>(&ep);
      if (r == nullptr || !doc.relations.contains(r->id)) continue;
      if (color[r->id] == Color::Grey) {
        error(cur, "reference cycle through '" + r->id + "'");
      } else if (color[r->id] == Color::White) {
        color[r->id] = Color::Grey;
        stack.emplace_back(r->id, 0);
      }
    }
  }
  return issues;
}

namespace {

std::string describe_span(const Span& s) {
  return "(" + std::to_string(s.start) + "," + std::to_string(s.end) + ")";
}

template <class Map>
std::string diff_maps(const Map& a, const Map& b, std::string_view what) {
  for (const auto& [id, x] : a) {
    auto it = b.find(id);
    if (it == b.end()) return std::string(what) + " '" + id + "' missing from second document";
    if (!(x == it->second)) return std::string(what) + " '" + id + "' differs";
  }
  for (const auto& [id, x] : b) {
    if (!a.contains(id)) return std::string(what) + " '" + id + "' missing from first document";
  }
  return {};
}

}  // namespace

std::string first_difference(const Document& a, const Document& b, EqualityScope scope) {
  if (a.text != b.text) return "text differs";
  if (a.tokens.size() != b.tokens.size()) {
    return "token count " + std::to_string(a.tokens.size()) + " vs " +
           std::to_string(b.tokens.size());
  }
  for (std::size_t i = 0; i < a.tokens.size(); ++i) {
    const Token& x = a.tokens[i];
    const Token& y = b.tokens[i];
    if (x.span != y.span || x.surface != y.surface || x.index != y.index) {
      return "token " + std::to_string(i) + " " + describe_span(x.span) + " vs " +
             describe_span(y.span);
    }
    if (scope == EqualityScope::Full && x.fields != y.fields) {
      return "token " + std::to_string(i) + " fields differ";
    }
  }
  if (auto d = diff_maps(a.mentions, b.mentions, "mention"); !d.empty()) return d;
  if (auto d = diff_maps(a.relations, b.relations, "relation"); !d.empty()) return d;
  if (scope == EqualityScope::Full) {
    if (a.segments != b.segments) return "segments differ";
    if (a.metadata != b.metadata) return "metadata differs";
  }
  return {};
}

bool structurally_equal(const Document& a, const Document& b, EqualityScope scope) {
  return first_difference(a, b, scope).empty();
}

FilterResult apply_filter(const Document& doc, const VisibilityFilter& filter,
                          const Taxonomy* taxonomy) {
  FilterResult result;

  if (taxonomy != nullptr) {
    auto check = [&](const std::optional<std::set<std::string>>& names, std::string_view which) {
      if (!names) return;
      for (const auto& n : *names) {
        if (!taxonomy->contains(n)) {
          result.warnings.push_back("UNKNOWN_TYPE: " + std::string(which) + " names '" + n +
                                    "', which is not in the taxonomy");
        }
      }
    };
    check(filter.include_types, "include_types");
    check(filter.exclude_types, "exclude_types");
  }

  // A type matches a filter set if it, or (with a taxonomy) any ancestor, is named.
  auto matches = [&](const std::optional<std::string>& type, const std::set<std::string>& names) {
    if (!type) return false;
    if (names.contains(*type)) return true;
    if (taxonomy != nullptr) {
      for (const auto& a : taxonomy->ancestors(*type)) {
        if (names.contains(a)) return true;
      }
    }
    return false;
  };
  auto passes = [&](Layer layer, const std::optional<std::string>& type, const std::string& id) {
    if (layer == Layer::Semantic && !filter.show_semantic) return false;
    if (layer == Layer::Syntactic && !filter.show_syntactic) return false;
    if (filter.include_types && !matches(type, *filter.include_types)) return false;
    if (filter.exclude_types && matches(type, *filter.exclude_types)) return false;
    return !filter.hidden_ids.contains(id);
  };

  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    result.visible_ids.insert(token_element_id(i));
  }
  for (const auto& [id, m] : doc.mentions) {
    if (passes(m.layer, m.type, id)) result.visible_ids.insert(id);
  }

  // Relations form a DAG; memoized DFS settles each one after its referents.
  std::unordered_map<std::string, bool> memo;
  std::function<bool(const std::string&)> relation_visible = [&](const std::string& id) -> bool {
    if (auto it = memo.find(id); it != memo.end()) return it->second;
    memo[id] = false;  // guards against malformed cyclic input
    const Relation& rel = doc.relations.find(id)->second;
    bool ok = passes(rel.layer, rel.type, id);
    for (const auto& ep : endpoints(rel)) {
      if (!ok) break;
      if (const auto* r = std::get_if<RelationRef>(&ep)) {
        ok = doc.relations.contains(r->id) && relation_visible(r->id);
      } else {
        ok = result.visible_ids.contains(element_id(ep));
      }
    }
    memo[id] = ok;
    return ok;
  };
  for (const auto& [id, rel] : doc.relations) {
    if (relation_visible(id)) result.visible_ids.insert(id);
  }
  return result;
}

}  // namespace tag
