#include <algorithm>
#include <map>
#include <regex>
#include <set>

#include "format_common.hpp"
#include "tag/formats.hpp"

namespace tag {

namespace {

constexpr std::size_t kColumns = 10;
constexpr std::string_view kRootType = "ROOT";

// Column positions.
enum Col { kId, kForm, kLemma, kCpostag, kPostag, kFeats, kHead, kDeprel, kPhead, kPdeprel };

// Token columns kept verbatim; '_' means absent.
constexpr std::pair<Col, std::string_view> kStoredFields[] = {
    {kLemma, "lemma"}, {kCpostag, "cpostag"}, {kFeats, "feats"}, {kPhead, "phead"}, {kPdeprel, "pdeprel"}};

struct Row {
  std::size_t line = 0;
  std::vector<std::string> cols;
};

std::optional<std::string> field(const std::string& value) {
  if (value == "_") return std::nullopt;
  return value;
}

std::string line_locator(std::size_t line) { return "line " + std::to_string(line); }

bool is_root_marker(const Mention& m, const Span& sentence) {
  return m.layer == Layer::Syntactic && m.type && *m.type == kRootType && m.anchors.size() == 1 &&
         m.anchors.front() == sentence;
}

}  // namespace

ParsedDocument parse_conllx(std::string_view input, std::string document_id) {
  ParsedDocument out;
  ParseReport& report = out.report;
  report.source_format = SourceFormat::Conllx;
  Document& doc = out.document;
  doc.id = std::move(document_id);
  doc.source_format = SourceFormat::Conllx;

  ErrorCode first_code = ErrorCode::ColumnCountMismatch;
  auto fail = [&](ErrorCode code, std::size_t line, std::string message) {
    if (report.errors.empty()) first_code = code;
    report.errors.push_back({line_locator(line), std::move(message)});
  };

  std::vector<std::vector<Row>> sentences(1);
  const auto lines = detail::lines_of(input);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    std::string_view line = lines[i];
    if (detail::trim(line).empty()) {
      if (!sentences.back().empty()) sentences.emplace_back();
      continue;
    }
    if (line.front() == '#') {
      report.warnings.push_back({line_locator(lineno), "comment line skipped"});
      report.dropped.push_back({line_locator(lineno), std::string(line)});
      continue;
    }
    auto parts = detail::split(line, '\t');
    if (parts.size() != kColumns) {
      fail(ErrorCode::ColumnCountMismatch, lineno,
           "expected 10 tab-separated columns, found " + std::to_string(parts.size()));
      continue;
    }
    Row row;
    row.line = lineno;
    for (auto p : parts) row.cols.emplace_back(p);
    auto& sentence = sentences.back();
    auto id = detail::parse_index(row.cols[kId]);
    if (!id || *id != sentence.size() + 1) {
      fail(ErrorCode::MalformedLine, lineno,
           "token id '" + row.cols[kId] + "' should be " + std::to_string(sentence.size() + 1));
    }
    if (row.cols[kForm].empty()) fail(ErrorCode::MalformedLine, lineno, "empty FORM");
    sentence.push_back(std::move(row));
  }
  if (sentences.back().empty()) sentences.pop_back();

  std::size_t total = 0;
  for (const auto& s : sentences) total += s.size();

  std::size_t token_no = 0;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const auto& rows = sentences[s];
    const std::size_t first_token = token_no;
    for (const Row& row : rows) {
      if (!doc.text.empty()) doc.text += ' ';
      Token tok;
      tok.index = token_no;
      tok.span = {doc.text.size(), doc.text.size() + row.cols[kForm].size()};
      tok.surface = row.cols[kForm];
      doc.text += tok.surface;
      for (const auto& [col, name] : kStoredFields) {
        if (auto v = field(row.cols[col])) tok.fields.emplace(name, *v);
      }

      Mention pos;
      pos.id = "T" + std::to_string(token_no + 1);
      pos.type = field(row.cols[kPostag]);
      pos.label = row.cols[kPostag];
      pos.anchors = {tok.span};
      pos.layer = Layer::Syntactic;
      doc.mentions.emplace(pos.id, std::move(pos));
      doc.tokens.push_back(std::move(tok));
      ++token_no;
    }

    Segment seg;
    seg.span = {doc.tokens[first_token].span.start, doc.tokens.back().span.end};
    seg.label = "s" + std::to_string(s + 1);
    doc.segments.push_back(seg);

    Mention root;
    root.id = "T" + std::to_string(total + s + 1);
    root.type = std::string(kRootType);
    root.label = std::string(kRootType);
    root.anchors = {seg.span};
    root.layer = Layer::Syntactic;
    const std::string root_id = root.id;
    doc.mentions.emplace(root.id, std::move(root));

    for (std::size_t k = 0; k < rows.size(); ++k) {
      const Row& row = rows[k];
      auto head = detail::parse_index(row.cols[kHead]);
      if (!head) {
        fail(ErrorCode::NonNumericHead, row.line, "HEAD '" + row.cols[kHead] + "' is not a number");
        continue;
      }
      if (*head > rows.size()) {
        fail(ErrorCode::HeadOutOfRange, row.line,
             "HEAD " + std::to_string(*head) + " exceeds sentence length " + std::to_string(rows.size()));
        continue;
      }
      Relation dep;
      dep.id = "E" + std::to_string(first_token + k + 1);
      dep.trigger = MentionRef{*head == 0 ? root_id : "T" + std::to_string(first_token + *head)};
      dep.arguments = {{row.cols[kDeprel], MentionRef{"T" + std::to_string(first_token + k + 1)}}};
      dep.direction = Directionality::Directed;
      dep.label = row.cols[kDeprel];
      dep.type = field(row.cols[kDeprel]);
      dep.layer = Layer::Syntactic;
      doc.relations.emplace(dep.id, std::move(dep));
    }
  }

  if (report.errors.empty()) {
    detail::check_references(doc, report, [](const std::string& element) { return element; });
    if (!report.errors.empty()) first_code = ErrorCode::CycleDetected;
  }
  if (!report.errors.empty()) detail::throw_parse_error(first_code, std::move(report));
  return out;
}

namespace {

std::size_t max_numbered(const auto& map, char prefix) {
  static const std::regex numbered("[A-Za-z]([0-9]+)");
  std::size_t best = 0;
  for (const auto& [id, unused] : map) {
    std::smatch m;
    if (!id.empty() && id.front() == prefix && std::regex_match(id, m, numbered)) {
      best = std::max<std::size_t>(best, std::stoul(m[1]));
    }
  }
  return best;
}

}  // namespace

ParsedDocument overlay_conllx(const Document& base, std::string_view conllx) {
  ParsedDocument syntax = parse_conllx(conllx, base.id);
  ParsedDocument out;
  out.report = syntax.report;
  out.report.source_format = base.source_format;
  Document& doc = out.document;
  doc = base;

  // Align each form against the base text, left to right.
  std::map<std::size_t, std::size_t> start_of, end_of;  // syntax offsets -> base offsets
  std::size_t pos = 0;
  for (const Token& t : syntax.document.tokens) {
    auto found = base.text.find(t.surface, pos);
    if (found == std::string::npos) {
      ParseReport report = out.report;
      report.errors.push_back({token_element_id(t.index),
                               "form '" + t.surface + "' not found in the text after offset " +
                                   std::to_string(pos)});
      detail::throw_parse_error(ErrorCode::TextMismatch, std::move(report));
    }
    if (base.text.find_first_not_of(" \t\r\n", pos) != found) {
      out.report.warnings.push_back({token_element_id(t.index), "form '" + t.surface +
                                                                    "' aligned after skipped text"});
    }
    start_of[t.span.start] = found;
    end_of[t.span.end] = found + t.surface.size();
    pos = found + t.surface.size();
  }
  auto map_span = [&](const Span& s) { return Span{start_of.at(s.start), end_of.at(s.end)}; };

  const std::size_t mention_base = max_numbered(base.mentions, 'T');
  const std::size_t relation_base = max_numbered(base.relations, 'E');
  std::map<std::string, std::string> renamed;
  std::size_t n = 0;
  for (const auto& [id, m] : syntax.document.mentions) renamed[id] = "T" + std::to_string(mention_base + ++n);
  n = 0;
  for (const auto& [id, r] : syntax.document.relations) renamed[id] = "E" + std::to_string(relation_base + ++n);
  auto rename_ref = [&](AnchorRef ref) -> AnchorRef {
    if (auto* m = std::get_if<MentionRef>(&ref)) m->id = renamed.at(m->id);
    if (auto* r = std::get_if<RelationRef>(&ref)) r->id = renamed.at(r->id);
    return ref;
  };

  for (auto [id, m] : syntax.document.mentions) {
    m.id = renamed.at(id);
    for (auto& a : m.anchors) a = map_span(a);
    if (doc.mentions.contains(m.id) || doc.relations.contains(m.id)) {
      throw Error(ErrorCode::DuplicateId, "overlay id '" + m.id + "' collides with the base document");
    }
    doc.mentions.emplace(m.id, std::move(m));
  }
  for (auto [id, r] : syntax.document.relations) {
    r.id = renamed.at(id);
    if (r.trigger) r.trigger = rename_ref(*r.trigger);
    for (auto& arg : r.arguments) arg.target = rename_ref(arg.target);
    if (doc.mentions.contains(r.id) || doc.relations.contains(r.id)) {
      throw Error(ErrorCode::DuplicateId, "overlay id '" + r.id + "' collides with the base document");
    }
    doc.relations.emplace(r.id, std::move(r));
  }
  for (auto seg : syntax.document.segments) {
    seg.span = map_span(seg.span);
    doc.segments.push_back(std::move(seg));
  }

  // Re-split tokens so both layers share boundaries; token references in the
  // base follow their start offset.
  std::vector<Token> tokens = tokenize(doc.text, doc.mentions);
  std::map<std::size_t, std::size_t> token_at;
  for (const auto& t : tokens) token_at[t.span.start] = t.index;
  for (const Token& t : syntax.document.tokens) {
    if (auto it = token_at.find(start_of.at(t.span.start)); it != token_at.end()) {
      tokens[it->second].fields = t.fields;
    }
  }
  auto retarget = [&](AnchorRef& ref) {
    if (auto* t = std::get_if<TokenRef>(&ref)) {
      auto it = token_at.find(base.tokens.at(t->index).span.start);
      if (it == token_at.end()) {
        throw Error(ErrorCode::InvalidOperation, "token reference lost while merging layers");
      }
      t->index = it->second;
    }
  };
  for (auto& [id, r] : doc.relations) {
    if (r.trigger) retarget(*r.trigger);
    for (auto& arg : r.arguments) retarget(arg.target);
  }
  doc.tokens = std::move(tokens);
  return out;
}

SerializedDocument serialize_conllx(const Document& doc) {
  SerializedDocument out;
  out.report.source_format = SourceFormat::Conllx;
  if (doc.tokens.empty()) {
    throw Error(ErrorCode::NotRepresentable, "CoNLL-X needs at least one token");
  }

  // Sentences come from segments when they tile the tokens, otherwise the
  // whole document is one sentence.
  std::vector<Span> sentences;
  std::vector<std::size_t> sentence_of(doc.tokens.size(), 0);
  {
    bool usable = !doc.segments.empty();
    std::size_t t = 0;
    for (std::size_t s = 0; usable && s < doc.segments.size(); ++s) {
      const Span& span = doc.segments[s].span;
      const std::size_t first = t;
      while (t < doc.tokens.size() && doc.tokens[t].span.end <= span.end &&
             doc.tokens[t].span.start >= span.start) {
        sentence_of[t++] = s;
      }
      usable = t > first;
    }
    usable = usable && t == doc.tokens.size();
    if (usable) {
      for (const auto& seg : doc.segments) sentences.push_back(seg.span);
    } else {
      sentences = {{doc.tokens.front().span.start, doc.tokens.back().span.end}};
      std::fill(sentence_of.begin(), sentence_of.end(), 0);
    }
  }
  std::vector<std::size_t> position(doc.tokens.size());
  {
    std::size_t prev = SIZE_MAX, k = 0;
    for (std::size_t t = 0; t < doc.tokens.size(); ++t) {
      k = sentence_of[t] == prev ? k + 1 : 1;
      prev = sentence_of[t];
      position[t] = k;
    }
  }

  std::map<std::pair<std::size_t, std::size_t>, std::size_t> token_by_span;
  for (const auto& t : doc.tokens) token_by_span[{t.span.start, t.span.end}] = t.index;

  std::set<std::string, NaturalLess> consumed;
  auto root_sentence = [&](const Mention& m) -> std::optional<std::size_t> {
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      if (is_root_marker(m, sentences[s])) return s;
    }
    return std::nullopt;
  };
  auto token_of = [&](const AnchorRef& ref) -> std::optional<std::size_t> {
    if (const auto* t = std::get_if<TokenRef>(&ref)) return t->index;
    if (const auto* mr = std::get_if<MentionRef>(&ref)) {
      const Mention& m = doc.mentions.at(mr->id);
      if (m.anchors.size() != 1 || root_sentence(m)) return std::nullopt;
      auto it = token_by_span.find({m.anchors[0].start, m.anchors[0].end});
      if (it != token_by_span.end()) return it->second;
    }
    return std::nullopt;
  };

  std::vector<const Mention*> pos(doc.tokens.size(), nullptr);
  for (const auto& [id, m] : doc.mentions) {
    if (m.layer != Layer::Syntactic) continue;
    auto t = token_of(MentionRef{id});
    if (t && pos[*t] == nullptr) {
      pos[*t] = &m;
      consumed.insert(id);
    }
  }

  struct Head {
    std::size_t head = 0;
    std::string deprel;
  };
  std::vector<std::optional<Head>> heads(doc.tokens.size());
  for (const auto& [id, r] : doc.relations) {
    if (r.layer != Layer::Syntactic || !r.trigger || r.arguments.size() != 1) continue;
    auto dep = token_of(r.arguments[0].target);
    if (!dep || heads[*dep]) continue;
    std::optional<std::size_t> head;
    if (auto h = token_of(*r.trigger); h && sentence_of[*h] == sentence_of[*dep]) {
      head = position[*h];
    } else if (const auto* mr = std::get_if<MentionRef>(&*r.trigger)) {
      auto s = root_sentence(doc.mentions.at(mr->id));
      if (s && *s == sentence_of[*dep]) {
        head = 0;
        consumed.insert(mr->id);
      }
    }
    if (!head) continue;
    heads[*dep] = Head{*head, r.arguments[0].role};
    consumed.insert(id);
  }

  std::string text;
  for (std::size_t t = 0; t < doc.tokens.size(); ++t) {
    const Token& tok = doc.tokens[t];
    if (t > 0 && sentence_of[t] != sentence_of[t - 1]) text += '\n';
    auto get = [&](std::string_view key) {
      auto it = tok.fields.find(std::string(key));
      return it == tok.fields.end() ? std::string("_") : it->second;
    };
    if (!heads[t]) {
      out.report.warnings.push_back({token_element_id(t), "no head; written as a root"});
    }
    const Head h = heads[t].value_or(Head{0, "_"});
    text += std::to_string(position[t]) + '\t' + tok.surface + '\t' + get("lemma") + '\t' +
            get("cpostag") + '\t' + (pos[t] ? pos[t]->label : std::string("_")) + '\t' + get("feats") +
            '\t' + std::to_string(h.head) + '\t' + (h.deprel.empty() ? "_" : h.deprel) + '\t' +
            get("phead") + '\t' + get("pdeprel") + '\n';
  }
  text += '\n';

  for (const auto& [id, m] : doc.mentions) {
    if (consumed.contains(id)) continue;
    if (m.layer == Layer::Syntactic && root_sentence(m)) continue;
    out.report.dropped.push_back({id, std::string(to_string(m.layer)) + " mention has no CoNLL-X column"});
  }
  for (const auto& [id, r] : doc.relations) {
    if (consumed.contains(id)) continue;
    out.report.dropped.push_back({id, std::string(to_string(r.layer)) + " relation has no CoNLL-X column"});
  }
  out.content = std::move(text);
  return out;
}

}  // namespace tag
