#include <algorithm>
#include <map>
#include <regex>
#include <set>

#include "format_common.hpp"
#include "tag/formats.hpp"

namespace tag {

using detail::split;
using detail::split_words;

namespace {

// AnnotatorNotes carrying this prefix encode model properties BRAT has no
// column for (layer, directionality, label distinct from type).
constexpr std::string_view kNotePrefix = "tag:";

struct PendingRelation {
  Relation rel;
  std::vector<std::string> refs;  // raw ids, trigger first when present
  bool has_trigger = false;
  std::size_t line = 0;
};

struct PendingAttribute {
  Attribute attr;
  std::string target;
  std::size_t line = 0;
};

struct PendingNote {
  std::string target;
  std::string key;
  std::string value;
  std::size_t line = 0;
};

std::string line_locator(std::size_t line) { return "line " + std::to_string(line); }

std::optional<std::pair<std::string, std::string>> split_role(std::string_view pair) {
  auto colon = pair.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == pair.size()) {
    return std::nullopt;
  }
  return std::pair{std::string(pair.substr(0, colon)), std::string(pair.substr(colon + 1))};
}

}  // namespace

ParsedDocument parse_brat(std::string_view txt, std::string_view ann, std::string document_id) {
  ParsedDocument out;
  ParseReport& report = out.report;
  report.source_format = SourceFormat::Brat;
  Document& doc = out.document;
  doc.id = std::move(document_id);
  doc.text = std::string(txt);
  doc.source_format = SourceFormat::Brat;

  const detail::OffsetMap offsets(doc.text);
  std::vector<PendingRelation> relations;
  std::vector<PendingAttribute> attributes;
  std::vector<PendingNote> notes;
  std::map<std::string, std::size_t> line_of;
  ErrorCode first_code = ErrorCode::MalformedLine;

  auto fail = [&](ErrorCode code, std::size_t line, std::string message) {
    if (report.errors.empty()) first_code = code;
    report.errors.push_back({line_locator(line), std::move(message)});
  };
  auto claim_id = [&](const std::string& id, std::size_t line) {
    if (!line_of.emplace(id, line).second) {
      fail(ErrorCode::DuplicateId, line, "id '" + id + "' already defined on line " +
                                             std::to_string(line_of[id]));
      return false;
    }
    return true;
  };

  const auto lines = detail::lines_of(ann);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    const std::string_view line = lines[i];
    if (detail::trim(line).empty()) continue;
    const auto cols = split(line, '\t');
    const std::string id(cols[0]);
    const char kind = line.front();

    if (kind == 'T') {
      if (cols.size() != 3) {
        fail(ErrorCode::MalformedLine, lineno, "text-bound annotation needs 3 tab-separated columns");
        continue;
      }
      auto head = cols[1];
      auto space = head.find(' ');
      if (space == std::string_view::npos) {
        fail(ErrorCode::MalformedLine, lineno, "missing offsets");
        continue;
      }
      Mention m;
      m.id = id;
      m.type = std::string(head.substr(0, space));
      m.label = *m.type;
      bool ok = true;
      for (auto frag : split(head.substr(space + 1), ';')) {
        auto nums = split_words(frag);
        std::optional<std::size_t> s, e;
        if (nums.size() == 2) {
          s = detail::parse_index(nums[0]);
          e = detail::parse_index(nums[1]);
        }
        if (!s || !e || *s >= *e) {
          fail(ErrorCode::MalformedLine, lineno, "bad offsets '" + std::string(frag) + "'");
          ok = false;
          break;
        }
        auto bs = offsets.to_byte(*s);
        auto be = offsets.to_byte(*e);
        if (!bs || !be) {
          fail(ErrorCode::OffsetOutOfBounds, lineno,
               "offsets " + std::to_string(*s) + "-" + std::to_string(*e) +
                   " exceed text length " + std::to_string(offsets.code_points()));
          ok = false;
          break;
        }
        if (!m.anchors.empty() && m.anchors.back().end > *bs) {
          fail(ErrorCode::MalformedLine, lineno, "fragments unsorted or overlapping");
          ok = false;
          break;
        }
        m.anchors.push_back({*bs, *be});
      }
      if (!ok) continue;
      std::string expected;
      for (const auto& a : m.anchors) {
        if (!expected.empty()) expected += ' ';
        expected += doc.text.substr(a.start, a.length());
      }
      if (expected != cols[2]) {
        fail(ErrorCode::TextMismatch, lineno,
             "text '" + std::string(cols[2]) + "' does not match '" + expected + "' at offsets");
        continue;
      }
      if (claim_id(id, lineno)) doc.mentions.emplace(id, std::move(m));
    } else if (kind == 'E' || kind == 'R') {
      if (cols.size() < 2 || cols.size() > 3) {
        fail(ErrorCode::MalformedLine, lineno, "relation line needs 2 tab-separated columns");
        continue;
      }
      auto words = split_words(cols[1]);
      PendingRelation p;
      p.line = lineno;
      p.rel.id = id;
      p.rel.direction = Directionality::Directed;
      bool ok = !words.empty();
      if (ok && kind == 'E') {
        auto trig = split_role(words[0]);
        if (!trig) {
          ok = false;
        } else {
          p.rel.type = trig->first;
          p.refs.push_back(trig->second);
          p.has_trigger = true;
        }
      } else if (ok) {
        p.rel.type = std::string(words[0]);
      }
      for (std::size_t w = 1; ok && w < words.size(); ++w) {
        auto arg = split_role(words[w]);
        if (!arg) {
          ok = false;
          break;
        }
        p.rel.arguments.push_back({arg->first, MentionRef{}});
        p.refs.push_back(arg->second);
      }
      if (!ok) {
        fail(ErrorCode::MalformedLine, lineno, "expected TYPE[:ID] followed by ROLE:ID pairs");
        continue;
      }
      p.rel.label = *p.rel.type;
      if (p.rel.arguments.empty() || (kind == 'R' && p.rel.arguments.size() < 2)) {
        report.warnings.push_back({line_locator(lineno), "relation without enough arguments skipped"});
        report.dropped.push_back({line_locator(lineno), std::string(line)});
        continue;
      }
      if (claim_id(id, lineno)) relations.push_back(std::move(p));
    } else if (kind == 'A' || kind == 'M') {
      auto words = split_words(cols.size() > 1 ? cols[1] : std::string_view{});
      if (cols.size() != 2 || words.size() < 2 || words.size() > 3) {
        fail(ErrorCode::MalformedLine, lineno, "attribute line needs NAME TARGET [VALUE]");
        continue;
      }
      PendingAttribute a;
      a.attr.id = id;
      a.attr.name = std::string(words[0]);
      a.target = std::string(words[1]);
      if (words.size() == 3) a.attr.value = std::string(words[2]);
      a.line = lineno;
      attributes.push_back(std::move(a));
    } else if (kind == 'N' || kind == '#') {
      MetadataRecord rec;
      rec.id = id;
      rec.kind = std::string(1, kind);
      auto body = line.substr(std::min(line.size(), cols[0].size() + 1));
      rec.body = std::string(body);
      auto words = split_words(cols.size() > 1 ? cols[1] : std::string_view{});
      if (words.size() >= 2) rec.target = std::string(words[1]);
      if (kind == '#' && cols.size() == 3 && cols[2].starts_with(kNotePrefix)) {
        auto kv = cols[2].substr(kNotePrefix.size());
        auto eq = kv.find('=');
        if (eq != std::string_view::npos && !rec.target.empty()) {
          notes.push_back({rec.target, std::string(kv.substr(0, eq)),
                           std::string(kv.substr(eq + 1)), lineno});
          continue;
        }
      }
      doc.metadata.push_back(std::move(rec));
    } else {
      report.warnings.push_back({line_locator(lineno), "unsupported record type skipped"});
      report.dropped.push_back({line_locator(lineno), std::string(line)});
    }
  }

  // References are resolved after every line is read: BRAT allows forward
  // references between events.
  std::set<std::string, std::less<>> relation_ids;
  for (const auto& p : relations) relation_ids.insert(p.rel.id);
  auto resolve = [&](const std::string& raw) -> std::optional<AnchorRef> {
    if (doc.mentions.contains(raw)) return MentionRef{raw};
    if (relation_ids.contains(raw)) return RelationRef{raw};
    return std::nullopt;
  };

  for (auto& p : relations) {
    bool ok = true;
    std::size_t r = 0;
    if (p.has_trigger) {
      auto t = resolve(p.refs[r++]);
      if (!t) {
        fail(ErrorCode::DanglingReference, p.line, "trigger '" + p.refs[0] + "' is not defined");
        ok = false;
      } else {
        p.rel.trigger = *t;
      }
    }
    for (auto& arg : p.rel.arguments) {
      const std::string& raw = p.refs[r++];
      auto t = resolve(raw);
      if (!t) {
        fail(ErrorCode::DanglingReference, p.line, "argument '" + raw + "' is not defined");
        ok = false;
        continue;
      }
      arg.target = *t;
    }
    if (ok) doc.relations.emplace(p.rel.id, std::move(p.rel));
  }

  for (auto& a : attributes) {
    if (auto m = doc.mentions.find(a.target); m != doc.mentions.end()) {
      m->second.attributes.push_back(std::move(a.attr));
    } else if (auto rel = doc.relations.find(a.target); rel != doc.relations.end()) {
      rel->second.attributes.push_back(std::move(a.attr));
    } else {
      fail(ErrorCode::DanglingReference, a.line, "attribute target '" + a.target + "' is not defined");
    }
  }

  for (const auto& n : notes) {
    Mention* m = nullptr;
    Relation* rel = nullptr;
    if (auto it = doc.mentions.find(n.target); it != doc.mentions.end()) m = &it->second;
    if (auto it = doc.relations.find(n.target); it != doc.relations.end()) rel = &it->second;
    if (m == nullptr && rel == nullptr) {
      fail(ErrorCode::DanglingReference, n.line, "note target '" + n.target + "' is not defined");
      continue;
    }
    try {
      if (n.key == "layer") {
        (m ? m->layer : rel->layer) = parse_layer(n.value);
      } else if (n.key == "label") {
        (m ? m->label : rel->label) = n.value;
      } else if (n.key == "type") {
        auto& type = m ? m->type : rel->type;
        if (n.value.empty()) {
          type.reset();
        } else {
          type = n.value;
        }
      } else if (n.key == "direction" && rel != nullptr) {
        rel->direction = parse_directionality(n.value);
      } else {
        report.warnings.push_back({line_locator(n.line), "unknown note key '" + n.key + "'"});
        report.dropped.push_back({line_locator(n.line), n.key + "=" + n.value});
      }
    } catch (const Error& e) {
      fail(ErrorCode::MalformedLine, n.line, e.what());
    }
  }

  if (report.errors.empty()) {
    detail::check_references(doc, report, [&](const std::string& element) {
      auto it = line_of.find(element);
      return it == line_of.end() ? element : line_locator(it->second) + " (" + element + ")";
    });
    if (!report.errors.empty()) first_code = ErrorCode::CycleDetected;
  }
  if (!report.errors.empty()) detail::throw_parse_error(first_code, std::move(report));

  doc.tokens = tokenize(doc.text, doc.mentions);
  return out;
}

namespace {

bool id_matches(std::string_view id, char prefix) {
  static const std::regex digits("[0-9]+");
  return id.size() > 1 && id.front() == prefix &&
         std::regex_match(id.begin() + 1, id.end(), digits);
}

std::string sanitize_word(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == ':') c = '_';
  }
  return out.empty() ? std::string("_") : out;
}

std::string sanitize_note(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

// Assigns fresh ids "<prefix>1.." when any id in the group does not already
// follow the BRAT convention; otherwise ids are kept.
std::map<std::string, std::string> plan_ids(const std::vector<std::string>& ids, char prefix) {
  std::map<std::string, std::string> out;
  const bool conforming =
      std::all_of(ids.begin(), ids.end(), [&](const std::string& id) { return id_matches(id, prefix); });
  std::size_t next = 1;
  for (const auto& id : ids) {
    out[id] = conforming ? id : std::string(1, prefix) + std::to_string(next++);
  }
  return out;
}

}  // namespace

SerializedDocument serialize_brat(const Document& doc) {
  SerializedDocument out;
  out.report.source_format = SourceFormat::Brat;
  out.text = doc.text;
  const detail::OffsetMap offsets(doc.text);

  std::vector<std::string> mention_ids;
  for (const auto& [id, m] : doc.mentions) mention_ids.push_back(id);
  auto mention_name = plan_ids(mention_ids, 'T');

  // Relations that BRAT cannot carry, and everything that depends on them.
  std::set<std::string, NaturalLess> unrepresentable;
  auto representable_target = [&](const AnchorRef& ref) {
    if (std::holds_alternative<TokenRef>(ref)) return false;
    if (const auto* r = std::get_if<RelationRef>(&ref)) return !unrepresentable.contains(r->id);
    return true;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [id, rel] : doc.relations) {
      if (unrepresentable.contains(id)) continue;
      bool ok = !rel.trigger || std::holds_alternative<MentionRef>(*rel.trigger);
      for (const auto& arg : rel.arguments) ok = ok && representable_target(arg.target);
      if (!ok) {
        unrepresentable.insert(id);
        changed = true;
      }
    }
  }
  for (const auto& id : unrepresentable) {
    out.report.dropped.push_back({id, "relation references a token or a relation trigger"});
  }

  std::vector<std::string> event_ids, plain_ids;
  for (const auto& [id, rel] : doc.relations) {
    if (unrepresentable.contains(id)) continue;
    (rel.trigger ? event_ids : plain_ids).push_back(id);
  }
  auto relation_name = plan_ids(event_ids, 'E');
  relation_name.merge(plan_ids(plain_ids, 'R'));

  if (std::any_of(mention_name.begin(), mention_name.end(), [](auto& kv) { return kv.first != kv.second; }) ||
      std::any_of(relation_name.begin(), relation_name.end(), [](auto& kv) { return kv.first != kv.second; })) {
    out.report.warnings.push_back({"ids", "element ids renamed to BRAT conventions"});
  }

  auto name_of = [&](const AnchorRef& ref) {
    if (const auto* m = std::get_if<MentionRef>(&ref)) return mention_name.at(m->id);
    return relation_name.at(std::get<RelationRef>(ref).id);
  };

  std::string ann;
  std::vector<std::pair<std::string, std::string>> notes;  // target, "key=value"
  auto add_common_notes = [&](const std::string& name, const std::string& label,
                              const std::optional<std::string>& type, Layer layer) {
    const std::string written = sanitize_word(type.value_or(label));
    if (!type) notes.emplace_back(name, "type=");
    if (type && *type != written) notes.emplace_back(name, "type=" + sanitize_note(*type));
    if (label != type.value_or(label) || label != written) {
      notes.emplace_back(name, "label=" + sanitize_note(label));
    }
    if (layer != Layer::Semantic) notes.emplace_back(name, "layer=" + std::string(to_string(layer)));
  };

  for (const auto& [id, m] : doc.mentions) {
    const std::string& name = mention_name.at(id);
    ann += name + '\t' + sanitize_word(m.type.value_or(m.label)) + ' ';
    std::string surface;
    for (std::size_t i = 0; i < m.anchors.size(); ++i) {
      const auto& a = m.anchors[i];
      if (i > 0) {
        ann += ';';
        surface += ' ';
      }
      ann += std::to_string(offsets.to_code_point(a.start)) + ' ' +
             std::to_string(offsets.to_code_point(a.end));
      surface += doc.text.substr(a.start, a.length());
    }
    ann += '\t' + sanitize_note(surface) + '\n';
    add_common_notes(name, m.label, m.type, m.layer);
  }

  for (const auto& [id, rel] : doc.relations) {
    if (unrepresentable.contains(id)) continue;
    const std::string& name = relation_name.at(id);
    ann += name + '\t' + sanitize_word(rel.type.value_or(rel.label));
    if (rel.trigger) ann += ':' + name_of(*rel.trigger);
    for (const auto& arg : rel.arguments) {
      ann += ' ' + sanitize_word(arg.role) + ':' + name_of(arg.target);
    }
    ann += '\n';
    add_common_notes(name, rel.label, rel.type, rel.layer);
    if (rel.direction != Directionality::Directed) {
      notes.emplace_back(name, "direction=" + std::string(to_string(rel.direction)));
    }
  }

  // Attributes: keep ids when they all follow the convention.
  std::vector<std::pair<std::string, const Attribute*>> attrs;  // target name, attribute
  std::vector<std::string> attr_ids;
  auto collect_attrs = [&](const std::string& target, const std::vector<Attribute>& list) {
    for (const auto& a : list) {
      attrs.emplace_back(target, &a);
      attr_ids.push_back(a.id);
    }
  };
  for (const auto& [id, m] : doc.mentions) collect_attrs(mention_name.at(id), m.attributes);
  for (const auto& [id, rel] : doc.relations) {
    if (!unrepresentable.contains(id)) collect_attrs(relation_name.at(id), rel.attributes);
  }
  std::set<std::string> unique_attr_ids(attr_ids.begin(), attr_ids.end());
  const bool keep_attr_ids =
      unique_attr_ids.size() == attr_ids.size() &&
      std::all_of(attr_ids.begin(), attr_ids.end(), [](const std::string& a) { return id_matches(a, 'A'); });
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    const Attribute& a = *attrs[i].second;
    ann += (keep_attr_ids ? a.id : "A" + std::to_string(i + 1)) + '\t' + sanitize_word(a.name) + ' ' +
           attrs[i].first;
    if (a.value) ann += ' ' + sanitize_word(*a.value);
    ann += '\n';
  }

  // Metadata lines follow their target through renames and vanish with it.
  std::size_t max_note = 0;
  std::map<std::string, std::string> all_names = mention_name;
  for (const auto& [k, v] : relation_name) all_names[k] = v;
  for (const auto& rec : doc.metadata) {
    if (rec.kind == "#" && rec.id.size() > 1) {
      if (auto n = detail::parse_index(std::string_view(rec.id).substr(1))) max_note = std::max(max_note, *n);
    }
    std::string body = rec.body;
    if (!rec.target.empty()) {
      auto it = all_names.find(rec.target);
      if (it == all_names.end()) {
        out.report.dropped.push_back({rec.id, "metadata for removed element '" + rec.target + "'"});
        continue;
      }
      if (it->second != rec.target) {
        auto pos = body.find(' ');
        if (pos != std::string::npos && body.compare(pos + 1, rec.target.size(), rec.target) == 0) {
          body.replace(pos + 1, rec.target.size(), it->second);
        }
      }
    }
    ann += rec.id + '\t' + body + '\n';
  }
  for (const auto& [target, kv] : notes) {
    ann += '#' + std::to_string(++max_note) + "\tAnnotatorNotes " + target + '\t' +
           std::string(kNotePrefix) + kv + '\n';
  }

  out.content = std::move(ann);
  return out;
}

}  // namespace tag
