#include <algorithm>
#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "format_common.hpp"
#include "tag/formats.hpp"

namespace tag {

namespace pt = boost::property_tree;

namespace {

constexpr std::string_view kPassageSeparator = "\n\n";
// Segment field holding the passage offset as written in the source.
constexpr std::string_view kOffsetField = "@offset";

struct PendingNode {
  std::string refid;
  std::string role;
};

struct PendingRelation {
  Relation rel;
  std::vector<PendingNode> nodes;
  std::string locator;
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

std::string attr(const pt::ptree& node, const std::string& name) {
  return node.get<std::string>("<xmlattr>." + name, "");
}

bool is_markup(const std::string& key) {
  return key == "<xmlattr>" || key == "<xmlcomment>" || key == "<xmltext>";
}

// Infons of an annotation or relation: a few keys map onto model fields,
// the rest become attributes.
template <class Element>
void apply_infon(Element& e, const std::string& key, const std::string& value) {
  if (key == "type") {
    e.type = value;
    if (e.label.empty()) e.label = value;
  } else if (key == "label") {
    e.label = value;
  } else if (key == "layer") {
    e.layer = parse_layer(value);
  } else {
    e.attributes.push_back({"", key, value});
  }
}

class DocumentReader {
 public:
  DocumentReader(const pt::ptree& node, std::size_t ordinal, ParseReport& report)
      : node_(node), report_(report), locator_("document " + std::to_string(ordinal + 1)) {}

  Document read(const std::vector<MetadataRecord>& collection_meta) {
    doc_.source_format = SourceFormat::Bioc;
    doc_.metadata = collection_meta;
    doc_.id = node_.get<std::string>("id", "");
    if (doc_.id.empty()) {
      doc_.id = "document" + locator_.substr(locator_.find(' ') + 1);
      report_.warnings.push_back({locator_, "document without <id>; using '" + doc_.id + "'"});
    } else {
      locator_ = "document " + doc_.id;
    }

    std::size_t passage_no = 0;
    for (const auto& [key, child] : node_) {
      if (key == "id" || is_markup(key)) continue;
      if (key == "infon") {
        doc_.metadata.push_back({"", "infon", attr(child, "key"), child.data()});
      } else if (key == "passage") {
        read_passage(child, passage_no++);
      } else if (key == "relation") {
        read_relation(child, locator_);
      } else {
        report_.warnings.push_back({locator_, "unsupported element <" + key + "> skipped"});
        report_.dropped.push_back({locator_, "<" + key + ">"});
      }
    }
    resolve_relations();
    if (!report_.errors.empty()) return doc_;
    detail::check_references(doc_, report_, [&](const std::string& element) {
      return locator_ + "/" + element;
    });
    if (!report_.errors.empty()) code_ = ErrorCode::CycleDetected;
    doc_.tokens = tokenize(doc_.text, doc_.mentions);
    return doc_;
  }

  ErrorCode code() const { return code_; }

 private:
  void fail(ErrorCode code, std::string locator, std::string message) {
    if (report_.errors.empty()) code_ = code;
    report_.errors.push_back({std::move(locator), std::move(message)});
  }

  void read_passage(const pt::ptree& passage, std::size_t ordinal) {
    const std::string where = locator_ + "/passage " + std::to_string(ordinal + 1);
    if (ordinal > 0) doc_.text += kPassageSeparator;
    const std::size_t start = doc_.text.size();
    const std::string text = passage.get<std::string>("text", "");
    auto offset = detail::parse_index(detail::trim(passage.get<std::string>("offset", "0")));
    if (!offset) {
      fail(ErrorCode::XmlMalformed, where, "passage offset is not a number");
      offset = 0;
    }
    doc_.text += text;

    Segment seg;
    seg.span = {start, doc_.text.size()};
    seg.fields.emplace(kOffsetField, std::to_string(*offset));
    const detail::OffsetMap local(text);

    for (const auto& [key, child] : passage) {
      if (key == "infon") {
        const std::string k = attr(child, "key");
        if (k == "type") seg.label = child.data();
        seg.fields.emplace(k, child.data());
      } else if (key == "annotation") {
        read_annotation(child, where, start, *offset, local, text);
      } else if (key == "relation") {
        read_relation(child, where);
      } else if (key == "sentence") {
        report_.warnings.push_back({where, "sentence-level content skipped"});
        report_.dropped.push_back({where, "<sentence>"});
      } else if (key != "offset" && key != "text" && !is_markup(key)) {
        report_.warnings.push_back({where, "unsupported element <" + key + "> skipped"});
        report_.dropped.push_back({where, "<" + key + ">"});
      }
    }
    doc_.segments.push_back(std::move(seg));
  }

  void read_annotation(const pt::ptree& node, const std::string& where, std::size_t start,
                       std::size_t passage_offset, const detail::OffsetMap& local,
                       const std::string& passage_text) {
    Mention m;
    m.id = attr(node, "id");
    const std::string here = where + "/annotation " + (m.id.empty() ? "?" : m.id);
    if (m.id.empty()) {
      fail(ErrorCode::XmlMalformed, here, "annotation without id");
      return;
    }
    std::string surface;
    for (const auto& [key, child] : node) {
      if (key == "infon") {
        try {
          apply_infon(m, attr(child, "key"), child.data());
        } catch (const Error& e) {
          fail(ErrorCode::XmlMalformed, here, e.what());
        }
      } else if (key == "location") {
        auto off = detail::parse_index(attr(child, "offset"));
        auto len = detail::parse_index(attr(child, "length"));
        if (!off || !len || *len == 0) {
          fail(ErrorCode::XmlMalformed, here, "location needs numeric offset and positive length");
          return;
        }
        std::optional<std::size_t> b, e;
        if (*off >= passage_offset) {
          b = local.to_byte(*off - passage_offset);
          e = local.to_byte(*off - passage_offset + *len);
        }
        if (!b || !e) {
          fail(ErrorCode::OffsetOutOfBounds, here,
               "location " + std::to_string(*off) + "+" + std::to_string(*len) + " lies outside its passage");
          return;
        }
        m.anchors.push_back({start + *b, start + *e});
      } else if (key == "text") {
        surface = child.data();
      }
    }
    if (m.anchors.empty()) {
      fail(ErrorCode::XmlMalformed, here, "annotation without location");
      return;
    }
    std::sort(m.anchors.begin(), m.anchors.end());
    std::string expected;
    for (const auto& a : m.anchors) {
      if (!expected.empty()) expected += ' ';
      expected += passage_text.substr(a.start - start, a.length());
    }
    if (!surface.empty() && surface != expected) {
      report_.warnings.push_back({here, "text '" + surface + "' differs from '" + expected + "'"});
    }
    if (doc_.mentions.contains(m.id)) {
      fail(ErrorCode::DuplicateId, here, "duplicate annotation id");
      return;
    }
    doc_.mentions.emplace(m.id, std::move(m));
  }

  void read_relation(const pt::ptree& node, const std::string& where) {
    PendingRelation p;
    p.rel.id = attr(node, "id");
    p.locator = where + "/relation " + (p.rel.id.empty() ? "?" : p.rel.id);
    if (p.rel.id.empty()) {
      fail(ErrorCode::XmlMalformed, p.locator, "relation without id");
      return;
    }
    for (const auto& [key, child] : node) {
      if (key == "infon") {
        const std::string k = attr(child, "key");
        try {
          if (k == "direction") {
            p.rel.direction = parse_directionality(child.data());
          } else {
            apply_infon(p.rel, k, child.data());
          }
        } catch (const Error& e) {
          fail(ErrorCode::XmlMalformed, p.locator, e.what());
        }
      } else if (key == "node") {
        p.nodes.push_back({attr(child, "refid"), attr(child, "role")});
      }
    }
    pending_.push_back(std::move(p));
  }

  void resolve_relations() {
    std::set<std::string, std::less<>> relation_ids;
    for (const auto& p : pending_) {
      if (!relation_ids.insert(p.rel.id).second || doc_.mentions.contains(p.rel.id)) {
        fail(ErrorCode::DuplicateId, p.locator, "duplicate id");
      }
    }
    for (auto& p : pending_) {
      bool ok = true;
      for (const auto& n : p.nodes) {
        AnchorRef ref;
        if (doc_.mentions.contains(n.refid)) {
          ref = MentionRef{n.refid};
        } else if (relation_ids.contains(n.refid)) {
          ref = RelationRef{n.refid};
        } else {
          fail(ErrorCode::UnknownRefId, p.locator, "node refid '" + n.refid + "' is not defined");
          ok = false;
          continue;
        }
        if (iequals(n.role, "trigger") && !p.rel.trigger) {
          p.rel.trigger = ref;
        } else {
          p.rel.arguments.push_back({n.role, ref});
        }
      }
      if (!ok) continue;
      if (p.rel.arguments.empty() || (!p.rel.trigger && p.rel.arguments.size() < 2)) {
        report_.warnings.push_back({p.locator, "relation without enough nodes skipped"});
        report_.dropped.push_back({p.locator, "<relation id=\"" + p.rel.id + "\">"});
        continue;
      }
      doc_.relations.emplace(p.rel.id, std::move(p.rel));
    }
  }

  const pt::ptree& node_;
  ParseReport& report_;
  std::string locator_;
  Document doc_;
  std::vector<PendingRelation> pending_;
  ErrorCode code_ = ErrorCode::XmlMalformed;
};

}  // namespace

ParsedCollection parse_bioc(std::string_view xml) {
  ParsedCollection out;
  out.report.source_format = SourceFormat::Bioc;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, tree, pt::xml_parser::no_comments);
  } catch (const pt::xml_parser_error& e) {
    out.report.errors.push_back({"line " + std::to_string(e.line()), e.message()});
    detail::throw_parse_error(ErrorCode::XmlMalformed, std::move(out.report));
  }
  auto collection = tree.get_child_optional("collection");
  if (!collection) {
    out.report.errors.push_back({"root", "missing <collection> element"});
    detail::throw_parse_error(ErrorCode::XmlMalformed, std::move(out.report));
  }

  std::vector<MetadataRecord> collection_meta;
  for (const auto& [key, child] : *collection) {
    if (key == "source" || key == "date" || key == "key") {
      collection_meta.push_back({"", "collection", key, child.data()});
    } else if (key == "infon") {
      collection_meta.push_back({"", "collection-infon", attr(child, "key"), child.data()});
    }
  }

  std::size_t ordinal = 0;
  ErrorCode code = ErrorCode::XmlMalformed;
  for (const auto& [key, child] : *collection) {
    if (key == "document") {
      const bool had_errors = !out.report.errors.empty();
      DocumentReader reader(child, ordinal++, out.report);
      out.documents.push_back(reader.read(collection_meta));
      if (!had_errors && !out.report.errors.empty()) code = reader.code();
    } else if (key != "source" && key != "date" && key != "key" && key != "infon" && !is_markup(key)) {
      out.report.warnings.push_back({"collection", "unsupported element <" + key + "> skipped"});
      out.report.dropped.push_back({"collection", "<" + key + ">"});
    }
  }
  if (!out.report.errors.empty()) detail::throw_parse_error(code, std::move(out.report));
  return out;
}

namespace {

void write_infon(std::string& out, int indent, std::string_view key, std::string_view value) {
  out.append(static_cast<std::size_t>(indent), ' ');
  out += "<infon key=\"" + detail::xml_escape(key) + "\">" + detail::xml_escape(value) + "</infon>\n";
}

template <class Element>
void write_element_infons(std::string& out, int indent, const Element& e) {
  if (e.type) write_infon(out, indent, "type", *e.type);
  if (e.label != e.type.value_or("")) write_infon(out, indent, "label", e.label);
  if (e.layer != Layer::Semantic) write_infon(out, indent, "layer", to_string(e.layer));
}

void write_document(std::string& out, const Document& doc, ParseReport& report) {
  const detail::OffsetMap offsets(doc.text);
  out += "  <document>\n    <id>" + detail::xml_escape(doc.id) + "</id>\n";
  for (const auto& rec : doc.metadata) {
    if (rec.kind == "infon") {
      write_infon(out, 4, rec.target, rec.body);
    } else if (rec.kind != "collection" && rec.kind != "collection-infon") {
      report.dropped.push_back({rec.id.empty() ? doc.id : rec.id, "metadata has no BioC equivalent"});
    }
  }

  std::vector<Segment> passages = doc.segments;
  if (passages.empty()) passages.push_back({{0, doc.text.size()}, "", {}});

  std::vector<std::vector<const Mention*>> members(passages.size());
  for (const auto& [id, m] : doc.mentions) {
    const Span& first = m.anchors.front();
    const Span& last = m.anchors.back();
    auto it = std::find_if(passages.begin(), passages.end(), [&](const Segment& s) {
      return s.span.start <= first.start && last.end <= s.span.end;
    });
    if (it == passages.end()) {
      report.dropped.push_back({id, "mention crosses passage boundaries"});
      continue;
    }
    members[static_cast<std::size_t>(it - passages.begin())].push_back(&m);
  }

  for (std::size_t p = 0; p < passages.size(); ++p) {
    const Segment& seg = passages[p];
    const std::size_t cp_start = offsets.to_code_point(seg.span.start);
    std::size_t written_offset = cp_start;
    if (auto it = seg.fields.find(std::string(kOffsetField)); it != seg.fields.end()) {
      written_offset = detail::parse_index(it->second).value_or(cp_start);
    }
    out += "    <passage>\n";
    for (const auto& [k, v] : seg.fields) {
      if (!k.starts_with('@')) write_infon(out, 6, k, v);
    }
    out += "      <offset>" + std::to_string(written_offset) + "</offset>\n";
    out += "      <text>" + detail::xml_escape(doc.text.substr(seg.span.start, seg.span.length())) +
           "</text>\n";
    for (const Mention* m : members[p]) {
      out += "      <annotation id=\"" + detail::xml_escape(m->id) + "\">\n";
      write_element_infons(out, 8, *m);
      for (const auto& a : m->attributes) write_infon(out, 8, a.name, a.value.value_or(""));
      std::string surface;
      for (const auto& a : m->anchors) {
        const std::size_t b = offsets.to_code_point(a.start);
        const std::size_t e = offsets.to_code_point(a.end);
        out += "        <location offset=\"" + std::to_string(b - cp_start + written_offset) +
               "\" length=\"" + std::to_string(e - b) + "\"/>\n";
        if (!surface.empty()) surface += ' ';
        surface += doc.text.substr(a.start, a.length());
      }
      out += "        <text>" + detail::xml_escape(surface) + "</text>\n";
      out += "      </annotation>\n";
    }
    out += "    </passage>\n";
  }

  for (const auto& [id, r] : doc.relations) {
    bool ok = true;
    for (const auto& ep : endpoints(r)) ok = ok && !std::holds_alternative<TokenRef>(ep);
    if (!ok) {
      report.dropped.push_back({id, "relation references a token"});
      continue;
    }
    out += "    <relation id=\"" + detail::xml_escape(id) + "\">\n";
    write_element_infons(out, 6, r);
    if (r.direction != Directionality::Directed) write_infon(out, 6, "direction", to_string(r.direction));
    for (const auto& a : r.attributes) write_infon(out, 6, a.name, a.value.value_or(""));
    if (r.trigger) {
      out += "      <node refid=\"" + detail::xml_escape(element_id(*r.trigger)) + "\" role=\"trigger\"/>\n";
    }
    for (const auto& arg : r.arguments) {
      out += "      <node refid=\"" + detail::xml_escape(element_id(arg.target)) + "\" role=\"" +
             detail::xml_escape(arg.role) + "\"/>\n";
    }
    out += "    </relation>\n";
  }
  out += "  </document>\n";
}

}  // namespace

SerializedDocument serialize_bioc(const std::vector<Document>& docs) {
  SerializedDocument out;
  out.report.source_format = SourceFormat::Bioc;
  std::string xml = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!DOCTYPE collection SYSTEM \"BioC.dtd\">\n<collection>\n";
  std::map<std::string, std::string> header{{"source", ""}, {"date", ""}, {"key", ""}};
  std::vector<std::pair<std::string, std::string>> infons;
  if (!docs.empty()) {
    for (const auto& rec : docs.front().metadata) {
      if (rec.kind == "collection") header[rec.target] = rec.body;
      if (rec.kind == "collection-infon") infons.emplace_back(rec.target, rec.body);
    }
  }
  for (const char* key : {"source", "date", "key"}) {
    xml += std::string("  <") + key + ">" + detail::xml_escape(header[key]) + "</" + key + ">\n";
  }
  for (const auto& [k, v] : infons) write_infon(xml, 2, k, v);
  for (const auto& doc : docs) write_document(xml, doc, out.report);
  xml += "</collection>\n";
  out.content = std::move(xml);
  return out;
}

SerializedDocument serialize(const Document& doc, SourceFormat format) {
  switch (format) {
    case SourceFormat::Brat: return serialize_brat(doc);
    case SourceFormat::Conllx: return serialize_conllx(doc);
    case SourceFormat::Bioc: return serialize_bioc({doc});
  }
  throw Error(ErrorCode::NotRepresentable, "unknown target format");
}

}  // namespace tag
