#include "tag/json_io.hpp"

#include "tag/error.hpp"

namespace tag {

namespace {

template <class F>
auto guarded(std::string_view what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::BadRequest, "malformed " + std::string(what) + ": " + e.what());
  }
}

Json optional_string(const std::optional<std::string>& s) { return s ? Json(*s) : Json(nullptr); }

std::optional<std::string> read_optional_string(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

Json attributes_json(const std::vector<Attribute>& attrs) {
  Json out = Json::array();
  for (const auto& a : attrs) out.push_back({{"id", a.id}, {"name", a.name}, {"value", optional_string(a.value)}});
  return out;
}

std::vector<Attribute> read_attributes(const Json& j) {
  std::vector<Attribute> out;
  if (!j.contains("attributes")) return out;
  for (const auto& a : j.at("attributes")) {
    out.push_back({a.value("id", ""), a.at("name").get<std::string>(), read_optional_string(a, "value")});
  }
  return out;
}

AnchorRef read_ref(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "token") return TokenRef{j.at("index").get<std::size_t>()};
  if (kind == "mention") return MentionRef{j.at("id").get<std::string>()};
  if (kind == "relation") return RelationRef{j.at("id").get<std::string>()};
  throw Error(ErrorCode::BadRequest, "unknown reference kind '" + kind + "'");
}

Mention read_mention(const Json& j) {
  Mention m;
  m.id = j.at("id").get<std::string>();
  m.type = read_optional_string(j, "type");
  m.label = j.contains("label") ? j.at("label").get<std::string>() : m.type.value_or("");
  for (const auto& a : j.at("anchors")) m.anchors.push_back({a.at(0).get<std::size_t>(), a.at(1).get<std::size_t>()});
  m.layer = parse_layer(j.value("layer", "semantic"));
  m.attributes = read_attributes(j);
  return m;
}

Relation read_relation(const Json& j) {
  Relation r;
  r.id = j.at("id").get<std::string>();
  if (j.contains("trigger") && !j.at("trigger").is_null()) r.trigger = read_ref(j.at("trigger"));
  for (const auto& a : j.at("arguments")) r.arguments.push_back({a.at("role").get<std::string>(), read_ref(a.at("target"))});
  r.direction = parse_directionality(j.value("direction", "directed"));
  r.type = read_optional_string(j, "type");
  r.label = j.contains("label") ? j.at("label").get<std::string>() : r.type.value_or("");
  r.layer = parse_layer(j.value("layer", "semantic"));
  r.attributes = read_attributes(j);
  return r;
}

Json entry_json(const TypeEntry& e) {
  Json children = Json::array();
  for (const auto& c : e.children) children.push_back(entry_json(c));
  return {{"name", e.name}, {"color", e.color}, {"children", children}};
}

TypeEntry read_entry(const Json& j) {
  TypeEntry e{j.at("name").get<std::string>(), j.value("color", "#000000"), {}};
  if (j.contains("children")) {
    for (const auto& c : j.at("children")) e.children.push_back(read_entry(c));
  }
  return e;
}

Json box_json(const std::optional<Box>& b) {
  if (!b) return nullptr;
  return {{"row", b->row}, {"x", b->x}, {"y", b->y}, {"width", b->width}, {"height", b->height}};
}

Json node_json(const SummaryNode& n) {
  Json children = Json::array();
  for (const auto& c : n.children) children.push_back({{"role", c.role}, {"node", node_json(c.node)}});
  return {{"element", to_json(n.element)}, {"id", element_id(n.element)}, {"label", n.label}, {"children", children}};
}

}  // namespace

Json to_json(const AnchorRef& ref) {
  if (const auto* t = std::get_if<TokenRef>(&ref)) return {{"kind", "token"}, {"index", t->index}};
  if (const auto* m = std::get_if<MentionRef>(&ref)) return {{"kind", "mention"}, {"id", m->id}};
  return {{"kind", "relation"}, {"id", std::get<RelationRef>(ref).id}};
}

AnchorRef anchor_ref_from_json(const Json& j) {
  return guarded("reference", [&] { return read_ref(j); });
}

Json to_json(const Mention& m) {
  Json anchors = Json::array();
  for (const auto& a : m.anchors) anchors.push_back({a.start, a.end});
  return {{"id", m.id},
          {"label", m.label},
          {"type", optional_string(m.type)},
          {"anchors", anchors},
          {"layer", to_string(m.layer)},
          {"attributes", attributes_json(m.attributes)}};
}

Mention mention_from_json(const Json& j) {
  return guarded("mention", [&] { return read_mention(j); });
}

Json to_json(const Relation& r) {
  Json args = Json::array();
  for (const auto& a : r.arguments) args.push_back({{"role", a.role}, {"target", to_json(a.target)}});
  return {{"id", r.id},
          {"trigger", r.trigger ? to_json(*r.trigger) : Json(nullptr)},
          {"arguments", args},
          {"direction", to_string(r.direction)},
          {"label", r.label},
          {"type", optional_string(r.type)},
          {"layer", to_string(r.layer)},
          {"attributes", attributes_json(r.attributes)}};
}

Relation relation_from_json(const Json& j) {
  return guarded("relation", [&] { return read_relation(j); });
}

Json to_json(const Document& doc) {
  Json tokens = Json::array();
  for (const auto& t : doc.tokens) {
    tokens.push_back({{"index", t.index}, {"start", t.span.start}, {"end", t.span.end}, {"surface", t.surface},
                      {"fields", t.fields}});
  }
  Json mentions = Json::array();
  for (const auto& [id, m] : doc.mentions) mentions.push_back(to_json(m));
  Json relations = Json::array();
  for (const auto& [id, r] : doc.relations) relations.push_back(to_json(r));
  Json segments = Json::array();
  for (const auto& s : doc.segments) {
    segments.push_back({{"start", s.span.start}, {"end", s.span.end}, {"label", s.label}, {"fields", s.fields}});
  }
  Json metadata = Json::array();
  for (const auto& m : doc.metadata) {
    metadata.push_back({{"id", m.id}, {"kind", m.kind}, {"target", m.target}, {"body", m.body}});
  }
  return {{"id", doc.id},
          {"text", doc.text},
          {"source_format", to_string(doc.source_format)},
          {"taxonomy_ref", optional_string(doc.taxonomy_ref)},
          {"tokens", tokens},
          {"mentions", mentions},
          {"relations", relations},
          {"segments", segments},
          {"metadata", metadata}};
}

Document document_from_json(const Json& j) {
  return guarded("document", [&] {
    Document doc;
    doc.id = j.at("id").get<std::string>();
    doc.text = j.at("text").get<std::string>();
    doc.source_format = parse_source_format(j.value("source_format", "brat"));
    doc.taxonomy_ref = read_optional_string(j, "taxonomy_ref");
    for (const auto& t : j.at("tokens")) {
      Token tok;
      tok.index = t.at("index").get<std::size_t>();
      tok.span = {t.at("start").get<std::size_t>(), t.at("end").get<std::size_t>()};
      tok.surface = t.at("surface").get<std::string>();
      if (t.contains("fields")) tok.fields = t.at("fields").get<std::map<std::string, std::string>>();
      doc.tokens.push_back(std::move(tok));
    }
    for (const auto& m : j.at("mentions")) {
      Mention mention = read_mention(m);
      const std::string id = mention.id;
      doc.mentions.emplace(id, std::move(mention));
    }
    for (const auto& r : j.at("relations")) {
      Relation rel = read_relation(r);
      const std::string id = rel.id;
      doc.relations.emplace(id, std::move(rel));
    }
    if (j.contains("segments")) {
      for (const auto& s : j.at("segments")) {
        Segment seg{{s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>()}, s.value("label", ""), {}};
        if (s.contains("fields")) seg.fields = s.at("fields").get<std::map<std::string, std::string>>();
        doc.segments.push_back(std::move(seg));
      }
    }
    if (j.contains("metadata")) {
      for (const auto& m : j.at("metadata")) {
        doc.metadata.push_back({m.value("id", ""), m.at("kind").get<std::string>(), m.value("target", ""),
                                m.value("body", "")});
      }
    }
    return doc;
  });
}

Json to_json(const Taxonomy& taxonomy) {
  Json roots = Json::array();
  for (const auto& r : taxonomy.roots()) roots.push_back(entry_json(r));
  return {{"roots", roots}};
}

Taxonomy taxonomy_from_json(const Json& j) {
  return guarded("taxonomy", [&] {
    std::vector<TypeEntry> roots;
    for (const auto& r : j.at("roots")) roots.push_back(read_entry(r));
    return Taxonomy(std::move(roots));
  });
}

Json to_json(const ParseReport& report) {
  auto list = [](const std::vector<ReportEntry>& entries) {
    Json out = Json::array();
    for (const auto& e : entries) out.push_back({{"locator", e.locator}, {"message", e.message}});
    return out;
  };
  return {{"source_format", to_string(report.source_format)},
          {"warnings", list(report.warnings)},
          {"dropped", list(report.dropped)},
          {"errors", list(report.errors)}};
}

Json to_json(const LayoutGeometry& g) {
  Json rows = Json::array();
  for (const auto& r : g.rows) {
    Json tokens = Json::array();
    for (const auto& t : r.tokens) {
      tokens.push_back({{"token_index", t.token_index}, {"x", t.x}, {"width", t.width}, {"text", t.text}});
    }
    rows.push_back({{"index", r.index},
                    {"height", r.height},
                    {"text_top", r.text_top},
                    {"baseline", r.baseline},
                    {"slots_above", r.slots_above},
                    {"slots_below", r.slots_below},
                    {"lanes_above", r.lanes_above},
                    {"lanes_below", r.lanes_below},
                    {"tokens", tokens}});
  }
  Json mentions = Json::array();
  for (const auto& m : g.mentions) {
    Json underlines = Json::array();
    for (const auto& u : m.underlines) underlines.push_back({{"row", u.row}, {"x1", u.x1}, {"x2", u.x2}, {"y", u.y}});
    mentions.push_back({{"id", m.mention_id},
                        {"label", m.label},
                        {"type", optional_string(m.type)},
                        {"side", to_string(m.side)},
                        {"lane", m.lane},
                        {"label_box", box_json(m.label_box)},
                        {"underlines", underlines}});
  }
  Json arcs = Json::array();
  for (const auto& a : g.arcs) {
    Json segments = Json::array();
    for (const auto& s : a.segments) {
      Json drops = Json::array();
      for (const auto& d : s.drops) {
        drops.push_back({{"x", d.x},
                         {"target", d.target_id},
                         {"target_slot", d.target_slot},
                         {"y_end", d.y_end},
                         {"trigger", d.is_trigger},
                         {"arrow", d.arrow}});
      }
      segments.push_back({{"row", s.row},
                          {"left", s.left},
                          {"right", s.right},
                          {"slot", s.slot},
                          {"y", s.y},
                          {"exits_right", s.exits_right},
                          {"enters_left", s.enters_left},
                          {"drops", drops}});
    }
    arcs.push_back({{"id", a.relation_id},
                    {"side", to_string(a.side)},
                    {"direction", to_string(a.direction)},
                    {"label", a.label},
                    {"type", optional_string(a.type)},
                    {"label_row", a.label_row},
                    {"label_box", box_json(a.label_box)},
                    {"segments", segments}});
  }
  Json handles = Json::array();
  for (const auto& h : g.handles) {
    handles.push_back({{"relation", h.relation_id}, {"attached_by", h.attached_by}, {"row", h.row}, {"x", h.x}, {"y", h.y}});
  }
  return {{"row_width", g.row_width},
          {"total_rows", g.total_rows},
          {"first_row", g.first_row},
          {"rows", rows},
          {"mentions", mentions},
          {"arcs", arcs},
          {"handles", handles},
          {"warnings", g.warnings}};
}

Json to_json(const SummaryTree& tree) { return {{"root", node_json(tree.root)}}; }

}  // namespace tag
