#include "support.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tag/formats.hpp"
#include "tag/service.hpp"

namespace tag::testing {

namespace fs = std::filesystem;

fs::path data_path(std::string_view name) { return fs::path(TAG_DATA_DIR) / std::string(name); }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Document load_brat(const std::string& stem) {
  return parse_brat(read_text(data_path(stem + ".txt")), read_text(data_path(stem + ".ann")), stem).document;
}

Document induction() { return load_brat("induction"); }

Taxonomy default_taxonomy() { return load_taxonomy_file(data_path("default.tax")); }

Mention mention(std::string id, std::string type, std::size_t start, std::size_t end, Layer layer) {
  Mention m;
  m.id = std::move(id);
  m.label = type;
  m.type = std::move(type);
  m.anchors = {{start, end}};
  m.layer = layer;
  return m;
}

Relation relation(std::string id, std::optional<AnchorRef> trigger, std::vector<Argument> args, std::string type) {
  Relation r;
  r.id = std::move(id);
  r.trigger = std::move(trigger);
  r.arguments = std::move(args);
  r.label = type;
  r.type = std::move(type);
  return r;
}

Document assemble(std::string text, MentionMap mentions, RelationMap relations) {
  Document d;
  d.id = "generated";
  d.text = std::move(text);
  d.mentions = std::move(mentions);
  d.relations = std::move(relations);
  d.tokens = tokenize(d.text, d.mentions);
  return d;
}

namespace {

std::string random_word(std::mt19937& rng, std::size_t min_len, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<int> letter('a', 'z');
  std::string w(len(rng), 'a');
  for (auto& c : w) c = static_cast<char>(letter(rng));
  return w;
}

bool chance(std::mt19937& rng, double p) { return std::bernoulli_distribution(p)(rng); }

template <class T>
const T& pick(std::mt19937& rng, const std::vector<T>& items) {
  return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

}  // namespace

Document random_single_row_document(std::mt19937& rng, std::size_t arcs) {
  const std::size_t words = std::uniform_int_distribution<std::size_t>(4, 14)(rng);
  std::string text;
  MentionMap mentions;
  for (std::size_t i = 0; i < words; ++i) {
    if (i > 0) text += ' ';
    const std::string w = random_word(rng, 2, 5);
    const std::string id = "T" + std::to_string(i + 1);
    mentions.emplace(id, mention(id, "Entity", text.size(), text.size() + w.size()));
    text += w;
  }
  RelationMap relations;
  std::vector<std::string> rel_ids;
  std::uniform_int_distribution<std::size_t> word(1, words);
  auto endpoint = [&]() -> AnchorRef {
    if (!rel_ids.empty() && chance(rng, 0.25)) return RelationRef{pick(rng, rel_ids)};
    return MentionRef{"T" + std::to_string(word(rng))};
  };
  for (std::size_t k = 0; k < arcs; ++k) {
    const std::string id = "R" + std::to_string(k + 1);
    Relation r;
    if (chance(rng, 0.3)) {
      r = relation(id, MentionRef{"T" + std::to_string(word(rng))}, {{"Theme", endpoint()}});
    } else {
      AnchorRef a = endpoint(), b = endpoint();
      while (b == a) b = endpoint();
      r = relation(id, std::nullopt, {{"Arg1", a}, {"Arg2", b}});
    }
    relations.emplace(id, std::move(r));
    rel_ids.push_back(id);
  }
  return assemble(std::move(text), std::move(mentions), std::move(relations));
}

Document synthetic_document(std::size_t tokens, std::size_t relations, unsigned seed) {
  std::mt19937 rng(seed);
  std::string text;
  MentionMap mentions;
  std::vector<std::string> mention_ids;
  for (std::size_t i = 0; i < tokens; ++i) {
    if (i > 0) text += ' ';
    const std::string w = random_word(rng, 2, 9);
    if (i % 2 == 0) {
      const std::string id = "T" + std::to_string(mention_ids.size() + 1);
      mentions.emplace(id, mention(id, chance(rng, 0.5) ? "Protein" : "Trigger", text.size(), text.size() + w.size()));
      mention_ids.push_back(id);
    }
    text += w;
  }
  RelationMap rels;
  const std::size_t stride = std::max<std::size_t>(1, mention_ids.size() / std::max<std::size_t>(1, relations));
  for (std::size_t k = 0; k < relations; ++k) {
    const std::string id = "E" + std::to_string(k + 1);
    const std::size_t anchor = std::min(mention_ids.size() - 1, k * stride);
    const std::size_t reach = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    const std::size_t other = std::min(mention_ids.size() - 1, anchor + reach);
    AnchorRef second = MentionRef{mention_ids[other]};
    if (k > 0 && chance(rng, 0.15)) {
      const std::size_t back = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(k, 6))(rng);
      second = RelationRef{"E" + std::to_string(k + 1 - back)};
    }
    Relation r = chance(rng, 0.5)
                     ? relation(id, MentionRef{mention_ids[anchor]}, {{"Theme", second}}, "Binding")
                     : relation(id, std::nullopt, {{"Arg1", MentionRef{mention_ids[anchor]}}, {"Arg2", second}}, "Link");
    rels.emplace(id, std::move(r));
  }
  return assemble(std::move(text), std::move(mentions), std::move(rels));
}

namespace {

std::vector<std::string> relation_targets(const Relation& r) {
  std::vector<std::string> out;
  if (r.trigger) {
    if (const auto* rr = std::get_if<RelationRef>(&*r.trigger)) out.push_back(rr->id);
  }
  for (const auto& a : r.arguments) {
    if (const auto* rr = std::get_if<RelationRef>(&a.target)) out.push_back(rr->id);
  }
  return out;
}

}  // namespace

bool has_cycle(const Document& doc) {
  enum class Color { White, Grey, Black };
  std::map<std::string, Color> color;
  for (const auto& [id, r] : doc.relations) color[id] = Color::White;
  for (const auto& [start, r] : doc.relations) {
    if (color[start] != Color::White) continue;
    // Iterative DFS: (node, next child index).
    std::vector<std::pair<std::string, std::size_t>> stack{{start, 0}};
    color[start] = Color::Grey;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto targets = relation_targets(doc.relations.at(node));
      if (next == targets.size()) {
        color[node] = Color::Black;
        stack.pop_back();
        continue;
      }
      const std::string child = targets[next++];
      if (!color.contains(child)) continue;
      if (color[child] == Color::Grey) return true;
      if (color[child] == Color::White) {
        color[child] = Color::Grey;
        stack.push_back({child, 0});
      }
    }
  }
  return false;
}

bool reaches(const Document& doc, const std::string& from, const std::string& to) {
  std::set<std::string> seen{from};
  std::deque<std::string> queue{from};
  while (!queue.empty()) {
    const std::string cur = queue.front();
    queue.pop_front();
    if (cur == to) return true;
    const Relation* r = doc.find_relation(cur);
    if (!r) continue;
    for (const auto& t : relation_targets(*r)) {
      if (seen.insert(t).second) queue.push_back(t);
    }
  }
  return false;
}

bool referentially_intact(const Document& doc) {
  auto ok = [&](const AnchorRef& ref) {
    if (const auto* t = std::get_if<TokenRef>(&ref)) return t->index < doc.tokens.size();
    if (const auto* m = std::get_if<MentionRef>(&ref)) return doc.mentions.contains(m->id);
    return doc.relations.contains(std::get<RelationRef>(ref).id);
  };
  for (const auto& [id, r] : doc.relations) {
    if (r.trigger && !ok(*r.trigger)) return false;
    for (const auto& a : r.arguments) {
      if (!ok(a.target)) return false;
    }
  }
  return true;
}

namespace {

std::vector<std::string> element_ids(const Document& doc) {
  std::vector<std::string> ids;
  for (const auto& [id, m] : doc.mentions) ids.push_back(id);
  for (const auto& [id, r] : doc.relations) ids.push_back(id);
  return ids;
}

AnchorRef random_ref(std::mt19937& rng, const Document& doc) {
  const std::size_t kind = std::uniform_int_distribution<std::size_t>(0, 2)(rng);
  if (kind == 0 && !doc.tokens.empty()) {
    return TokenRef{std::uniform_int_distribution<std::size_t>(0, doc.tokens.size() - 1)(rng)};
  }
  if (kind == 2 && !doc.relations.empty()) {
    std::vector<std::string> ids;
    for (const auto& [id, r] : doc.relations) ids.push_back(id);
    return RelationRef{pick(rng, ids)};
  }
  std::vector<std::string> ids;
  for (const auto& [id, m] : doc.mentions) ids.push_back(id);
  if (ids.empty()) return TokenRef{0};
  return MentionRef{pick(rng, ids)};
}

const std::vector<std::string> kTypes = {"Gene_or_gene_product", "Trigger", "Positive_activation",
                                         "Negative_regulation", "Entity"};
const std::vector<std::string> kColors = {"#FF0000", "#00AA00", "#123456", "#ABCDEF"};

}  // namespace

EditOp random_edit(std::mt19937& rng, const SessionState& state, int& fresh) {
  const Document& doc = state.document;
  const auto ids = element_ids(doc);
  const std::string any_id = ids.empty() ? "T1" : pick(rng, ids);
  switch (std::uniform_int_distribution<int>(0, 9)(rng)) {
    case 0:
      return op::Relabel{any_id, "L" + std::to_string(fresh++)};
    case 1:
      return op::Retype{any_id, chance(rng, 0.2) ? std::nullopt : std::optional<std::string>(pick(rng, kTypes))};
    case 2: {
      if (doc.relations.empty()) return op::Relabel{any_id, "x"};
      std::vector<std::string> rel_ids;
      for (const auto& [id, r] : doc.relations) rel_ids.push_back(id);
      const std::string rid = pick(rng, rel_ids);
      const std::size_t n = doc.relations.at(rid).arguments.size();
      return op::Reattach{rid, std::uniform_int_distribution<std::size_t>(0, n)(rng), random_ref(rng, doc)};
    }
    case 3: {
      if (doc.tokens.empty()) return op::Relabel{any_id, "x"};
      const Token& t = doc.tokens[std::uniform_int_distribution<std::size_t>(0, doc.tokens.size() - 1)(rng)];
      return op::CreateMention{mention("T" + std::to_string(100 + fresh++), pick(rng, kTypes), t.span.start, t.span.end)};
    }
    case 4: {
      std::vector<Argument> args{{"Theme", random_ref(rng, doc)}};
      std::optional<AnchorRef> trigger;
      if (chance(rng, 0.5)) {
        trigger = random_ref(rng, doc);
      } else {
        args.push_back({"Cause", random_ref(rng, doc)});
      }
      return op::CreateRelation{relation("E" + std::to_string(100 + fresh++), trigger, args, pick(rng, kTypes))};
    }
    case 5:
      return op::Delete{any_id};
    case 6:
    case 7:
      return random_presentation_edit(rng, state);
    case 8:
      return op::RecolorType{pick(rng, kTypes), pick(rng, kColors), chance(rng, 0.5)};
    default:
      return op::Relabel{any_id + (chance(rng, 0.2) ? "-missing" : ""), "L" + std::to_string(fresh++)};
  }
}

EditOp random_presentation_edit(std::mt19937& rng, const SessionState& state) {
  const Document& doc = state.document;
  const auto ids = element_ids(doc);
  const int kind = std::uniform_int_distribution<int>(0, 2)(rng);
  if (kind == 0 && !ids.empty()) return op::Hide{pick(rng, ids)};
  if (kind == 1 && !state.hidden_ids.empty()) {
    std::vector<std::string> hidden(state.hidden_ids.begin(), state.hidden_ids.end());
    return op::Unhide{pick(rng, hidden)};
  }
  const std::size_t n = std::max<std::size_t>(1, doc.tokens.size());
  return op::MoveToken{std::uniform_int_distribution<std::size_t>(0, n - 1)(rng),
                       std::uniform_int_distribution<std::size_t>(0, 2)(rng),
                       static_cast<double>(std::uniform_int_distribution<int>(0, 60)(rng)) * 5};
}

std::size_t crossings_oracle(const LayoutGeometry& g) {
  struct Seg {
    const ArcSegment* seg;
    const ArcGeometry* arc;
  };
  std::vector<Seg> all;
  for (const auto& arc : g.arcs) {
    for (const auto& s : arc.segments) all.push_back({&s, &arc});
  }
  // A drop of `owner` crosses the run of `other` when it lies strictly
  // inside the run's extent and spans its height strictly. A drop that
  // lands on the other arc's own label does not count.
  auto drop_crosses = [](const Seg& owner, const Seg& other) {
    return std::any_of(owner.seg->drops.begin(), owner.seg->drops.end(), [&](const Drop& d) {
      const double lo = std::min(owner.seg->y, d.y_end), hi = std::max(owner.seg->y, d.y_end);
      return d.target_id != other.arc->relation_id && other.seg->left < d.x && d.x < other.seg->right &&
             lo < other.seg->y && other.seg->y < hi;
    });
  };
  std::size_t count = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const ArcSegment& a = *all[i].seg;
      const ArcSegment& b = *all[j].seg;
      if (all[i].arc->side != all[j].arc->side || a.row != b.row) continue;
      const bool interleave = (a.left < b.left && b.left < a.right && a.right < b.right) ||
                              (b.left < a.left && a.left < b.right && b.right < a.right);
      if (interleave && (drop_crosses(all[i], all[j]) || drop_crosses(all[j], all[i]))) ++count;
    }
  }
  return count;
}

}  // namespace tag::testing
