#include "tag/tree.hpp"

#include <algorithm>
#include <limits>

#include "tag/error.hpp"

namespace tag {

bool SummaryNode::operator==(const SummaryNode& other) const {
  return element == other.element && label == other.label && children == other.children;
}

namespace {

std::string covered_text(const Document& doc, const Mention& m) {
  std::string out;
  for (const auto& a : m.anchors) {
    if (!out.empty()) out += ' ';
    out += doc.text.substr(a.start, a.length());
  }
  return out;
}

std::string node_label(const Document& doc, const AnchorRef& ref) {
  if (const auto* t = std::get_if<TokenRef>(&ref)) return doc.tokens.at(t->index).surface;
  if (const auto* m = std::get_if<MentionRef>(&ref)) return covered_text(doc, *doc.find_mention(m->id));
  return display_label(*doc.find_relation(std::get<RelationRef>(ref).id));
}

SummaryNode unfold(const Document& doc, const AnchorRef& ref, const AnchorRef* parent) {
  SummaryNode node{ref, node_label(doc, ref), {}};
  const auto* rref = std::get_if<RelationRef>(&ref);
  if (!rref) return node;
  const Relation& rel = *doc.find_relation(rref->id);
  if (rel.trigger && !(parent && *parent == *rel.trigger)) {
    node.children.push_back({kTriggerRole, unfold(doc, *rel.trigger, &ref)});
  }
  for (const auto& arg : rel.arguments) node.children.push_back({arg.role, unfold(doc, arg.target, &ref)});
  return node;
}

bool triggered_by(const Document& doc, const Relation& rel, const AnchorRef& selected) {
  if (!rel.trigger) return false;
  if (*rel.trigger == selected) return true;
  // A token selects the relations triggered by mentions over it.
  const auto* tok = std::get_if<TokenRef>(&selected);
  const auto* trig = std::get_if<MentionRef>(&*rel.trigger);
  if (!tok || !trig) return false;
  const Span& span = doc.tokens.at(tok->index).span;
  const Mention& m = *doc.find_mention(trig->id);
  return std::any_of(m.anchors.begin(), m.anchors.end(),
                     [&](const Span& a) { return a.start < span.end && span.start < a.end; });
}

std::size_t count_nodes(const SummaryNode& n) {
  std::size_t total = 1;
  for (const auto& c : n.children) total += count_nodes(c.node);
  return total;
}

std::size_t node_depth(const SummaryNode& n) {
  std::size_t d = 0;
  for (const auto& c : n.children) d = std::max(d, node_depth(c.node));
  return d + 1;
}

std::size_t leftmost(const Document& doc, const SummaryNode& n) {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  if (const auto* t = std::get_if<TokenRef>(&n.element)) best = doc.tokens.at(t->index).span.start;
  if (const auto* m = std::get_if<MentionRef>(&n.element)) best = doc.find_mention(m->id)->anchors.front().start;
  for (const auto& c : n.children) best = std::min(best, leftmost(doc, c.node));
  return best;
}

std::string bracket(const Document& doc, const SummaryNode& n) {
  if (n.children.empty()) return n.label;
  std::vector<const SummaryNode*> kids;
  for (const auto& c : n.children) kids.push_back(&c.node);
  std::stable_sort(kids.begin(), kids.end(), [&](const SummaryNode* a, const SummaryNode* b) {
    return leftmost(doc, *a) < leftmost(doc, *b);
  });
  std::string out = "[";
  for (std::size_t i = 0; i < kids.size(); ++i) {
    if (i > 0) out += ' ';
    out += bracket(doc, *kids[i]);
  }
  return out + "]";
}

}  // namespace

SummaryTree extract_tree(const Document& doc, const AnchorRef& selected) {
  if (!resolves(doc, selected)) {
    throw Error(ErrorCode::UnknownRef, "'" + element_id(selected) + "' does not resolve in the document");
  }
  SummaryTree tree;
  if (std::holds_alternative<RelationRef>(selected)) {
    tree.root = unfold(doc, selected, nullptr);
    return tree;
  }
  tree.root = SummaryNode{selected, node_label(doc, selected), {}};
  for (const auto& [id, rel] : doc.relations) {
    if (!triggered_by(doc, rel, selected)) continue;
    const AnchorRef ref = RelationRef{id};
    tree.root.children.push_back({kTriggersRole, unfold(doc, ref, &*rel.trigger)});
  }
  return tree;
}

std::size_t node_count(const SummaryTree& tree) { return count_nodes(tree.root); }
std::size_t depth(const SummaryTree& tree) { return node_depth(tree.root); }

std::string bracketed(const SummaryTree& tree, const Document& doc) { return bracket(doc, tree.root); }

}  // namespace tag
