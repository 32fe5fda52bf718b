#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "support.hpp"
#include "tag/error.hpp"
#include "tag/tree.hpp"

using namespace tag;
using namespace tag::testing;

namespace {

// Nodes of the unfolded tree, counted by memoised recursion over the
// reference graph rather than by building the tree.
std::size_t unfolded_size(const Document& doc, const std::string& relation_id) {
  std::map<std::string, std::size_t> memo;
  std::function<std::size_t(const std::string&)> size = [&](const std::string& id) -> std::size_t {
    if (auto it = memo.find(id); it != memo.end()) return it->second;
    const Relation& r = doc.relations.at(id);
    std::size_t total = 1;
    for (const AnchorRef& e : endpoints(r)) {
      const auto* rr = std::get_if<RelationRef>(&e);
      total += rr ? size(rr->id) : 1;
    }
    return memo[id] = total;
  };
  return size(relation_id);
}

const SummaryEdge& child(const SummaryNode& n, const std::string& role) {
  for (const auto& c : n.children) {
    if (c.role == role) return c;
  }
  throw std::runtime_error("no child " + role);
}

}  // namespace

TEST(Tree, InhibitsUnfoldsBothEvents) {
  const Document d = induction();
  const SummaryTree t = extract_tree(d, MentionRef{"T6"});
  EXPECT_EQ(t.root.label, "inhibits");
  ASSERT_EQ(t.root.children.size(), 2u);
  const std::vector<std::pair<std::string, std::string>> expected{{"E2", "Cdk4"}, {"E3", "Cdk2"}};
  for (std::size_t i = 0; i < 2; ++i) {
    const SummaryEdge& e = t.root.children[i];
    EXPECT_EQ(e.role, kTriggersRole);
    EXPECT_EQ(e.node.element, AnchorRef(RelationRef{expected[i].first}));
    // The trigger is the parent, so it is not repeated.
    ASSERT_EQ(e.node.children.size(), 2u);
    const SummaryNode& controller = child(e.node, "Controller").node;
    EXPECT_EQ(controller.element, AnchorRef(RelationRef{"E1"}));
    EXPECT_EQ(child(controller, "Controller").node.label, "p53");
    EXPECT_EQ(child(controller, "Controlled").node.label, "p21");
    EXPECT_EQ(child(controller, kTriggerRole).node.label, "Induction");
    EXPECT_EQ(child(e.node, "Controlled").node.label, expected[i].second);
  }
  EXPECT_EQ(depth(t), 4u);
}

TEST(Tree, SingleEventHasDepthTwo) {
  const SummaryTree t = extract_tree(induction(), RelationRef{"E1"});
  EXPECT_EQ(depth(t), 2u);
  EXPECT_EQ(node_count(t), 4u);
}

TEST(Tree, IsolatedMentionIsASingleNode) {
  Document d = add_mention(induction(), mention("T7", "Entity", 34, 44));
  const SummaryTree t = extract_tree(d, MentionRef{"T7"});
  EXPECT_EQ(node_count(t), 1u);
  EXPECT_EQ(t.root.label, "DNA damage");
}

TEST(Tree, TokenSelectsTheEventsItTriggers) {
  const Document d = induction();
  const auto tok = resolve_element(d, "tok:0");
  ASSERT_TRUE(tok);
  const SummaryTree t = extract_tree(d, *tok);
  ASSERT_EQ(t.root.children.size(), 1u);
  EXPECT_EQ(t.root.children[0].node.element, AnchorRef(RelationRef{"E1"}));
}

TEST(Tree, UnknownSelection) {
  try {
    extract_tree(induction(), RelationRef{"E9"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownRef);
  }
}

TEST(Tree, UnlockableBracketings) {
  const Document a = load_brat("unlockable_a");
  const Document b = load_brat("unlockable_b");
  const SummaryTree ta = extract_tree(a, RelationRef{"R2"});
  const SummaryTree tb = extract_tree(b, RelationRef{"R2"});
  EXPECT_EQ(bracketed(ta, a), "[un [lock able]]");
  EXPECT_EQ(bracketed(tb, b), "[[un lock] able]");
  EXPECT_NE(ta, tb);
  EXPECT_EQ(node_count(ta), node_count(tb));
}

TEST(TreeProperty, NodeCountMatchesUnfolding) {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    const Document d = random_single_row_document(rng, 1 + trial % 12);
    for (const auto& [id, r] : d.relations) {
      const SummaryTree t = extract_tree(d, RelationRef{id});
      EXPECT_EQ(node_count(t), unfolded_size(d, id)) << id;
      EXPECT_EQ(extract_tree(d, RelationRef{id}), t);
    }
  }
}
