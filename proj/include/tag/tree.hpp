#pragma once

// Semantic summary: the relation-reference graph unfolded into a tree
// rooted at a selected element.

#include <string>
#include <vector>

#include "tag/graph.hpp"

namespace tag {

struct SummaryEdge;

struct SummaryNode {
  AnchorRef element;
  std::string label;
  std::vector<SummaryEdge> children;

  bool operator==(const SummaryNode&) const;
};

struct SummaryEdge {
  std::string role;
  SummaryNode node;

  bool operator==(const SummaryEdge&) const = default;
};

struct SummaryTree {
  SummaryNode root;

  bool operator==(const SummaryTree&) const = default;
};

/// Edge role between a selected trigger and the relations it triggers.
inline constexpr const char* kTriggersRole = "triggers";
inline constexpr const char* kTriggerRole = "trigger";

/// A relation's children are its trigger (unless the trigger is the parent
/// node) followed by its arguments; relation arguments recurse. Selecting a
/// token or mention roots the tree there, with every relation it triggers
/// as a child. Sub-events shared by several parents are repeated under
/// each. Throws UnknownRef.
SummaryTree extract_tree(const Document& doc, const AnchorRef& selected);

std::size_t node_count(const SummaryTree& tree);
std::size_t depth(const SummaryTree& tree);

/// Leaves as text, internal nodes as brackets with children ordered by
/// position in the text: "[un [lock able]]".
std::string bracketed(const SummaryTree& tree, const Document& doc);

}  // namespace tag
