#pragma once

// Fixture loading, random document generators and independent oracles
// shared by the unit tests and the acceptance binary.

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tag/graph.hpp"
#include "tag/layout.hpp"
#include "tag/session.hpp"

namespace tag::testing {

std::filesystem::path data_path(std::string_view name);
std::string read_text(const std::filesystem::path& path);

/// data/<stem>.txt + data/<stem>.ann, without any CoNLL-X overlay.
Document load_brat(const std::string& stem);
Document induction();
Taxonomy default_taxonomy();

Mention mention(std::string id, std::string type, std::size_t start, std::size_t end,
                Layer layer = Layer::Semantic);
Relation relation(std::string id, std::optional<AnchorRef> trigger, std::vector<Argument> args,
                  std::string type = "Rel");
/// Fills tokens from text and mentions.
Document assemble(std::string text, MentionMap mentions, RelationMap relations);

/// One row of short words, a mention per word and `arcs` relations whose
/// endpoints are mentions or earlier relations.
Document random_single_row_document(std::mt19937& rng, std::size_t arcs);
/// Large document of random words with mostly local relations and some
/// links to nearby relations.
Document synthetic_document(std::size_t tokens, std::size_t relations, unsigned seed);

/// Depth-first search with an explicit in-stack set; true when any
/// relation reaches itself.
bool has_cycle(const Document& doc);
/// Breadth-first search over trigger and argument references.
bool reaches(const Document& doc, const std::string& from, const std::string& to);
/// Every trigger and argument resolves.
bool referentially_intact(const Document& doc);

/// A random edit against the current state; may be invalid.
EditOp random_edit(std::mt19937& rng, const SessionState& state, int& fresh_counter);
/// A random Hide, Unhide or MoveToken.
EditOp random_presentation_edit(std::mt19937& rng, const SessionState& state);

/// Pairwise crossing count computed straight from segment geometry.
std::size_t crossings_oracle(const LayoutGeometry& g);

}  // namespace tag::testing
