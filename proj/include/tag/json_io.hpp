#pragma once

// Canonical JSON forms shared by the service, the CLI and the diff file.
// Offsets are UTF-8 byte offsets into Document::text. Readers throw
// BadRequest on malformed input.

#include "json.hpp"
#include "tag/formats.hpp"
#include "tag/graph.hpp"
#include "tag/layout.hpp"
#include "tag/taxonomy.hpp"
#include "tag/tree.hpp"

namespace tag {

using Json = nlohmann::json;

/// {"kind":"token","index":3} | {"kind":"mention","id":"T1"} | {"kind":"relation","id":"E1"}
Json to_json(const AnchorRef& ref);
AnchorRef anchor_ref_from_json(const Json& j);

Json to_json(const Mention& m);
Mention mention_from_json(const Json& j);
Json to_json(const Relation& r);
Relation relation_from_json(const Json& j);

Json to_json(const Document& doc);
Document document_from_json(const Json& j);

Json to_json(const Taxonomy& taxonomy);
Taxonomy taxonomy_from_json(const Json& j);

Json to_json(const ParseReport& report);
Json to_json(const LayoutGeometry& geometry);
Json to_json(const SummaryTree& tree);

}  // namespace tag
