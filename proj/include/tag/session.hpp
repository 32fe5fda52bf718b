#pragma once

// Editing on top of an immutable base document. Every applied operation is
// appended to a log that replays onto the base to reproduce the session.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "tag/graph.hpp"
#include "tag/json_io.hpp"
#include "tag/layout.hpp"
#include "tag/taxonomy.hpp"

namespace tag {

namespace op {

struct Relabel {
  std::string id;
  std::string label;
  bool operator==(const Relabel&) const = default;
};
struct Retype {
  std::string id;
  std::optional<std::string> type;
  bool operator==(const Retype&) const = default;
};
struct Reattach {
  std::string relation_id;
  std::size_t arg_index = 0;
  AnchorRef target;
  bool operator==(const Reattach&) const = default;
};
struct CreateMention {
  Mention mention;
  bool operator==(const CreateMention&) const = default;
};
struct CreateRelation {
  Relation relation;
  bool operator==(const CreateRelation&) const = default;
};
struct Delete {
  std::string id;
  bool operator==(const Delete&) const = default;
};
struct Hide {
  std::string id;
  bool operator==(const Hide&) const = default;
};
struct Unhide {
  std::string id;
  bool operator==(const Unhide&) const = default;
};
struct RecolorType {
  std::string type;
  std::string color;
  bool cascade = false;
  bool operator==(const RecolorType&) const = default;
};
struct MoveToken {
  std::size_t token_index = 0;
  std::size_t row = 0;
  double x = 0;
  bool operator==(const MoveToken&) const = default;
};
/// Log-only entry: retracts the most recent effective operation.
struct Undo {
  std::uint64_t retracts = 0;
  bool operator==(const Undo&) const = default;
};

}  // namespace op

using EditOp = std::variant<op::Relabel, op::Retype, op::Reattach, op::CreateMention, op::CreateRelation,
                            op::Delete, op::Hide, op::Unhide, op::RecolorType, op::MoveToken>;

/// Hide, Unhide and MoveToken change only the view, never the document.
bool is_presentation(const EditOp& op);

struct DiffEntry {
  std::uint64_t seq = 0;
  std::string timestamp;
  std::variant<EditOp, op::Undo> op;
  bool presentation = false;

  bool operator==(const DiffEntry&) const = default;
};

inline constexpr const char* kDiffFormatVersion = "1";

struct DiffLog {
  std::string base_id;
  std::string base_hash;
  std::vector<DiffEntry> entries;

  bool operator==(const DiffLog&) const = default;
};

/// Everything an edit can change.
struct SessionState {
  Document document;
  Taxonomy taxonomy;
  std::map<std::size_t, RowPlacement> row_overrides;
  std::set<std::string> hidden_ids;

  bool operator==(const SessionState&) const = default;
};

/// Hex SHA-256 of the document's canonical JSON.
std::string content_hash(const Document& doc);

/// Applies one operation to a state; throws the graph-core error on failure.
SessionState apply_op(const SessionState& state, const EditOp& op);

/// Returns an ISO-8601 UTC timestamp.
using Clock = std::function<std::string()>;
std::string utc_now();

class EditSession {
 public:
  explicit EditSession(Document base, Taxonomy taxonomy = {}, Clock clock = utc_now);

  const Document& base() const { return base_.document; }
  const SessionState& state() const { return history_.back(); }
  const Document& current() const { return state().document; }
  const DiffLog& log() const { return log_; }
  bool can_undo() const { return history_.size() > 1; }

  /// Strong guarantee: on error nothing changes and nothing is logged.
  void apply(const EditOp& op);
  /// Throws NothingToUndo.
  void undo();
  DiffLog export_diff() const { return log_; }

 private:
  SessionState base_;
  std::vector<SessionState> history_;
  std::vector<std::uint64_t> applied_seq_;
  DiffLog log_;
  Clock clock_;
  std::uint64_t next_seq_ = 1;
};

/// Throws BaseMismatch when the diff was made against another base, and
/// ReplayConflict naming the sequence number of an operation that fails.
SessionState replay_state(const Document& base, const Taxonomy& taxonomy, const DiffLog& diff);
Document replay(const Document& base, const DiffLog& diff);

Json to_json(const EditOp& op);
EditOp edit_op_from_json(const Json& j);

/// JSON lines: a header, then one entry per line.
std::string serialize_diff(const DiffLog& diff);
DiffLog parse_diff(std::string_view text);

}  // namespace tag
