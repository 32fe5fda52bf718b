#include "tag/session.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>

#include "format_common.hpp"
#include "tag/error.hpp"

namespace tag {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_element(const Document& doc, const std::string& id) {
  if (!doc.find_mention(id) && !doc.find_relation(id)) {
    throw Error(ErrorCode::UnknownId, "unknown element '" + id + "'");
  }
}

SessionState apply_impl(const SessionState& state, const EditOp& edit, bool with_taxonomy) {
  SessionState next = state;
  std::visit(Overloaded{
                 [&](const op::Relabel& o) { next.document = relabel(state.document, o.id, o.label); },
                 [&](const op::Retype& o) { next.document = retype(state.document, o.id, o.type); },
                 [&](const op::Reattach& o) {
                   next.document = reattach(state.document, o.relation_id, o.arg_index, o.target);
                 },
                 [&](const op::CreateMention& o) { next.document = add_mention(state.document, o.mention); },
                 [&](const op::CreateRelation& o) { next.document = add_relation(state.document, o.relation); },
                 [&](const op::Delete& o) {
                   auto result = delete_element(state.document, o.id);
                   next.document = std::move(result.document);
                   for (const auto& id : result.removed_ids) next.hidden_ids.erase(id);
                 },
                 [&](const op::Hide& o) {
                   require_element(state.document, o.id);
                   next.hidden_ids.insert(o.id);
                 },
                 [&](const op::Unhide& o) {
                   if (!state.hidden_ids.contains(o.id)) {
                     throw Error(ErrorCode::InvalidOperation, "'" + o.id + "' is not hidden");
                   }
                   next.hidden_ids.erase(o.id);
                 },
                 [&](const op::RecolorType& o) {
                   if (with_taxonomy) next.taxonomy = recolor_type(state.taxonomy, o.type, o.color, o.cascade);
                 },
                 [&](const op::MoveToken& o) {
                   if (o.token_index >= state.document.tokens.size()) {
                     throw Error(ErrorCode::UnknownId, "unknown token " + std::to_string(o.token_index));
                   }
                   next.row_overrides[o.token_index] = {o.row, o.x};
                 },
             },
             edit);
  return next;
}

SessionState replay_impl(const Document& base, const Taxonomy& taxonomy, const DiffLog& diff, bool with_taxonomy) {
  const std::string hash = content_hash(base);
  if (diff.base_hash != hash) {
    throw Error(ErrorCode::BaseMismatch, "diff was recorded against base " + diff.base_hash + ", got " + hash);
  }
  std::vector<const DiffEntry*> effective;
  std::uint64_t last_seq = 0;
  for (const auto& entry : diff.entries) {
    if (entry.seq <= last_seq) {
      throw Error(ErrorCode::ReplayConflict, "seq " + std::to_string(entry.seq) + ": sequence numbers must increase");
    }
    last_seq = entry.seq;
    if (const auto* undo = std::get_if<op::Undo>(&entry.op)) {
      if (effective.empty() || effective.back()->seq != undo->retracts) {
        throw Error(ErrorCode::ReplayConflict,
                    "seq " + std::to_string(entry.seq) + ": undo of " + std::to_string(undo->retracts) +
                        " does not match the last effective operation");
      }
      effective.pop_back();
    } else {
      effective.push_back(&entry);
    }
  }
  SessionState state{base, taxonomy, {}, {}};
  for (const DiffEntry* entry : effective) {
    try {
      state = apply_impl(state, std::get<EditOp>(entry->op), with_taxonomy);
    } catch (const Error& e) {
      throw Error(ErrorCode::ReplayConflict, "seq " + std::to_string(entry->seq) + ": " + std::string(e.code_name()) + ": " + e.what());
    }
  }
  return state;
}

std::string hex(const unsigned char* data, unsigned int n) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < n; ++i) {
    out += digits[data[i] >> 4];
    out += digits[data[i] & 0xF];
  }
  return out;
}

}  // namespace

bool is_presentation(const EditOp& op) {
  return std::holds_alternative<op::Hide>(op) || std::holds_alternative<op::Unhide>(op) ||
         std::holds_alternative<op::MoveToken>(op);
}

std::string content_hash(const Document& doc) {
  const std::string canonical = to_json(doc).dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(canonical.data(), canonical.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  return hex(digest, length);
}

SessionState apply_op(const SessionState& state, const EditOp& op) { return apply_impl(state, op, true); }

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

EditSession::EditSession(Document base, Taxonomy taxonomy, Clock clock)
    : base_{std::move(base), std::move(taxonomy), {}, {}}, history_{base_}, clock_(std::move(clock)) {
  log_.base_id = base_.document.id;
  log_.base_hash = content_hash(base_.document);
}

void EditSession::apply(const EditOp& op) {
  SessionState next = apply_op(state(), op);
  const std::uint64_t seq = next_seq_;
  DiffEntry entry{seq, clock_(), op, is_presentation(op)};
  history_.push_back(std::move(next));
  applied_seq_.push_back(seq);
  log_.entries.push_back(std::move(entry));
  ++next_seq_;
}

void EditSession::undo() {
  if (!can_undo()) throw Error(ErrorCode::NothingToUndo, "no operation to undo");
  const std::uint64_t retracted = applied_seq_.back();
  bool presentation = false;
  for (const auto& e : log_.entries) {
    if (e.seq == retracted) presentation = e.presentation;
  }
  DiffEntry entry{next_seq_, clock_(), op::Undo{retracted}, presentation};
  history_.pop_back();
  applied_seq_.pop_back();
  log_.entries.push_back(std::move(entry));
  ++next_seq_;
}

SessionState replay_state(const Document& base, const Taxonomy& taxonomy, const DiffLog& diff) {
  return replay_impl(base, taxonomy, diff, true);
}

Document replay(const Document& base, const DiffLog& diff) {
  return replay_impl(base, Taxonomy{}, diff, false).document;
}

Json to_json(const EditOp& edit) {
  return std::visit(
      Overloaded{
          [](const op::Relabel& o) -> Json { return {{"kind", "relabel"}, {"id", o.id}, {"label", o.label}}; },
          [](const op::Retype& o) -> Json {
            return {{"kind", "retype"}, {"id", o.id}, {"type", o.type ? Json(*o.type) : Json(nullptr)}};
          },
          [](const op::Reattach& o) -> Json {
            return {{"kind", "reattach"},
                    {"relation_id", o.relation_id},
                    {"arg_index", o.arg_index},
                    {"target", to_json(o.target)}};
          },
          [](const op::CreateMention& o) -> Json { return {{"kind", "create_mention"}, {"mention", to_json(o.mention)}}; },
          [](const op::CreateRelation& o) -> Json {
            return {{"kind", "create_relation"}, {"relation", to_json(o.relation)}};
          },
          [](const op::Delete& o) -> Json { return {{"kind", "delete"}, {"id", o.id}}; },
          [](const op::Hide& o) -> Json { return {{"kind", "hide"}, {"id", o.id}}; },
          [](const op::Unhide& o) -> Json { return {{"kind", "unhide"}, {"id", o.id}}; },
          [](const op::RecolorType& o) -> Json {
            return {{"kind", "recolor_type"}, {"type", o.type}, {"color", o.color}, {"cascade", o.cascade}};
          },
          [](const op::MoveToken& o) -> Json {
            return {{"kind", "move_token"}, {"token_index", o.token_index}, {"row", o.row}, {"x", o.x}};
          },
      },
      edit);
}

EditOp edit_op_from_json(const Json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    auto str = [&](const char* key) { return j.at(key).get<std::string>(); };
    if (kind == "relabel") return op::Relabel{str("id"), str("label")};
    if (kind == "retype") {
      std::optional<std::string> type;
      if (j.contains("type") && !j.at("type").is_null()) type = str("type");
      return op::Retype{str("id"), type};
    }
    if (kind == "reattach") {
      return op::Reattach{str("relation_id"), j.at("arg_index").get<std::size_t>(), anchor_ref_from_json(j.at("target"))};
    }
    if (kind == "create_mention") return op::CreateMention{mention_from_json(j.at("mention"))};
    if (kind == "create_relation") return op::CreateRelation{relation_from_json(j.at("relation"))};
    if (kind == "delete") return op::Delete{str("id")};
    if (kind == "hide") return op::Hide{str("id")};
    if (kind == "unhide") return op::Unhide{str("id")};
    if (kind == "recolor_type") return op::RecolorType{str("type"), str("color"), j.value("cascade", false)};
    if (kind == "move_token") {
      return op::MoveToken{j.at("token_index").get<std::size_t>(), j.at("row").get<std::size_t>(),
                           j.at("x").get<double>()};
    }
    throw Error(ErrorCode::BadRequest, "unknown edit kind '" + kind + "'");
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::BadRequest, std::string("malformed edit: ") + e.what());
  }
}

std::string serialize_diff(const DiffLog& diff) {
  std::string out = Json{{"format_version", kDiffFormatVersion}, {"base_id", diff.base_id}, {"base_hash", diff.base_hash}}
                        .dump();
  out += '\n';
  for (const auto& e : diff.entries) {
    Json op_json;
    if (const auto* undo = std::get_if<op::Undo>(&e.op)) {
      op_json = {{"kind", "undo"}, {"retracts", undo->retracts}};
    } else {
      op_json = to_json(std::get<EditOp>(e.op));
    }
    out += Json{{"seq", e.seq}, {"timestamp", e.timestamp}, {"op", op_json}, {"presentation", e.presentation}}.dump();
    out += '\n';
  }
  return out;
}

DiffLog parse_diff(std::string_view text) {
  DiffLog diff;
  bool header = true;
  std::size_t line_no = 0;
  for (auto line : detail::lines_of(text)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    try {
      const Json j = Json::parse(line);
      if (header) {
        if (j.value("format_version", "") != kDiffFormatVersion) {
          throw Error(ErrorCode::BadRequest, "unsupported diff format version");
        }
        diff.base_id = j.at("base_id").get<std::string>();
        diff.base_hash = j.at("base_hash").get<std::string>();
        header = false;
        continue;
      }
      DiffEntry entry;
      entry.seq = j.at("seq").get<std::uint64_t>();
      entry.timestamp = j.value("timestamp", "");
      entry.presentation = j.value("presentation", false);
      const Json& op_json = j.at("op");
      if (op_json.at("kind").get<std::string>() == "undo") {
        entry.op = op::Undo{op_json.at("retracts").get<std::uint64_t>()};
      } else {
        entry.op = edit_op_from_json(op_json);
      }
      diff.entries.push_back(std::move(entry));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::BadRequest, "diff line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (header) throw Error(ErrorCode::BadRequest, "diff has no header line");
  return diff;
}

}  // namespace tag
