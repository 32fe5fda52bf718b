#include "tag/service.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "format_common.hpp"
#include "tag/error.hpp"
#include "tag/json_io.hpp"
#include "tag/svg.hpp"
#include "tag/tree.hpp"

namespace tag {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_conll(const fs::path& p) { return p.extension() == ".conll" || p.extension() == ".conllx"; }

std::optional<fs::path> sibling_conll(const fs::path& stem_path) {
  for (const char* ext : {".conll", ".conllx"}) {
    fs::path candidate = stem_path;
    candidate += ext;
    if (fs::is_regular_file(candidate)) return candidate;
  }
  return std::nullopt;
}

std::optional<std::string> taxonomy_id_for(const fs::path& dir, const std::string& stem) {
  if (fs::is_regular_file(dir / (stem + ".tax"))) return stem;
  if (fs::is_regular_file(dir / "default.tax")) return std::string("default");
  return std::nullopt;
}

Response json_response(int status, const Json& body) { return {status, "application/json", body.dump()}; }

Response error_response(const Error& e) {
  int status = 400;
  if (e.code() == ErrorCode::NotFound) status = 404;
  if (e.code() == ErrorCode::BaseMismatch) status = 409;
  Json body = {{"error", {{"code", std::string(e.code_name())}, {"message", e.what()}}}};
  if (const auto* pe = dynamic_cast<const ParseError*>(&e)) body["error"]["report"] = to_json(pe->report());
  return json_response(status, body);
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  for (auto part : detail::split(path, '/')) {
    if (!part.empty()) out.emplace_back(part);
  }
  return out;
}

double parse_width(const Request& req, double fallback) {
  auto it = req.query.find("width");
  if (it == req.query.end()) return fallback;
  try {
    std::size_t used = 0;
    const double w = std::stod(it->second, &used);
    if (used != it->second.size() || !(w > 0)) throw std::invalid_argument("width");
    return w;
  } catch (const std::exception&) {
    throw Error(ErrorCode::BadRequest, "width must be a positive number");
  }
}

bool flag(const Request& req, const char* key, bool fallback) {
  auto it = req.query.find(key);
  if (it == req.query.end()) return fallback;
  if (it->second == "1" || it->second == "true" || it->second == "on") return true;
  if (it->second == "0" || it->second == "false" || it->second == "off") return false;
  throw Error(ErrorCode::BadRequest, std::string(key) + " must be a boolean");
}

std::optional<std::set<std::string>> name_list(const Request& req, const char* key) {
  auto it = req.query.find(key);
  if (it == req.query.end()) return std::nullopt;
  std::set<std::string> out;
  for (auto part : detail::split(it->second, ',')) {
    if (!part.empty()) out.emplace(part);
  }
  return out;
}

}  // namespace

std::vector<DataFolderEntry> scan_data_folder(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::NotFound, "data folder " + dir.string() + " does not exist");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<DataFolderEntry> entries;
  std::set<fs::path> consumed;
  std::set<std::string> ids;
  auto add = [&](DataFolderEntry entry) {
    if (ids.contains(entry.id)) entry.id += "." + std::string(to_string(entry.format));
    ids.insert(entry.id);
    entries.push_back(std::move(entry));
  };

  for (const auto& f : files) {
    if (f.extension() != ".ann") continue;
    fs::path txt = f;
    txt.replace_extension(".txt");
    if (!fs::is_regular_file(txt)) continue;
    const std::string stem = f.stem().string();
    DataFolderEntry entry{stem, SourceFormat::Brat, {f, txt}, taxonomy_id_for(dir, stem), std::nullopt};
    if (auto conll = sibling_conll(dir / stem)) {
      entry.files.push_back(*conll);
      consumed.insert(*conll);
    }
    add(std::move(entry));
  }
  for (const auto& f : files) {
    if (!is_conll(f) || consumed.contains(f)) continue;
    const std::string stem = f.stem().string();
    add({stem, SourceFormat::Conllx, {f}, taxonomy_id_for(dir, stem), std::nullopt});
  }
  for (const auto& f : files) {
    if (f.extension() != ".xml") continue;
    const std::string stem = f.stem().string();
    std::vector<std::string> doc_ids;
    try {
      for (const auto& d : parse_bioc(read_file(f)).documents) doc_ids.push_back(d.id);
    } catch (const Error&) {
      // Listed anyway; loading reports the problem.
    }
    if (doc_ids.size() <= 1) {
      add({stem, SourceFormat::Bioc, {f}, taxonomy_id_for(dir, stem),
           doc_ids.empty() ? std::nullopt : std::optional<std::string>(doc_ids.front())});
    } else {
      for (const auto& id : doc_ids) {
        add({stem + "-" + id, SourceFormat::Bioc, {f}, taxonomy_id_for(dir, stem), id});
      }
    }
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return NaturalLess{}(a.id, b.id); });
  return entries;
}

DataFolderEntry entry_for_path(const fs::path& path) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  const std::string stem = path.stem().string();
  const auto ext = path.extension();
  if (ext == ".ann" || ext == ".txt") {
    DataFolderEntry entry{stem, SourceFormat::Brat, {dir / (stem + ".ann"), dir / (stem + ".txt")},
                          taxonomy_id_for(dir, stem), std::nullopt};
    if (auto conll = sibling_conll(dir / stem)) entry.files.push_back(*conll);
    return entry;
  }
  if (is_conll(path)) return {stem, SourceFormat::Conllx, {path}, taxonomy_id_for(dir, stem), std::nullopt};
  if (ext == ".xml") return {stem, SourceFormat::Bioc, {path}, taxonomy_id_for(dir, stem), std::nullopt};
  throw Error(ErrorCode::BadRequest, "cannot tell the format of " + path.string() +
                                         " (expected .ann, .txt, .conll, .conllx or .xml)");
}

LoadedDocument load_entry(const DataFolderEntry& entry) {
  switch (entry.format) {
    case SourceFormat::Brat: {
      auto parsed = parse_brat(read_file(entry.files.at(1)), read_file(entry.files.at(0)), entry.id);
      if (entry.files.size() > 2) {
        auto merged = overlay_conllx(parsed.document, read_file(entry.files.at(2)));
        for (auto& w : merged.report.warnings) parsed.report.warnings.push_back(std::move(w));
        for (auto& d : merged.report.dropped) parsed.report.dropped.push_back(std::move(d));
        parsed.document = std::move(merged.document);
      }
      return {std::move(parsed.document), std::move(parsed.report)};
    }
    case SourceFormat::Conllx: {
      auto parsed = parse_conllx(read_file(entry.files.at(0)), entry.id);
      return {std::move(parsed.document), std::move(parsed.report)};
    }
    case SourceFormat::Bioc: {
      auto parsed = parse_bioc(read_file(entry.files.at(0)));
      if (parsed.documents.empty()) throw Error(ErrorCode::NotFound, entry.files.at(0).string() + " has no documents");
      if (!entry.collection_document) return {std::move(parsed.documents.front()), std::move(parsed.report)};
      for (auto& d : parsed.documents) {
        if (d.id == *entry.collection_document) return {std::move(d), std::move(parsed.report)};
      }
      throw Error(ErrorCode::NotFound, "no document '" + *entry.collection_document + "' in " + entry.files.at(0).string());
    }
  }
  throw Error(ErrorCode::NotFound, "unknown format");
}

Taxonomy load_taxonomy_file(const fs::path& path) { return parse_taxonomy(read_file(path)); }

std::optional<fs::path> taxonomy_path_for(const DataFolderEntry& entry) {
  if (!entry.taxonomy_id || entry.files.empty()) return std::nullopt;
  return entry.files.front().parent_path() / (*entry.taxonomy_id + ".tax");
}

ViewConfig make_view_config(const Taxonomy& taxonomy, const ViewOptions& options) {
  ViewConfig cfg;
  cfg.row_width = options.row_width;
  cfg.row_overrides = options.row_overrides;
  cfg.filter.show_semantic = options.show_semantic;
  cfg.filter.show_syntactic = options.show_syntactic;
  cfg.filter.hidden_ids = options.hidden_ids;
  cfg.taxonomy = std::make_shared<const Taxonomy>(taxonomy);
  return cfg;
}

std::string render_document_svg(const Document& doc, const Taxonomy& taxonomy, const ViewOptions& options) {
  const ViewConfig cfg = make_view_config(taxonomy, options);
  return render_annotation_svg(layout_document(doc, cfg), StyleSheet::from_taxonomy(taxonomy));
}

struct Service::Slot {
  std::mutex mutex;
  DataFolderEntry entry;
  std::optional<Document> base;
  std::unique_ptr<EditSession> session;
};

Service::Service(ServiceConfig config) : config_(std::move(config)), entries_(scan_data_folder(config_.data_dir)) {
  for (const auto& e : entries_) {
    auto s = std::make_unique<Slot>();
    s->entry = e;
    slots_.emplace(e.id, std::move(s));
  }
  for (const auto& f : fs::directory_iterator(config_.data_dir)) {
    if (f.is_regular_file() && f.path().extension() == ".tax") {
      taxonomy_files_.emplace(f.path().stem().string(), f.path());
    }
  }
}

Service::~Service() = default;

Service::Slot& Service::slot(const std::string& id) {
  std::lock_guard lock(registry_mutex_);
  auto it = slots_.find(id);
  if (it == slots_.end()) throw Error(ErrorCode::NotFound, "unknown document '" + id + "'");
  return *it->second;
}

Response Service::handle(const Request& request) {
  try {
    return route(request);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return json_response(500, {{"error", {{"code", "INTERNAL"}, {"message", e.what()}}}});
  }
}

Response Service::route(const Request& req) {
  const auto parts = split_path(req.path);
  if (parts.size() < 2 || parts[0] != "api") throw Error(ErrorCode::NotFound, "no route for " + req.path);

  auto taxonomy_named = [&](const std::string& id) -> Taxonomy {
    std::lock_guard lock(registry_mutex_);
    if (auto it = taxonomies_.find(id); it != taxonomies_.end()) return it->second;
    auto file = taxonomy_files_.find(id);
    if (file == taxonomy_files_.end()) throw Error(ErrorCode::NotFound, "unknown taxonomy '" + id + "'");
    return taxonomies_.emplace(id, load_taxonomy_file(file->second)).first->second;
  };

  if (parts[1] == "taxonomies") {
    if (parts.size() == 2 && req.method == "GET") {
      Json list = Json::array();
      for (const auto& [id, path] : taxonomy_files_) list.push_back(id);
      return json_response(200, list);
    }
    if (parts.size() == 3 && req.method == "GET") return json_response(200, to_json(taxonomy_named(parts[2])));
    if (parts.size() == 4 && parts[3] == "recolor" && req.method == "POST") {
      Json body;
      try {
        body = Json::parse(req.body);
      } catch (const Json::exception& e) {
        throw Error(ErrorCode::BadRequest, std::string("malformed body: ") + e.what());
      }
      op::RecolorType op;
      try {
        op = {body.at("type").get<std::string>(), body.at("color").get<std::string>(), body.value("cascade", false)};
      } catch (const Json::exception& e) {
        throw Error(ErrorCode::BadRequest, std::string("malformed recolor request: ") + e.what());
      }
      Taxonomy updated = recolor_type(taxonomy_named(parts[2]), op.type, op.color, op.cascade);
      {
        std::lock_guard lock(registry_mutex_);
        taxonomies_[parts[2]] = updated;
      }
      for (const auto& e : entries_) {
        if (e.taxonomy_id != parts[2]) continue;
        Slot& s = slot(e.id);
        std::lock_guard lock(s.mutex);
        if (s.session) s.session->apply(op);
      }
      return json_response(200, to_json(updated));
    }
    throw Error(ErrorCode::NotFound, "no route for " + req.method + " " + req.path);
  }

  if (parts[1] != "documents") throw Error(ErrorCode::NotFound, "no route for " + req.path);
  if (parts.size() == 2 && req.method == "GET") {
    Json list = Json::array();
    for (const auto& e : entries_) {
      Json files = Json::array();
      for (const auto& f : e.files) files.push_back(f.filename().string());
      list.push_back({{"id", e.id},
                      {"format", to_string(e.format)},
                      {"files", files},
                      {"taxonomy", e.taxonomy_id ? Json(*e.taxonomy_id) : Json(nullptr)}});
    }
    return json_response(200, list);
  }
  if (parts.size() < 3) throw Error(ErrorCode::NotFound, "no route for " + req.path);

  Slot& s = slot(parts[2]);
  std::lock_guard lock(s.mutex);
  if (!s.base) s.base = load_entry(s.entry).document;
  auto store_taxonomy = [&]() { return s.entry.taxonomy_id ? taxonomy_named(*s.entry.taxonomy_id) : Taxonomy{}; };
  auto ensure_session = [&]() -> EditSession& {
    if (!s.session) s.session = std::make_unique<EditSession>(*s.base, store_taxonomy(), config_.clock);
    return *s.session;
  };
  const Document& current = s.session ? s.session->current() : *s.base;
  const Taxonomy taxonomy = s.session ? s.session->state().taxonomy : store_taxonomy();
  auto view_options = [&]() {
    ViewOptions o;
    o.row_width = parse_width(req, config_.default_row_width);
    o.show_semantic = flag(req, "semantics", true);
    o.show_syntactic = flag(req, "syntax", true);
    if (s.session) {
      o.row_overrides = s.session->state().row_overrides;
      o.hidden_ids = s.session->state().hidden_ids;
    }
    return o;
  };
  const std::string sub = parts.size() > 3 ? parts[3] : "";
  if (parts.size() > 4) throw Error(ErrorCode::NotFound, "no route for " + req.path);

  if (sub.empty() && req.method == "GET") return json_response(200, to_json(current));

  if (sub == "layout" && req.method == "GET") {
    ViewConfig cfg = make_view_config(taxonomy, view_options());
    cfg.filter.include_types = name_list(req, "include");
    cfg.filter.exclude_types = name_list(req, "exclude");
    LayoutContext ctx(current, cfg);
    RowRange range{0, ctx.row_count() == 0 ? 0 : ctx.row_count() - 1};
    if (auto it = req.query.find("rows"); it != req.query.end()) {
      const auto dots = it->second.find("..");
      std::optional<std::size_t> a, b;
      if (dots != std::string::npos) {
        a = detail::parse_index(std::string_view(it->second).substr(0, dots));
        b = detail::parse_index(std::string_view(it->second).substr(dots + 2));
      }
      if (!a || !b) throw Error(ErrorCode::BadRequest, "rows must look like A..B");
      range = {*a, *b};
    } else if (ctx.row_count() == 0) {
      LayoutGeometry empty;
      empty.row_width = cfg.row_width;
      return json_response(200, to_json(empty));
    }
    return json_response(200, to_json(layout_window(ctx, range)));
  }

  if (sub == "tree" && req.method == "GET") {
    auto it = req.query.find("select");
    if (it == req.query.end()) throw Error(ErrorCode::BadRequest, "select parameter is required");
    auto ref = resolve_element(current, it->second);
    if (!ref) throw Error(ErrorCode::UnknownRef, "'" + it->second + "' does not resolve in the document");
    return json_response(200, to_json(extract_tree(current, *ref)));
  }

  if (sub == "svg" && req.method == "GET") {
    return {200, "image/svg+xml", render_document_svg(current, taxonomy, view_options())};
  }

  if (sub == "edits" && req.method == "POST") {
    Json body;
    try {
      body = Json::parse(req.body);
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::BadRequest, std::string("malformed body: ") + e.what());
    }
    EditSession& session = ensure_session();
    if (body.is_object() && body.value("kind", "") == "undo") {
      session.undo();
    } else {
      session.apply(edit_op_from_json(body));
    }
    const DiffEntry& last = session.log().entries.back();
    return json_response(200, {{"seq", last.seq},
                               {"presentation", last.presentation},
                               {"document", to_json(session.current())}});
  }

  if (sub == "diff" && req.method == "GET") {
    const DiffLog log = s.session ? s.session->export_diff()
                                  : DiffLog{s.base->id, content_hash(*s.base), {}};
    return {200, "application/x-ndjson", serialize_diff(log)};
  }

  if (sub == "replay" && req.method == "POST") {
    const DiffLog diff = parse_diff(req.body);
    replay_state(*s.base, store_taxonomy(), diff);  // validates before touching the session
    auto fresh = std::make_unique<EditSession>(*s.base, store_taxonomy(), config_.clock);
    for (const auto& entry : diff.entries) {
      if (std::holds_alternative<op::Undo>(entry.op)) {
        fresh->undo();
      } else {
        fresh->apply(std::get<EditOp>(entry.op));
      }
    }
    s.session = std::move(fresh);
    return json_response(200, {{"applied", diff.entries.size()}, {"document", to_json(s.session->current())}});
  }

  throw Error(ErrorCode::NotFound, "no route for " + req.method + " " + req.path);
}

}  // namespace tag
