#pragma once

// HTTP facade over a data folder. Service::handle maps a request to a
// response without touching a socket; serve() binds it to HTTP/1.1.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tag/formats.hpp"
#include "tag/graph.hpp"
#include "tag/layout.hpp"
#include "tag/session.hpp"
#include "tag/taxonomy.hpp"

namespace tag {

struct DataFolderEntry {
  std::string id;
  SourceFormat format = SourceFormat::Brat;
  std::vector<std::filesystem::path> files;
  /// Id of the .tax file that applies, if any.
  std::optional<std::string> taxonomy_id;
  /// Document id inside a BioC collection.
  std::optional<std::string> collection_document;
};

/// X.txt + X.ann is a BRAT entry, merged with X.conll when present as its
/// syntactic layer; other .conll/.conllx files are CoNLL-X entries; .xml
/// files are BioC (one entry per document when there are several).
/// X.tax is X's taxonomy, default.tax applies to the rest.
std::vector<DataFolderEntry> scan_data_folder(const std::filesystem::path& dir);

/// Builds the entry for a single file using the same rules as the scan.
DataFolderEntry entry_for_path(const std::filesystem::path& path);

struct LoadedDocument {
  Document document;
  ParseReport report;
};

LoadedDocument load_entry(const DataFolderEntry& entry);
Taxonomy load_taxonomy_file(const std::filesystem::path& path);
/// X.tax beside the entry, else default.tax in its folder.
std::optional<std::filesystem::path> taxonomy_path_for(const DataFolderEntry& entry);

struct ViewOptions {
  double row_width = 800;
  bool show_semantic = true;
  bool show_syntactic = true;
  std::map<std::size_t, RowPlacement> row_overrides;
  std::set<std::string> hidden_ids;
};

ViewConfig make_view_config(const Taxonomy& taxonomy, const ViewOptions& options);
/// The single rendering path used by both the CLI and the service.
std::string render_document_svg(const Document& doc, const Taxonomy& taxonomy, const ViewOptions& options);

struct Request {
  std::string method = "GET";
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct ServiceConfig {
  std::filesystem::path data_dir;
  double default_row_width = 800;
  Clock clock = utc_now;
};

class Service {
 public:
  explicit Service(ServiceConfig config);
  ~Service();

  Response handle(const Request& request);
  const std::vector<DataFolderEntry>& entries() const { return entries_; }

 private:
  struct Slot;
  Slot& slot(const std::string& id);
  Response route(const Request& request);

  ServiceConfig config_;
  std::vector<DataFolderEntry> entries_;
  std::mutex registry_mutex_;
  std::map<std::string, std::unique_ptr<Slot>> slots_;
  std::map<std::string, Taxonomy> taxonomies_;
  std::map<std::string, std::filesystem::path> taxonomy_files_;
};

/// HTTP/1.1 front end for a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  bool bind(const std::string& host, int port);
  /// Binds an ephemeral port and returns it, or -1.
  int bind_any(const std::string& host);
  /// Blocks until stop() is called from another thread.
  bool run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Blocks serving HTTP until the process ends. Returns false if binding fails.
bool serve(Service& service, const std::string& host, int port);

}  // namespace tag
