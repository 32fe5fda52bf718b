#include "tag/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "CLI11.hpp"
#include "tag/formats.hpp"
#include "tag/json_io.hpp"
#include "tag/service.hpp"
#include "tag/session.hpp"
#include "tag/svg.hpp"
#include "tag/tree.hpp"

namespace tag::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(std::istream& in) {
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_path(const std::string& path, std::istream& in) {
  if (path == "-") return slurp(in);
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::NotFound, "cannot read " + path);
  return slurp(file);
}

void write_path(const std::string& path, const std::string& content, std::ostream& out) {
  if (path == "-") {
    out << content;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::NotFound, "cannot write " + path);
  file << content;
}

void print_report(const ParseReport& report, std::ostream& err) {
  for (const auto& e : report.errors) err << "error: " << e.locator << ": " << e.message << "\n";
  for (const auto& w : report.warnings) err << "warning: " << w.locator << ": " << w.message << "\n";
  for (const auto& d : report.dropped) err << "dropped: " << d.locator << ": " << d.message << "\n";
}

SourceFormat format_option(const std::string& name) {
  try {
    return parse_source_format(name);
  } catch (const Error&) {
    throw UsageError("unknown format '" + name + "' (expected brat, conllx or bioc)");
  }
}

struct Input {
  LoadedDocument loaded;
  std::optional<DataFolderEntry> entry;
  std::vector<Document> collection;
};

/// `syntax_overlay` keeps the X.conll merge that the data folder applies.
Input load_input(const std::string& path, const std::string& from, bool syntax_overlay, std::istream& in) {
  if (path == "-") {
    if (from.empty()) throw UsageError("reading stdin requires --from");
    const SourceFormat format = format_option(from);
    const std::string body = slurp(in);
    if (format == SourceFormat::Brat) throw UsageError("BRAT input needs a .txt/.ann pair, not stdin");
    if (format == SourceFormat::Conllx) {
      auto parsed = parse_conllx(body, "stdin");
      return {{std::move(parsed.document), std::move(parsed.report)}, std::nullopt, {}};
    }
    auto parsed = parse_bioc(body);
    if (parsed.documents.empty()) throw Error(ErrorCode::NotFound, "collection has no documents");
    Input input{{parsed.documents.front(), parsed.report}, std::nullopt, parsed.documents};
    return input;
  }
  DataFolderEntry entry;
  try {
    entry = entry_for_path(path);
  } catch (const Error& e) {
    if (from.empty()) throw UsageError(std::string(e.what()) + "; pass --from");
    const fs::path p(path);
    entry = {p.stem().string(), format_option(from), {p}, std::nullopt, std::nullopt};
  }
  if (!from.empty() && format_option(from) != entry.format) {
    throw UsageError(path + " does not look like " + from + " input");
  }
  if (!syntax_overlay && entry.format == SourceFormat::Brat) entry.files.resize(2);
  Input input{load_entry(entry), entry, {}};
  if (entry.format == SourceFormat::Bioc) {
    std::ifstream file(entry.files.front(), std::ios::binary);
    input.collection = parse_bioc(slurp(file)).documents;
  }
  return input;
}

Taxonomy taxonomy_for(const Input& input, const std::string& explicit_path) {
  if (!explicit_path.empty()) return load_taxonomy_file(explicit_path);
  if (input.entry) {
    if (auto p = taxonomy_path_for(*input.entry); p && fs::is_regular_file(*p)) return load_taxonomy_file(*p);
  }
  return {};
}

/// OUT, OUT.ann or OUT.txt all name the pair OUT.txt + OUT.ann.
void write_brat(const std::string& out_path, const SerializedDocument& s) {
  fs::path stem(out_path);
  if (stem.extension() == ".ann" || stem.extension() == ".txt") stem.replace_extension();
  fs::path txt = stem, ann = stem;
  txt += ".txt";
  ann += ".ann";
  write_path(txt.string(), s.text, std::cout);
  write_path(ann.string(), s.content, std::cout);
}

int convert(const std::string& from, const std::string& to, const std::string& in_path, const std::string& out_path,
            std::istream& in, std::ostream& out, std::ostream& err) {
  if (to.empty()) throw UsageError("convert requires --to");
  const SourceFormat target = format_option(to);
  Input input = load_input(in_path, from, false, in);
  print_report(input.loaded.report, err);
  SerializedDocument s = target == SourceFormat::Bioc && !input.collection.empty()
                             ? serialize_bioc(input.collection)
                             : serialize(input.loaded.document, target);
  if (target != SourceFormat::Bioc && input.collection.size() > 1) {
    err << "warning: collection holds " << input.collection.size() << " documents; converted only '"
        << input.loaded.document.id << "'\n";
  }
  print_report(s.report, err);
  if (target == SourceFormat::Brat) {
    if (out_path == "-") throw UsageError("BRAT output needs OUT to name the .txt/.ann pair");
    write_brat(out_path, s);
  } else {
    write_path(out_path, s.content, out);
  }
  return kOk;
}

int validate_cmd(const std::string& from, const std::string& in_path, std::istream& in, std::ostream& out,
                 std::ostream& err) {
  Input input = load_input(in_path, from, true, in);
  print_report(input.loaded.report, err);
  bool failed = false;
  for (const auto& issue : validate(input.loaded.document)) {
    const bool is_error = issue.severity == Severity::Error;
    failed = failed || is_error;
    err << (is_error ? "error: " : "warning: ") << issue.element << ": " << issue.message << "\n";
  }
  const Document& d = input.loaded.document;
  out << d.id << ": " << d.tokens.size() << " tokens, " << d.mentions.size() << " mentions, " << d.relations.size()
      << " relations" << (failed ? ", invalid" : ", valid") << "\n";
  return failed ? kFailure : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Text annotation graphs: convert, validate and render annotated text."};
  app.name("tag");
  app.require_subcommand(1);

  std::string from, to, in_path, out_path = "-", second_path, taxonomy_path, select, data_dir, host = "127.0.0.1";
  double width = 800;
  int port = 8080;
  bool no_syntax = false, no_semantics = false;

  auto* convert_cmd = app.add_subcommand("convert", "Convert between brat, conllx and bioc; losses go to stderr");
  convert_cmd->add_option("--from", from, "Input format (default: from the extension)");
  convert_cmd->add_option("--to", to, "Output format")->required();
  convert_cmd->add_option("IN", in_path, "Input file, or - for stdin")->required();
  convert_cmd->add_option("OUT", out_path, "Output file, or - for stdout (BRAT: the pair's stem)");

  auto* validate_cmd_app = app.add_subcommand("validate", "Report every parse error and invariant violation");
  validate_cmd_app->add_option("--from", from, "Input format (default: from the extension)");
  validate_cmd_app->add_option("IN", in_path, "Input file, or - for stdin")->required();

  auto* render_cmd = app.add_subcommand("render", "Render the annotation panel as SVG");
  render_cmd->add_option("--from", from, "Input format (default: from the extension)");
  render_cmd->add_option("IN", in_path, "Input file, or - for stdin")->required();
  render_cmd->add_option("-o,--output", out_path, "SVG output, or - for stdout");
  render_cmd->add_option("--width", width, "Row width")->check(CLI::PositiveNumber);
  render_cmd->add_option("--taxonomy", taxonomy_path, "Taxonomy file (default: X.tax or default.tax beside IN)");
  auto* ns = render_cmd->add_flag("--no-syntax", no_syntax, "Hide syntactic annotations");
  auto* nm = render_cmd->add_flag("--no-semantics", no_semantics, "Hide semantic annotations");
  ns->excludes(nm);

  auto* tree_cmd = app.add_subcommand("tree", "Render the summary tree rooted at an element as SVG");
  tree_cmd->add_option("--from", from, "Input format (default: from the extension)");
  tree_cmd->add_option("IN", in_path, "Input file, or - for stdin")->required();
  tree_cmd->add_option("--select", select, "Element id: T1, E2, tok:4, ...")->required();
  tree_cmd->add_option("-o,--output", out_path, "SVG output, or - for stdout");

  auto* serve_cmd = app.add_subcommand("serve", "Serve a data folder over HTTP");
  serve_cmd->add_option("--data", data_dir, "Data folder")->required()->envname("TAG_DATA");
  serve_cmd->add_option("--port", port, "Port")->envname("TAG_PORT")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--host", host, "Bind address")->envname("TAG_HOST");
  serve_cmd->add_option("--width", width, "Default row width")->envname("TAG_ROW_WIDTH")->check(CLI::PositiveNumber);

  auto* replay_cmd = app.add_subcommand("replay", "Apply a diff file to its base document");
  replay_cmd->add_option("BASE", in_path, "Base document")->required();
  replay_cmd->add_option("DIFF", second_path, "Diff file, or - for stdin")->required();
  replay_cmd->add_option("-o,--output", out_path, "Output (.json for the canonical schema)");
  replay_cmd->add_option("--to", to, "Output format: brat, conllx, bioc or json (default: the base's)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return kUsage;
  }

  try {
    if (convert_cmd->parsed()) return convert(from, to, in_path, out_path, in, out, err);
    if (validate_cmd_app->parsed()) return validate_cmd(from, in_path, in, out, err);
    if (render_cmd->parsed()) {
      Input input = load_input(in_path, from, true, in);
      print_report(input.loaded.report, err);
      ViewOptions options;
      options.row_width = width;
      options.show_syntactic = !no_syntax;
      options.show_semantic = !no_semantics;
      write_path(out_path, render_document_svg(input.loaded.document, taxonomy_for(input, taxonomy_path), options), out);
      return kOk;
    }
    if (tree_cmd->parsed()) {
      Input input = load_input(in_path, from, true, in);
      print_report(input.loaded.report, err);
      const Document& doc = input.loaded.document;
      auto ref = resolve_element(doc, select);
      if (!ref) throw Error(ErrorCode::UnknownRef, "'" + select + "' does not resolve in " + doc.id);
      const SummaryTree tree = extract_tree(doc, *ref);
      write_path(out_path, render_tree_svg(tree, StyleSheet::from_taxonomy(taxonomy_for(input, ""))), out);
      err << bracketed(tree, doc) << "\n";
      return kOk;
    }
    if (serve_cmd->parsed()) {
      Service service({data_dir, width, utc_now});
      if (!serve(service, host, port)) {
        err << "error: cannot bind " << host << ":" << port << "\n";
        return kFailure;
      }
      return kOk;
    }
    if (replay_cmd->parsed()) {
      if (in_path == "-") throw UsageError("BASE must be a file");
      Input input = load_input(in_path, "", true, in);
      const DiffLog diff = parse_diff(read_path(second_path, in));
      const SessionState state = replay_state(input.loaded.document, taxonomy_for(input, ""), diff);
      std::string target = to;
      if (target.empty()) {
        target = fs::path(out_path).extension() == ".json" ? "json" : std::string(to_string(input.entry->format));
      }
      if (target == "json") {
        write_path(out_path, to_json(state.document).dump(2) + "\n", out);
        return kOk;
      }
      const SourceFormat format = format_option(target);
      SerializedDocument s = serialize(state.document, format);
      print_report(s.report, err);
      if (format == SourceFormat::Brat) {
        if (out_path == "-") throw UsageError("BRAT output needs -o to name the .txt/.ann pair");
        write_brat(out_path, s);
      } else {
        write_path(out_path, s.content, out);
      }
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.code_name() << ": " << e.what() << "\n";
    print_report(e.report(), err);
    return kFailure;
  } catch (const Error& e) {
    err << "error: " << e.code_name() << ": " << e.what() << "\n";
    return kFailure;
  }
  err << app.help();
  return kUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cin, std::cout, std::cerr);
}

}  // namespace tag::cli
