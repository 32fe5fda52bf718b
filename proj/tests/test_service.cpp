#include <gtest/gtest.h>

#include <filesystem>

#include "support.hpp"
#include "tag/json_io.hpp"
#include "tag/service.hpp"

using namespace tag;
using namespace tag::testing;
namespace fs = std::filesystem;

namespace {

Clock fixed_clock() {
  return [] { return std::string("2024-01-01T00:00:00Z"); };
}

// A scratch data folder holding copies of the named fixtures.
class Fixture : public ::testing::Test {
 protected:
  void use(std::initializer_list<const char*> names) {
    dir_ = fs::temp_directory_path() / ("tag-service-" + std::to_string(::getpid()) + "-" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    for (const char* n : names) fs::copy_file(data_path(n), dir_ / n);
    service_ = std::make_unique<Service>(ServiceConfig{dir_, 800, fixed_clock()});
  }
  void TearDown() override {
    service_.reset();
    if (!dir_.empty()) fs::remove_all(dir_);
  }
  Response get(const std::string& path, std::map<std::string, std::string> query = {}) {
    return service_->handle({"GET", path, std::move(query), ""});
  }
  Response post(const std::string& path, const std::string& body) {
    return service_->handle({"POST", path, {}, body});
  }

  fs::path dir_;
  std::unique_ptr<Service> service_;
};

std::string error_code(const Response& r) { return Json::parse(r.body).at("error").at("code").get<std::string>(); }

}  // namespace

TEST_F(Fixture, ListsOneBratEntry) {
  use({"induction.txt", "induction.ann", "default.tax"});
  const Response r = get("/api/documents");
  ASSERT_EQ(r.status, 200);
  const Json list = Json::parse(r.body);
  ASSERT_EQ(list.size(), 1u);
  EXPECT_EQ(list[0].at("id"), "induction");
  EXPECT_EQ(list[0].at("format"), "brat");
  EXPECT_EQ(list[0].at("taxonomy"), "default");
}

TEST_F(Fixture, ScansTheFixtureFolder) {
  use({"induction.txt", "induction.ann", "induction_layers.txt", "induction_layers.ann", "induction_layers.conll", "sentences.conll", "reach.xml",
       "default.tax"});
  std::map<std::string, std::string> formats;
  for (const auto& e : Json::parse(get("/api/documents").body)) formats[e.at("id")] = e.at("format");
  EXPECT_EQ(formats.at("induction"), "brat");
  EXPECT_EQ(formats.at("induction_layers"), "brat");
  EXPECT_EQ(formats.at("sentences"), "conllx");
  EXPECT_FALSE(formats.contains("induction_layers.conllx"));
  std::size_t bioc = 0;
  for (const auto& [id, f] : formats) bioc += f == "bioc";
  EXPECT_GE(bioc, 1u);
}

TEST_F(Fixture, DocumentAndNotFound) {
  use({"induction.txt", "induction.ann", "default.tax"});
  const Response r = get("/api/documents/induction");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(document_from_json(Json::parse(r.body)), induction());
  EXPECT_EQ(get("/api/documents/nope").status, 404);
  EXPECT_EQ(get("/api/nothing").status, 404);
  EXPECT_EQ(error_code(get("/api/documents/nope")), "NOT_FOUND");
}

TEST_F(Fixture, CycleEditIsA400) {
  use({"induction.txt", "induction.ann", "default.tax"});
  const Response r = post("/api/documents/induction/edits", to_json(EditOp{op::Reattach{"E1", 0, RelationRef{"E2"}}}).dump());
  EXPECT_EQ(r.status, 400);
  EXPECT_EQ(error_code(r), "CYCLE_DETECTED");
  EXPECT_EQ(get("/api/documents/induction/diff").body, serialize_diff({"induction", content_hash(induction()), {}}));
}

TEST_F(Fixture, EditsThenDiffReplaysElsewhere) {
  use({"induction.txt", "induction.ann", "default.tax"});
  ASSERT_EQ(post("/api/documents/induction/edits", to_json(EditOp{op::Relabel{"E1", "induces"}}).dump()).status, 200);
  const Response hide = post("/api/documents/induction/edits", to_json(EditOp{op::Hide{"E3"}}).dump());
  ASSERT_EQ(hide.status, 200);
  EXPECT_TRUE(Json::parse(hide.body).at("presentation").get<bool>());
  const Response diff = get("/api/documents/induction/diff");
  EXPECT_EQ(diff.content_type, "application/x-ndjson");
  EXPECT_EQ(replay(induction(), parse_diff(diff.body)).relations.at("E1").label, "induces");

  ASSERT_EQ(post("/api/documents/induction/edits", R"({"kind":"undo"})").status, 200);
  ASSERT_EQ(post("/api/documents/induction/edits", R"({"kind":"undo"})").status, 200);
  EXPECT_EQ(error_code(post("/api/documents/induction/edits", R"({"kind":"undo"})")), "NOTHING_TO_UNDO");

  const Response replayed = post("/api/documents/induction/replay", diff.body);
  ASSERT_EQ(replayed.status, 200);
  EXPECT_EQ(Json::parse(replayed.body).at("applied"), 2);
  EXPECT_EQ(document_from_json(Json::parse(get("/api/documents/induction").body)).relations.at("E1").label, "induces");
}

TEST_F(Fixture, ReplayAgainstAnotherBaseIs409) {
  use({"induction.txt", "induction.ann", "unlockable_a.txt", "unlockable_a.ann", "default.tax"});
  post("/api/documents/induction/edits", to_json(EditOp{op::Relabel{"E1", "x"}}).dump());
  const Response r = post("/api/documents/unlockable_a/replay", get("/api/documents/induction/diff").body);
  EXPECT_EQ(r.status, 409);
  EXPECT_EQ(error_code(r), "BASE_MISMATCH");
  EXPECT_EQ(post("/api/documents/induction/replay", "junk").status, 400);
}

TEST_F(Fixture, WindowedLayoutMatchesTheFullOne) {
  use({"induction.txt", "induction.ann", "default.tax"});
  const Json full = Json::parse(get("/api/documents/induction/layout", {{"width", "300"}}).body);
  const std::size_t rows = full.at("rows").size();
  ASSERT_GT(rows, 1u);
  const Json first = Json::parse(get("/api/documents/induction/layout", {{"width", "300"}, {"rows", "0..0"}}).body);
  const Json all = Json::parse(
      get("/api/documents/induction/layout", {{"width", "300"}, {"rows", "0.." + std::to_string(rows - 1)}}).body);
  EXPECT_EQ(all, full);

  ViewConfig cfg;
  cfg.row_width = 300;
  const Document doc = induction();
  const LayoutContext ctx(doc, cfg);
  EXPECT_EQ(first, to_json(row_slice(layout_window(ctx, {0, rows - 1}), 0)));
  EXPECT_EQ(get("/api/documents/induction/layout", {{"rows", "0..99"}}).status, 400);
  EXPECT_EQ(get("/api/documents/induction/layout", {{"rows", "x"}}).status, 400);
}

TEST_F(Fixture, SvgAndTree) {
  use({"induction.txt", "induction.ann", "default.tax"});
  const Response svg = get("/api/documents/induction/svg", {{"width", "800"}});
  EXPECT_EQ(svg.content_type, "image/svg+xml");
  EXPECT_EQ(svg.body, render_document_svg(induction(), default_taxonomy(), ViewOptions{}));
  const Response tree = get("/api/documents/induction/tree", {{"select", "T6"}});
  ASSERT_EQ(tree.status, 200);
  EXPECT_EQ(tree.body, to_json(extract_tree(induction(), MentionRef{"T6"})).dump());
  EXPECT_EQ(error_code(get("/api/documents/induction/tree", {{"select", "Q1"}})), "UNKNOWN_REF");
}

TEST_F(Fixture, RecolorReachesTheSvg) {
  use({"induction.txt", "induction.ann", "default.tax"});
  ASSERT_EQ(post("/api/documents/induction/edits", to_json(EditOp{op::Relabel{"E1", "x"}}).dump()).status, 200);
  const Response r = post("/api/taxonomies/default/recolor", R"({"type":"Gene_or_gene_product","color":"#FF0000"})");
  ASSERT_EQ(r.status, 200);
  EXPECT_NE(get("/api/documents/induction/svg").body.find("#FF0000"), std::string::npos);
  EXPECT_EQ(post("/api/taxonomies/default/recolor", R"({"type":"Gene_or_gene_product","color":"red?"})").status, 400);
  EXPECT_EQ(get("/api/taxonomies/none").status, 404);
  EXPECT_EQ(Json::parse(get("/api/taxonomies").body), Json::array({"default"}));
}
