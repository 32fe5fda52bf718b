#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "tag/error.hpp"
#include "tag/json_io.hpp"
#include "tag/service.hpp"

using namespace tag;
using namespace tag::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::NotFound;
}

Document chain_of_four() {
  Document d = assemble("a b c d", {}, {});
  d.mentions.emplace("T1", mention("T1", "Entity", 0, 1));
  d.tokens = tokenize(d.text, d.mentions);
  d = add_relation(d, relation("E1", std::nullopt, {{"Arg1", MentionRef{"T1"}}, {"Arg2", TokenRef{1}}}));
  d = add_relation(d, relation("E2", MentionRef{"T1"}, {{"Theme", RelationRef{"E1"}}}));
  d = add_relation(d, relation("E3", MentionRef{"T1"}, {{"Theme", RelationRef{"E2"}}}));
  d = add_relation(d, relation("E4", MentionRef{"T1"}, {{"Theme", RelationRef{"E3"}}}));
  return d;
}

}  // namespace

TEST(Graph, AddRelationReferencingARelation) {
  Document d = induction();
  d = delete_element(d, "E2").document;
  ASSERT_FALSE(d.relations.contains("E2"));
  d = add_relation(d, relation("E2", MentionRef{"T6"}, {{"Controller", RelationRef{"E1"}}, {"Controlled", MentionRef{"T3"}}},
                               "Negative_regulation"));
  const Relation& e2 = d.relations.at("E2");
  EXPECT_EQ(e2.arguments[0].target, AnchorRef(RelationRef{"E1"}));
  EXPECT_FALSE(has_cycle(d));
}

TEST(Graph, SelfReferenceIsACycle) {
  Document d = induction();
  EXPECT_EQ(code_of([&] { add_relation(d, relation("R", std::nullopt, {{"Arg1", RelationRef{"R"}}})); }),
            ErrorCode::CycleDetected);
}

TEST(Graph, ClosingAChainIsACycle) {
  Document d = chain_of_four();
  ASSERT_TRUE(reaches(d, "E4", "E1"));
  EXPECT_EQ(code_of([&] { add_argument(d, "E1", {"Back", RelationRef{"E4"}}); }), ErrorCode::CycleDetected);
  EXPECT_TRUE(relation_reaches(d, "E4", "E1"));
  EXPECT_FALSE(relation_reaches(d, "E1", "E4"));
}

TEST(Graph, DanglingReferenceRejected) {
  EXPECT_EQ(code_of([&] { add_relation(induction(), relation("E9", std::nullopt, {{"A", MentionRef{"T1"}}, {"B", MentionRef{"T99"}}})); }),
            ErrorCode::DanglingReference);
}

TEST(Graph, DuplicateIdRejected) {
  EXPECT_EQ(code_of([&] { add_mention(induction(), mention("T1", "Entity", 0, 3)); }), ErrorCode::DuplicateId);
}

TEST(Graph, DeleteP53Cascades) {
  const Document d = induction();
  const auto result = delete_element(d, "T2");
  EXPECT_EQ(result.removed_ids, (std::set<std::string, NaturalLess>{"E1", "E2", "E3", "T2"}));
  EXPECT_TRUE(result.document.relations.empty());
  EXPECT_TRUE(referentially_intact(result.document));
}

TEST(Graph, DeleteIsolatedMention) {
  Document d = add_mention(induction(), mention("T7", "Entity", 24, 33));
  const auto result = delete_element(d, "T7");
  EXPECT_EQ(result.removed_ids, (std::set<std::string, NaturalLess>{"T7"}));
}

TEST(Graph, DeleteRelationWithoutDependents) {
  const auto result = delete_element(induction(), "E3");
  EXPECT_EQ(result.removed_ids, (std::set<std::string, NaturalLess>{"E3"}));
  EXPECT_TRUE(result.document.relations.contains("E1"));
  EXPECT_TRUE(result.document.relations.contains("E2"));
}

TEST(Graph, DeleteUnknown) { EXPECT_EQ(code_of([] { delete_element(induction(), "X1"); }), ErrorCode::UnknownId); }

TEST(Graph, OperationsLeaveOldVersionUntouched) {
  const Document d = induction();
  const std::string before = to_json(d).dump();
  (void)relabel(d, "E1", "new");
  (void)retype(d, "T1", "Entity");
  (void)delete_element(d, "T2");
  (void)reattach(d, "E2", 1, MentionRef{"T4"});
  EXPECT_EQ(to_json(d).dump(), before);
}

TEST(Graph, ReattachBadIndex) {
  EXPECT_EQ(code_of([] { reattach(induction(), "E1", 7, MentionRef{"T1"}); }), ErrorCode::InvalidArgIndex);
}

TEST(Graph, NaturalOrder) {
  NaturalLess less;
  EXPECT_TRUE(less("T2", "T10"));
  EXPECT_FALSE(less("T10", "T2"));
  EXPECT_TRUE(less("E1", "T1"));
}

TEST(Graph, ElementIds) {
  const Document d = induction();
  EXPECT_EQ(resolve_element(d, "tok:3"), AnchorRef(TokenRef{3}));
  EXPECT_EQ(resolve_element(d, "E1"), AnchorRef(RelationRef{"E1"}));
  EXPECT_EQ(resolve_element(d, "T1"), AnchorRef(MentionRef{"T1"}));
  EXPECT_FALSE(resolve_element(d, "tok:999"));
  EXPECT_FALSE(resolve_element(d, "Q1"));
  EXPECT_EQ(element_id(TokenRef{4}), "tok:4");
}

TEST(Filter, SyntaxOffHidesDependencies) {
  const Document d = load_entry(entry_for_path(data_path("induction_layers.ann"))).document;
  VisibilityFilter f;
  f.show_syntactic = false;
  const auto visible = apply_filter(d, f, nullptr);
  std::size_t semantic = 0;
  for (const auto& [id, r] : d.relations) {
    EXPECT_EQ(visible.visible(id), r.layer == Layer::Semantic) << id;
    semantic += r.layer == Layer::Semantic;
  }
  EXPECT_EQ(semantic, 3u);
}

TEST(Filter, EmptyFilterShowsEverything) {
  const Document d = induction();
  const auto visible = apply_filter(d, {}, nullptr);
  for (const auto& [id, m] : d.mentions) EXPECT_TRUE(visible.visible(id));
  for (const auto& [id, r] : d.relations) EXPECT_TRUE(visible.visible(id));
  for (std::size_t i = 0; i < d.tokens.size(); ++i) EXPECT_TRUE(visible.visible(token_element_id(i)));
}

TEST(Filter, ExcludeNegativeRegulation) {
  const Document d = induction();
  VisibilityFilter f;
  f.exclude_types = std::set<std::string>{"Negative_regulation"};
  const auto visible = apply_filter(d, f, nullptr);
  EXPECT_TRUE(visible.visible("E1"));
  EXPECT_FALSE(visible.visible("E2"));
  EXPECT_FALSE(visible.visible("E3"));
  for (const auto& [id, m] : d.mentions) EXPECT_TRUE(visible.visible(id));
}

TEST(Filter, ExcludeAncestorThroughTaxonomy) {
  const Document d = induction();
  const Taxonomy tax = default_taxonomy();
  VisibilityFilter f;
  f.exclude_types = std::set<std::string>{"Entity"};
  const auto visible = apply_filter(d, f, &tax);
  EXPECT_FALSE(visible.visible("T1"));
  EXPECT_TRUE(visible.visible("T5"));
}

TEST(Filter, ExcludeIsMonotone) {
  const Document d = load_entry(entry_for_path(data_path("induction_layers.ann"))).document;
  std::set<std::string> types;
  for (const auto& [id, m] : d.mentions) types.insert(*m.type);
  for (const auto& [id, r] : d.relations) types.insert(*r.type);
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::set<std::string> excluded;
    std::size_t last = apply_filter(d, {}, nullptr).visible_ids.size();
    std::vector<std::string> order(types.begin(), types.end());
    std::shuffle(order.begin(), order.end(), rng);
    for (const auto& t : order) {
      excluded.insert(t);
      VisibilityFilter f;
      f.exclude_types = excluded;
      const std::size_t now = apply_filter(d, f, nullptr).visible_ids.size();
      EXPECT_LE(now, last);
      last = now;
    }
  }
}

TEST(GraphProperty, RandomDeletesKeepIntegrity) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Document d = random_single_row_document(rng, 10);
    while (!d.mentions.empty() || !d.relations.empty()) {
      std::vector<std::string> ids;
      for (const auto& [id, m] : d.mentions) ids.push_back(id);
      for (const auto& [id, r] : d.relations) ids.push_back(id);
      const std::string victim = ids[std::uniform_int_distribution<std::size_t>(0, ids.size() - 1)(rng)];
      auto result = delete_element(d, victim);
      for (const auto& id : result.removed_ids) {
        EXPECT_FALSE(result.document.mentions.contains(id));
        EXPECT_FALSE(result.document.relations.contains(id));
      }
      ASSERT_TRUE(referentially_intact(result.document));
      d = std::move(result.document);
    }
  }
}

TEST(Validate, InductionIsClean) {
  for (const auto& issue : validate(induction())) EXPECT_NE(issue.severity, Severity::Error) << issue.message;
}

TEST(Validate, ReportsDanglingAndCycle) {
  Document d = induction();
  d.relations.at("E1").arguments.push_back({"Extra", RelationRef{"E2"}});
  d.relations.at("E3").arguments.push_back({"Ghost", MentionRef{"T42"}});
  const auto issues = validate(d);
  std::size_t errors = 0;
  for (const auto& i : issues) errors += i.severity == Severity::Error;
  EXPECT_GE(errors, 2u);
}
