#include <gtest/gtest.h>

#include "support.hpp"
#include "tag/error.hpp"
#include "tag/formats.hpp"
#include "tag/service.hpp"

using namespace tag;
using namespace tag::testing;

namespace {

template <class F>
ErrorCode parse_failure(F&& f, ParseReport* report = nullptr) {
  try {
    f();
  } catch (const ParseError& e) {
    if (report) *report = e.report();
    return e.code();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parse succeeded";
  return ErrorCode::NotFound;
}

const char* kInductionText = "Induction of p21 by p53 following DNA damage inhibits both Cdk4 and Cdk2\n";

}  // namespace

TEST(Brat, TextBoundLine) {
  const auto parsed = parse_brat(kInductionText, "T1\tGene_or_gene_product 13 16\tp21\n");
  const Mention& m = parsed.document.mentions.at("T1");
  EXPECT_EQ(m.type, "Gene_or_gene_product");
  ASSERT_EQ(m.anchors.size(), 1u);
  EXPECT_EQ(m.anchors[0], (Span{13, 16}));
  EXPECT_EQ(m.layer, Layer::Semantic);
}

TEST(Brat, EventWithRelationArgument) {
  const Document d = induction();
  const Relation& e2 = d.relations.at("E2");
  EXPECT_EQ(e2.trigger, std::optional<AnchorRef>(MentionRef{"T6"}));
  ASSERT_EQ(e2.arguments.size(), 2u);
  EXPECT_EQ(e2.arguments[0].role, "Controller");
  EXPECT_EQ(e2.arguments[0].target, AnchorRef(RelationRef{"E1"}));
  EXPECT_EQ(e2.arguments[1].role, "Controlled");
  EXPECT_EQ(e2.arguments[1].target, AnchorRef(MentionRef{"T3"}));
}

TEST(Brat, ReversedOffsetsRejected) {
  const std::string text(60, 'x');
  const ErrorCode code = parse_failure([&] { parse_brat(text, "T9\tProtein 50 47\tx\n"); });
  EXPECT_TRUE(code == ErrorCode::OffsetOutOfBounds || code == ErrorCode::MalformedLine);
}

TEST(Brat, OffsetPastEnd) {
  EXPECT_EQ(parse_failure([] { parse_brat("abc", "T1\tProtein 1 9\tbc\n"); }), ErrorCode::OffsetOutOfBounds);
}

TEST(Brat, SurfaceTextMismatch) {
  EXPECT_EQ(parse_failure([] { parse_brat("abc def", "T1\tProtein 0 3\txyz\n"); }), ErrorCode::TextMismatch);
}

TEST(Brat, DanglingReferenceNamesTheLine) {
  ParseReport report;
  EXPECT_EQ(parse_failure([] { parse_brat("abc", "T1\tProtein 0 3\tabc\nE1\tX:T1 Theme:T7\n"); }, &report),
            ErrorCode::DanglingReference);
  ASSERT_FALSE(report.errors.empty());
  EXPECT_EQ(report.errors[0].locator, "line 2");
}

TEST(Brat, ReportsEveryErrorNotJustTheFirst) {
  ParseReport report;
  parse_failure([] { parse_brat("abc", "T1\tProtein 0 9\tabc\nT2\tProtein 2 1\tb\n"); }, &report);
  EXPECT_EQ(report.errors.size(), 2u);
}

TEST(Brat, DiscontinuousSpan) {
  const auto parsed = parse_brat("North and South America", "T1\tLocation 0 5;16 23\tNorth America\n");
  const Mention& m = parsed.document.mentions.at("T1");
  ASSERT_EQ(m.anchors.size(), 2u);
  EXPECT_EQ(m.anchors[1], (Span{16, 23}));
}

TEST(Brat, RelationLineIsTriggerFree) {
  const auto parsed = parse_brat("a b", "T1\tX 0 1\ta\nT2\tX 2 3\tb\nR1\tPart Arg1:T1 Arg2:T2\n");
  const Relation& r = parsed.document.relations.at("R1");
  EXPECT_FALSE(r.trigger);
  EXPECT_EQ(r.arguments.size(), 2u);
  EXPECT_EQ(r.direction, Directionality::Directed);
}

TEST(Brat, AttributesNotesAndComments) {
  const auto parsed = parse_brat("a b", "T1\tX 0 1\ta\nA1\tNegation T1\nA2\tConfidence T1 High\n"
                                        "#1\tAnnotatorNotes T1\tchecked\nN1\tReference T1 Wikipedia:534366\tA\n");
  const Mention& m = parsed.document.mentions.at("T1");
  ASSERT_EQ(m.attributes.size(), 2u);
  EXPECT_EQ(m.attributes[1].value, std::optional<std::string>("High"));
  EXPECT_EQ(display_label(m), "X [Negation] [Confidence=High]");
  EXPECT_EQ(parsed.document.metadata.size(), 2u);
}

TEST(Brat, UnknownLineIsReportedNotLost) {
  const auto parsed = parse_brat("a", "T1\tX 0 1\ta\nQ1\twhatever\n");
  EXPECT_EQ(parsed.document.mentions.size(), 1u);
  EXPECT_FALSE(parsed.report.warnings.empty() && parsed.report.dropped.empty());
}

TEST(Brat, CodePointOffsets) {
  // "é" is two bytes; BRAT offsets count code points.
  const std::string text = "caf\xC3\xA9 p53 x";
  const auto parsed = parse_brat(text, "T1\tProtein 5 8\tp53\n");
  const Span s = parsed.document.mentions.at("T1").anchors[0];
  EXPECT_EQ(text.substr(s.start, s.length()), "p53");
  const auto again = serialize(parsed.document, SourceFormat::Brat);
  EXPECT_NE(again.content.find("Protein 5 8"), std::string::npos);
}

TEST(Brat, OffsetFidelity) {
  for (const char* stem : {"induction", "induction_layers", "unlockable_a", "unlockable_b"}) {
    const Document d = load_brat(stem);
    const std::string ann = read_text(data_path(std::string(stem) + ".ann"));
    for (const auto& [id, m] : d.mentions) {
      std::string covered;
      for (const auto& a : m.anchors) {
        if (!covered.empty()) covered += ' ';
        covered += d.text.substr(a.start, a.length());
      }
      EXPECT_NE(ann.find("\t" + covered + "\n"), std::string::npos) << stem << " " << id;
    }
  }
}

TEST(Brat, SerializeIsDeterministic) {
  const Document d = induction();
  EXPECT_EQ(serialize(d, SourceFormat::Brat).content, serialize(d, SourceFormat::Brat).content);
}

TEST(Conllx, RootRow) {
  const auto parsed = parse_conllx("1\tinhibits\t_\t_\tVBZ\t_\t0\tROOT\t_\t_\n");
  const Document& d = parsed.document;
  ASSERT_EQ(d.tokens.size(), 1u);
  EXPECT_EQ(d.text, "inhibits");
  std::size_t pos = 0, roots = 0;
  for (const auto& [id, m] : d.mentions) {
    EXPECT_EQ(m.layer, Layer::Syntactic);
    pos += m.label == "VBZ";
  }
  for (const auto& [id, r] : d.relations) roots += r.label == "ROOT";
  EXPECT_EQ(pos, 1u);
  EXPECT_EQ(roots, 1u);
}

TEST(Conllx, HeadColumnGivesArc) {
  const Document d =
      parse_conllx("1\tCdk4\t_\t_\tNN\t_\t2\tnsubj\t_\t_\n2\tinhibits\t_\t_\tVBZ\t_\t0\tROOT\t_\t_\n").document;
  const Relation* dep = nullptr;
  for (const auto& [id, r] : d.relations) {
    if (r.label == "nsubj") dep = &r;
  }
  ASSERT_NE(dep, nullptr);
  EXPECT_EQ(dep->layer, Layer::Syntactic);
  EXPECT_EQ(dep->direction, Directionality::Directed);
  const Mention& head = d.mentions.at(std::get<MentionRef>(*dep->trigger).id);
  const Mention& child = d.mentions.at(std::get<MentionRef>(dep->arguments.at(0).target).id);
  EXPECT_EQ(d.text.substr(head.anchors[0].start, head.anchors[0].length()), "inhibits");
  EXPECT_EQ(d.text.substr(child.anchors[0].start, child.anchors[0].length()), "Cdk4");
}

TEST(Conllx, NineColumnsNamesTheLine) {
  ParseReport report;
  EXPECT_EQ(parse_failure([] { parse_conllx("1\ta\t_\t_\tNN\t_\t0\tROOT\t_\t_\n2\tb\t_\t_\tNN\t_\t1\tdep\t_\n"); },
                          &report),
            ErrorCode::ColumnCountMismatch);
  ASSERT_FALSE(report.errors.empty());
  EXPECT_EQ(report.errors[0].locator, "line 2");
}

TEST(Conllx, HeadErrors) {
  EXPECT_EQ(parse_failure([] { parse_conllx("1\ta\t_\t_\tNN\t_\tx\tdep\t_\t_\n"); }), ErrorCode::NonNumericHead);
  EXPECT_EQ(parse_failure([] { parse_conllx("1\ta\t_\t_\tNN\t_\t5\tdep\t_\t_\n"); }), ErrorCode::HeadOutOfRange);
}

TEST(Conllx, SentencesJoinedWithSingleSpaces) {
  const Document d = parse_conllx(read_text(data_path("sentences.conll"))).document;
  EXPECT_EQ(d.text, "The kinase binds DNA . It stops growth .");
  ASSERT_EQ(d.segments.size(), 2u);
  EXPECT_EQ(d.tokens.size(), 9u);
}

TEST(Conllx, OptionalColumnsSurvive) {
  const std::string input = read_text(data_path("sentences.conll"));
  const auto first = parse_conllx(input);
  // Every sentence, the last included, ends with a blank line on output.
  EXPECT_EQ(serialize(first.document, SourceFormat::Conllx).content, input + "\n");
}

TEST(Conllx, SemanticContentIsReportedAsDropped) {
  const auto out = serialize(induction(), SourceFormat::Conllx);
  std::size_t relations = 0;
  for (const auto& d : out.report.dropped) relations += d.locator.front() == 'E';
  EXPECT_EQ(relations, 3u);
}

TEST(Conllx, NothingToWrite) {
  Document empty;
  EXPECT_THROW(serialize(empty, SourceFormat::Conllx), Error);
}

TEST(Bioc, AnnotationLocation) {
  const auto parsed = parse_bioc(read_text(data_path("reach.xml")));
  ASSERT_EQ(parsed.documents.size(), 1u);
  const Mention& m = parsed.documents[0].mentions.at("T1");
  EXPECT_EQ(m.type, "Gene_or_gene_product");
  EXPECT_EQ(m.anchors[0], (Span{13, 16}));
}

TEST(Bioc, RelationNodeReferencingRelation) {
  const Document d = parse_bioc(read_text(data_path("reach.xml"))).documents.at(0);
  const Relation& e2 = d.relations.at("E2");
  bool found = false;
  for (const auto& a : e2.arguments) found = found || a.target == AnchorRef(RelationRef{"E1"});
  EXPECT_TRUE(found);
}

TEST(Bioc, SecondPassageIsRebased) {
  const Document d = parse_bioc(read_text(data_path("reach.xml"))).documents.at(0);
  const Mention& t7 = d.mentions.at("T7");
  EXPECT_EQ(d.text.substr(t7.anchors[0].start, t7.anchors[0].length()), "p53");
}

TEST(Bioc, UnknownRefId) {
  const std::string xml = R"(<collection><source>s</source><document><id>d</id><passage><offset>0</offset>
<text>abc</text><annotation id="A1"><infon key="type">X</infon><location offset="0" length="3"/><text>abc</text></annotation>
<relation id="R1"><infon key="type">Rel</infon><node refid="A1" role="Arg1"/><node refid="Zz9" role="Arg2"/></relation>
</passage></document></collection>)";
  EXPECT_EQ(parse_failure([&] { parse_bioc(xml); }), ErrorCode::UnknownRefId);
}

TEST(Bioc, Malformed) {
  EXPECT_EQ(parse_failure([] { parse_bioc("<collection><document>"); }), ErrorCode::XmlMalformed);
  EXPECT_EQ(parse_failure([] { parse_bioc("<other/>"); }), ErrorCode::XmlMalformed);
}

TEST(Bioc, OffsetOutOfBounds) {
  const std::string xml = R"(<collection><document><id>d</id><passage><offset>0</offset><text>abc</text>
<annotation id="A1"><infon key="type">X</infon><location offset="2" length="5"/></annotation></passage></document></collection>)";
  EXPECT_EQ(parse_failure([&] { parse_bioc(xml); }), ErrorCode::OffsetOutOfBounds);
}

TEST(Serialize, EmptyDocumentToBrat) {
  const auto out = serialize(Document{}, SourceFormat::Brat);
  EXPECT_EQ(out.content, "");
  EXPECT_TRUE(out.report.clean());
}

TEST(RoundTrip, EveryFixtureInItsOwnFormat) {
  for (const char* stem : {"induction", "induction_layers", "unlockable_a", "unlockable_b"}) {
    const Document first = load_brat(stem);
    const auto out = serialize(first, SourceFormat::Brat);
    const Document second = parse_brat(out.text, out.content, stem).document;
    EXPECT_EQ(first_difference(first, second), "") << stem;
  }
  for (const char* name : {"induction_layers.conll", "sentences.conll"}) {
    const Document first = parse_conllx(read_text(data_path(name))).document;
    const Document second = parse_conllx(serialize(first, SourceFormat::Conllx).content).document;
    EXPECT_EQ(first_difference(first, second), "") << name;
  }
  const auto collection = parse_bioc(read_text(data_path("reach.xml"))).documents;
  const auto again = parse_bioc(serialize_bioc(collection).content).documents;
  ASSERT_EQ(again.size(), collection.size());
  for (std::size_t i = 0; i < collection.size(); ++i) EXPECT_EQ(first_difference(collection[i], again[i]), "");
}

TEST(RoundTrip, ConllToBratKeepsTheGraph) {
  const Document first = parse_conllx(read_text(data_path("induction_layers.conll")), "induction_layers").document;
  const auto out = serialize(first, SourceFormat::Brat);
  const Document second = parse_brat(out.text, out.content, "induction_layers").document;
  EXPECT_EQ(first_difference(first, second, EqualityScope::Annotations), "");
}

TEST(RoundTrip, MergedOverlayThroughBrat) {
  const Document merged = load_entry(entry_for_path(data_path("induction_layers.ann"))).document;
  const auto out = serialize(merged, SourceFormat::Brat);
  const Document back = parse_brat(out.text, out.content, "induction_layers").document;
  EXPECT_EQ(first_difference(merged, back, EqualityScope::Annotations), "");
}

TEST(Overlay, InductionHasBothLayers) {
  const Document d = load_entry(entry_for_path(data_path("induction_layers.ann"))).document;
  std::size_t semantic = 0, syntactic = 0;
  for (const auto& [id, r] : d.relations) (r.layer == Layer::Semantic ? semantic : syntactic)++;
  EXPECT_EQ(semantic, 3u);
  EXPECT_EQ(syntactic, 13u);
}

TEST(Taxonomy, ThreeLevelChain) {
  const Taxonomy t = parse_taxonomy("Entity: #1F77B4\n  MacroMolecule\n    Gene_or_gene_product\n");
  EXPECT_EQ(t.ancestors("Gene_or_gene_product"), (std::vector<std::string>{"MacroMolecule", "Entity"}));
  EXPECT_EQ(t.find("Gene_or_gene_product")->color, "#1F77B4");
  const Taxonomy r = recolor_type(t, "Entity", "#ff0000", true);
  EXPECT_EQ(r.find("Gene_or_gene_product")->color, "#FF0000");
}

TEST(Taxonomy, EmptyFile) { EXPECT_TRUE(parse_taxonomy("").empty()); }

TEST(Taxonomy, DuplicateName) {
  EXPECT_EQ(parse_failure([] { parse_taxonomy("Entity\n  Protein\nEvent\n  Protein\n"); }), ErrorCode::DuplicateTypeName);
}

TEST(Taxonomy, Indentation) {
  EXPECT_EQ(parse_failure([] { parse_taxonomy("Entity\n   Protein\n"); }), ErrorCode::IndentationError);
  EXPECT_EQ(parse_failure([] { parse_taxonomy("Entity\n\tProtein\n"); }), ErrorCode::IndentationError);
  EXPECT_EQ(parse_failure([] { parse_taxonomy("Entity\n    Protein\n"); }), ErrorCode::IndentationError);
}

TEST(Taxonomy, PaletteForUncoloredRoots) {
  const Taxonomy t = parse_taxonomy("A\nB\n  C\n");
  EXPECT_NE(t.find("A")->color, t.find("B")->color);
  EXPECT_EQ(t.find("C")->color, t.find("B")->color);
  EXPECT_EQ(parse_taxonomy("A\nB\n  C\n"), t);
}

TEST(Taxonomy, FileRoundTrip) {
  const Taxonomy t = default_taxonomy();
  EXPECT_EQ(parse_taxonomy(serialize_taxonomy(t)), t);
}

TEST(Taxonomy, RecolorCascade) {
  const Taxonomy t = default_taxonomy();
  const Taxonomy leaf_a = recolor_type(t, "Gene_or_gene_product", "#FF0000", true);
  const Taxonomy leaf_b = recolor_type(t, "Gene_or_gene_product", "#FF0000", false);
  EXPECT_EQ(leaf_a, leaf_b);
  const Taxonomy all = recolor_type(t, "Entity", "#00FF00", true);
  for (const auto& name : t.descendants("Entity")) EXPECT_EQ(all.find(name)->color, "#00FF00") << name;
  const Taxonomy one = recolor_type(t, "Entity", "#00FF00", false);
  EXPECT_EQ(one.find("MacroMolecule")->color, t.find("MacroMolecule")->color);
  EXPECT_THROW(recolor_type(t, "Nope", "#000000", false), Error);
  EXPECT_THROW(recolor_type(t, "Entity", "red", false), Error);
}
