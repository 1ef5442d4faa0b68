#include <doctest.h>

#include <sstream>

#include "cear/formats.hpp"
#include "cear/lexicon.hpp"
#include "support/generators.hpp"

using namespace cear;

namespace {

Ontology fixture_ontology() {
  std::istringstream in(
      "[Term]\nid: CHEBI:50906\nname: role\n"
      "[Term]\nid: CHEBI:24431\nname: chemical entity\n"
      "[Term]\nid: CHEBI:35225\nname: buffer\nis_a: CHEBI:50906\n"
      "synonym: \"buffers\" RELATED []\n"
      "synonym: \"dye\" RELATED []\n"  // 3 scalars: below the role threshold
      "[Term]\nid: CHEBI:15377\nname: water\nis_a: CHEBI:24431\n"
      "synonym: \"H2O\" EXACT []\n"
      "[Term]\nid: CHEBI:9999\nname: tris base\nis_a: CHEBI:24431\n"
      "synonym: \"tris\" RELATED []\n"
      "[Term]\nid: CHEBI:8888\nname: tris buffer\nis_a: CHEBI:24431\n"
      "synonym: \"tris\" RELATED []\n"
      "[Term]\nid: CHEBI:7777\nname: old thing\nis_a: CHEBI:24431\n"
      "is_obsolete: true\n");
  return parse_obo(in);
}

}  // namespace

TEST_CASE("role lexicon applies the four-character threshold") {
  Ontology onto = fixture_ontology();
  auto kinds = classify(onto);
  Lexicon lex = build_lexicon(onto, kinds, {TermKind::Role}, 4);
  CHECK(lex.lookup("buffer") != nullptr);
  CHECK(lex.lookup("buffers") != nullptr);
  CHECK(lex.lookup("dye") == nullptr);  // shorter than four characters
  CHECK(lex.lookup("water") == nullptr);  // wrong kind
  CHECK(lex.min_length == 4);
}

TEST_CASE("min_length 2 lexicon includes two-character surfaces") {
  Ontology onto = fixture_ontology();
  auto kinds = classify(onto);
  Lexicon lex =
      build_lexicon(onto, kinds, {TermKind::Chemical, TermKind::Role}, 2);
  CHECK(lex.lookup("dye") != nullptr);
  CHECK(lex.lookup("h2o") != nullptr);
  REQUIRE(lex.lookup("h2o"));
  CHECK(lex.lookup("h2o")->term_id == "CHEBI:15377");
}

TEST_CASE("a surface shared by two terms is excluded with a diagnostic") {
  Ontology onto = fixture_ontology();
  auto kinds = classify(onto);
  Lexicon lex = build_lexicon(onto, kinds, {TermKind::Chemical}, 2);
  CHECK(lex.lookup("tris") == nullptr);
  bool found = false;
  for (const Diagnostic& d : lex.diagnostics)
    if (d.code == "ambiguous_surface_form") {
      found = true;
      CHECK(d.detail.find("CHEBI:8888") != std::string::npos);
      CHECK(d.detail.find("CHEBI:9999") != std::string::npos);
    }
  CHECK(found);
  // the unambiguous labels of the colliding terms stay in
  CHECK(lex.lookup("tris base") != nullptr);
  CHECK(lex.lookup("tris buffer") != nullptr);
}

TEST_CASE("labels win over same-term synonyms; obsolete terms are out") {
  std::istringstream in(
      "[Term]\nid: CHEBI:50906\nname: role\n"
      "[Term]\nid: X:1\nname: solvent\nis_a: CHEBI:50906\n"
      "synonym: \"Solvent\" EXACT []\n");
  Ontology onto = parse_obo(in);
  auto kinds = classify(onto);
  Lexicon lex = build_lexicon(onto, kinds, {TermKind::Role}, 4);
  REQUIRE(lex.lookup("solvent"));
  CHECK(lex.lookup("solvent")->surface_kind == SurfaceKind::Label);

  Ontology fixture = fixture_ontology();
  auto fixture_kinds = classify(fixture);
  Lexicon chem = build_lexicon(fixture, fixture_kinds, {TermKind::Chemical}, 2);
  CHECK(chem.lookup("old thing") == nullptr);
}

TEST_CASE("conflict terms are excluded from both lexicons and reported") {
  std::istringstream in(
      "[Term]\nid: CHEBI:50906\nname: role\n"
      "[Term]\nid: CHEBI:24431\nname: chemical entity\n"
      "[Term]\nid: B:1\nname: both ways\nis_a: CHEBI:50906\nis_a: CHEBI:24431\n");
  Ontology onto = parse_obo(in);
  auto kinds = classify(onto);
  Lexicon lex =
      build_lexicon(onto, kinds, {TermKind::Chemical, TermKind::Role}, 2);
  CHECK(lex.lookup("both ways") == nullptr);
  bool reported = false;
  for (const Diagnostic& d : lex.diagnostics)
    if (d.code == "conflict_term" && d.term_id == "B:1") reported = true;
  CHECK(reported);
}

TEST_CASE("every entry key is at least min_length scalars") {
  testsupport::Rng rng(77);
  Ontology onto = testsupport::random_ontology(rng, 40);
  // give terms random labels/synonyms of mixed size
  for (auto& [id, term] : onto.terms) {
    term.label = testsupport::random_word(rng, 1, 10);
    size_t n = testsupport::pick(rng, 0, 3);
    for (size_t i = 0; i < n; ++i)
      term.synonyms.push_back(testsupport::random_word(rng, 1, 10));
  }
  auto kinds = classify(onto);
  for (size_t min_len : {1, 2, 4, 6}) {
    Lexicon lex = build_lexicon(
        onto, kinds, {TermKind::Chemical, TermKind::Role}, min_len);
    for (const auto& [key, entry] : lex.entries)
      CHECK(scalar_count(key) >= min_len);
  }
}

TEST_CASE("raising min_length never adds entries (collision-free fixture)") {
  testsupport::Rng rng(78);
  Ontology onto;
  onto.role_root = "T:0";
  onto.entity_root = "T:1";
  std::set<std::string> used;
  for (size_t i = 0; i < 30; ++i) {
    OntologyTerm term;
    term.id = "T:" + std::to_string(i);
    std::string label;
    do {
      label = testsupport::random_word(rng, 1, 12);
    } while (!used.insert(normalize_surface(label)).second);
    term.label = label;
    if (i > 1) term.parents.push_back(i % 2 == 0 ? "T:0" : "T:1");
    onto.terms.emplace(term.id, std::move(term));
  }
  auto kinds = classify(onto);
  Lexicon wide =
      build_lexicon(onto, kinds, {TermKind::Chemical, TermKind::Role}, 2);
  for (size_t k = 3; k <= 8; ++k) {
    Lexicon narrow =
        build_lexicon(onto, kinds, {TermKind::Chemical, TermKind::Role}, k);
    for (const auto& [key, entry] : narrow.entries)
      CHECK(wide.entries.count(key) == 1);
  }
}

TEST_CASE("serialized lexicon carries exactly min_length and key/id/kind") {
  Ontology onto = fixture_ontology();
  auto kinds = classify(onto);
  Lexicon lex = build_lexicon(onto, kinds, {TermKind::Role}, 4);
  nlohmann::json j = lexicon_to_json(lex);
  CHECK(j.size() == 2);
  CHECK(j.at("min_length") == 4);
  for (const auto& entry : j.at("entries")) {
    CHECK(entry.size() == 3);
    CHECK(entry.contains("key"));
    CHECK(entry.contains("id"));
    CHECK(entry.contains("kind"));
  }
  Lexicon loaded = lexicon_from_json(j, "test");
  CHECK(loaded.entries.size() == lex.entries.size());
  REQUIRE(loaded.lookup("buffer"));
  CHECK(loaded.lookup("buffer")->term_id == "CHEBI:35225");
  CHECK(loaded.lookup("buffer")->kind == TermKind::Role);
}

TEST_CASE("building the same lexicon twice yields identical structures") {
  Ontology onto = fixture_ontology();
  auto kinds = classify(onto);
  Lexicon a = build_lexicon(onto, kinds, {TermKind::Chemical}, 2);
  Lexicon b = build_lexicon(onto, kinds, {TermKind::Chemical}, 2);
  REQUIRE(a.entries.size() == b.entries.size());
  CHECK(a.diagnostics == b.diagnostics);
  auto ita = a.entries.begin();
  auto itb = b.entries.begin();
  for (; ita != a.entries.end(); ++ita, ++itb) {
    CHECK(ita->first == itb->first);
    CHECK(ita->second.term_id == itb->second.term_id);
  }
}
