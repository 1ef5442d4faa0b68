#include <doctest.h>

#include <random>
#include <sstream>

#include "cear/obo.hpp"
#include "support/generators.hpp"

using namespace cear;

namespace {

Ontology parse(const std::string& text) {
  std::istringstream in(text);
  return parse_obo(in);
}

}  // namespace

TEST_CASE("parse a minimal term stanza") {
  Ontology onto = parse(
      "format-version: 1.2\n"
      "\n"
      "[Term]\n"
      "id: CHEBI:35225\n"
      "name: buffer\n"
      "is_a: CHEBI:33232\n");
  REQUIRE(onto.terms.count("CHEBI:35225") == 1);
  const OntologyTerm& term = onto.terms.at("CHEBI:35225");
  CHECK(term.label == "buffer");
  REQUIRE(term.parents.size() == 1);
  CHECK(term.parents[0] == "CHEBI:33232");
  CHECK_FALSE(term.obsolete);
}

TEST_CASE("empty stream parses to zero terms") {
  Ontology onto = parse("");
  CHECK(onto.terms.empty());
  CHECK(onto.diagnostics.empty());
}

TEST_CASE("synonym lines keep the quoted text, any scope") {
  Ontology onto = parse(
      "[Term]\n"
      "id: CHEBI:30741\n"
      "name: ethylene glycol bis(2-aminoethyl)tetraacetate\n"
      "synonym: \"EGTA\" RELATED []\n"
      "synonym: \"Egtazic Acid\" EXACT [KEGG:D00150]\n"
      "synonym: \"3,12-bis(carboxymethyl)\" NARROW []\n");
  const OntologyTerm& term = onto.terms.at("CHEBI:30741");
  REQUIRE(term.synonyms.size() == 3);
  CHECK(term.synonyms[0] == "EGTA");
  CHECK(term.synonyms[1] == "Egtazic Acid");
}

TEST_CASE("escaped quotes inside synonyms survive") {
  Ontology onto = parse(
      "[Term]\n"
      "id: X:1\n"
      "name: x\n"
      "synonym: \"the \\\"quoted\\\" one\" EXACT []\n");
  CHECK(onto.terms.at("X:1").synonyms[0] == "the \"quoted\" one");
}

TEST_CASE("is_a trailing comments are cut") {
  Ontology onto = parse(
      "[Term]\n"
      "id: X:1\n"
      "name: x\n"
      "is_a: X:2 ! some label\n"
      "\n"
      "[Term]\n"
      "id: X:2\n"
      "name: y\n");
  CHECK(onto.terms.at("X:1").parents == std::vector<std::string>{"X:2"});
  CHECK(onto.diagnostics.empty());
}

TEST_CASE("obsolete terms are retained and flagged") {
  Ontology onto = parse(
      "[Term]\n"
      "id: X:1\n"
      "is_obsolete: true\n");
  CHECK(onto.terms.at("X:1").obsolete);
}

TEST_CASE("non-Term stanzas are skipped") {
  Ontology onto = parse(
      "[Typedef]\n"
      "id: has_role\n"
      "name: has role\n"
      "\n"
      "[Term]\n"
      "id: X:1\n"
      "name: x\n");
  CHECK(onto.terms.size() == 1);
  CHECK(onto.terms.count("X:1") == 1);
}

TEST_CASE("malformed input raises MalformedStanza with a line number") {
  auto kind_of = [](const std::string& text) {
    try {
      std::istringstream in(text);
      parse_obo(in);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoError;
  };
  CHECK(kind_of("[Term]\nid: X:1\nname: x\nnonsense line\n") ==
        ErrorKind::MalformedStanza);
  CHECK(kind_of("[Term]\nname: orphan\n") == ErrorKind::MalformedStanza);
  CHECK(kind_of("[Term]\nid: X:1\nname: x\nsynonym: no quotes here\n") ==
        ErrorKind::MalformedStanza);
  CHECK(kind_of("[Term]\nid: X:1\nname: a\n[Term]\nid: X:1\nname: b\n") ==
        ErrorKind::MalformedStanza);
  CHECK(kind_of("[Term]\nid: X:1\n") == ErrorKind::MalformedStanza);
  try {
    std::istringstream in("[Term]\nid: X:1\nname: x\n???\n");
    parse_obo(in);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("4") != std::string::npos);
  }
}

TEST_CASE("dangling is_a becomes a diagnostic, not an error") {
  Ontology onto = parse(
      "[Term]\n"
      "id: X:1\n"
      "name: x\n"
      "is_a: X:404\n");
  REQUIRE(onto.diagnostics.size() == 1);
  CHECK(onto.diagnostics[0].code == "dangling_is_a");
  CHECK(onto.diagnostics[0].term_id == "X:1");
  CHECK(onto.diagnostics[0].detail == "X:404");
}

TEST_CASE("is_a cycles are rejected with the cycle ids") {
  const std::string text =
      "[Term]\nid: X:1\nname: a\nis_a: X:2\n"
      "[Term]\nid: X:2\nname: b\nis_a: X:3\n"
      "[Term]\nid: X:3\nname: c\nis_a: X:1\n";
  try {
    std::istringstream in(text);
    parse_obo(in);
    FAIL("expected CyclicIsA");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CyclicIsA);
    CHECK(std::string(e.what()).find("X:1") != std::string::npos);
    CHECK(std::string(e.what()).find("X:2") != std::string::npos);
    CHECK(std::string(e.what()).find("X:3") != std::string::npos);
  }
}

TEST_CASE("classify: roots, chains and dangling roots") {
  Ontology onto = parse(
      "[Term]\nid: CHEBI:50906\nname: role\n"
      "[Term]\nid: CHEBI:24431\nname: chemical entity\n"
      "[Term]\nid: Y:1\nname: y1\nis_a: CHEBI:24431\n"
      "[Term]\nid: X:1\nname: x1\nis_a: Y:1\n"
      "[Term]\nid: R:1\nname: r1\nis_a: CHEBI:50906\n"
      "[Term]\nid: N:1\nname: n1\n"
      "[Term]\nid: O:1\nname: o1\nis_a: CHEBI:50906\nis_obsolete: true\n");
  auto kinds = classify(onto);
  CHECK(kinds.at("CHEBI:50906") == TermKind::Role);  // reflexive closure
  CHECK(kinds.at("CHEBI:24431") == TermKind::Chemical);
  CHECK(kinds.at("X:1") == TermKind::Chemical);  // two-step chain
  CHECK(kinds.at("R:1") == TermKind::Role);
  CHECK(kinds.at("N:1") == TermKind::Neither);
  CHECK(kinds.at("O:1") == TermKind::Neither);  // obsolete
}

TEST_CASE("classify: a root referenced only as a dangling parent still works") {
  Ontology onto = parse(
      "[Term]\nid: CHEBI:35225\nname: buffer\nis_a: CHEBI:50906\n"
      "[Term]\nid: CHEBI:30741\nname: egta\nis_a: CHEBI:24431\n");
  auto kinds = classify(onto);
  CHECK(kinds.at("CHEBI:35225") == TermKind::Role);
  CHECK(kinds.at("CHEBI:30741") == TermKind::Chemical);
}

TEST_CASE("classify: a term with paths to both roots is Conflict") {
  Ontology onto = parse(
      "[Term]\nid: CHEBI:50906\nname: role\n"
      "[Term]\nid: CHEBI:24431\nname: chemical entity\n"
      "[Term]\nid: M:1\nname: mid role\nis_a: CHEBI:50906\n"
      "[Term]\nid: M:2\nname: mid chem\nis_a: CHEBI:24431\n"
      "[Term]\nid: B:1\nname: both\nis_a: M:1\nis_a: M:2\n");
  auto kinds = classify(onto);
  CHECK(kinds.at("B:1") == TermKind::Conflict);
  CHECK(kinds.at("M:1") == TermKind::Role);
  CHECK(kinds.at("M:2") == TermKind::Chemical);
}

TEST_CASE("classify agrees with per-term DFS reachability on random DAGs") {
  testsupport::Rng rng(1234);
  for (int iter = 0; iter < 40; ++iter) {
    Ontology onto = testsupport::random_ontology(
        rng, testsupport::pick(rng, 2, 50));
    auto kinds = classify(onto);
    for (const auto& [id, term] : onto.terms)
      CHECK(kinds.at(id) == testsupport::oracle_classify(onto, term));
  }
}

TEST_CASE("random junk either parses or raises Error, never crashes") {
  std::mt19937 rng(8);
  const char pool[] = "[]Term:idname is_a synonym\"\\! \n\tCHEBI0123x";
  for (int iter = 0; iter < 300; ++iter) {
    std::string junk;
    size_t len = rng() % 200;
    for (size_t i = 0; i < len; ++i)
      junk.push_back(pool[rng() % (sizeof(pool) - 1)]);
    try {
      std::istringstream in(junk);
      parse_obo(in);
    } catch (const Error&) {
      // fine: structured failure
    }
  }
}

TEST_CASE("parsing and classifying twice is deterministic") {
  const std::string text =
      "[Term]\nid: CHEBI:50906\nname: role\n"
      "[Term]\nid: A:1\nname: a\nis_a: CHEBI:50906\nis_a: GHOST:1\n"
      "[Term]\nid: A:2\nname: b\nis_a: GHOST:2\n";
  Ontology first = parse(text);
  Ontology second = parse(text);
  CHECK(first.diagnostics == second.diagnostics);
  CHECK(classify(first) == classify(second));
  REQUIRE(first.diagnostics.size() == 2);
  CHECK(first.diagnostics[0].term_id <= first.diagnostics[1].term_id);
}
