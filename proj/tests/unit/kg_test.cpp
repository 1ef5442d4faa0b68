#include <doctest.h>

#include <sstream>

#include "cear/formats.hpp"
#include "cear/html.hpp"
#include "cear/kg.hpp"
#include "cear/turtle.hpp"
#include "support/generators.hpp"
#include "support/turtle_reader.hpp"

using namespace cear;

namespace {

Ontology mini_ontology() {
  std::istringstream in(
      "[Term]\nid: CHEBI:35225\nname: buffer\nis_a: CHEBI:50906\n"
      "[Term]\nid: CHEBI:30741\n"
      "name: ethylene glycol bis(2-aminoethyl)tetraacetate\n"
      "synonym: \"EGTA\" RELATED []\n"
      "is_a: CHEBI:24431\n"
      "[Term]\nid: CHEBI:15377\nname: water\nis_a: CHEBI:24431\n"
      "synonym: \"H2O\" EXACT []\n");
  return parse_obo(in);
}

Lexicon norm_lexicon(const Ontology& onto) {
  auto kinds = classify(onto);
  return build_lexicon(onto, kinds, {TermKind::Chemical, TermKind::Role}, 2);
}

VerdictRecord confirmed(const std::string& chem, const std::string& role,
                        const std::string& doc, int page, size_t offset) {
  VerdictRecord r;
  r.pair.location = {doc, page, offset};
  r.pair.sentence_text = chem + " acts as " + role + ".";
  r.pair.chemical_surface = chem;
  r.pair.role_surface = role;
  r.verdict = Verdict::Confirmed;
  r.raw_answer = "yes";
  r.validator_id = "stub";
  return r;
}

}  // namespace

TEST_CASE("normalize_term grounds known surfaces in the ontology") {
  Ontology onto = mini_ontology();
  Lexicon lex = norm_lexicon(onto);

  NormalizedTerm buffer = normalize_term("buffer", lex, MentionKind::Role);
  CHECK(buffer.source == EntityRef::Source::Chebi);
  CHECK(buffer.chebi_id == "CHEBI:35225");
  CHECK(buffer.display_label == "buffer");

  NormalizedTerm via_synonym =
      normalize_term("EGTA", lex, MentionKind::Chemical);
  CHECK(via_synonym.source == EntityRef::Source::Chebi);
  CHECK(via_synonym.chebi_id == "CHEBI:30741");
  CHECK(via_synonym.display_label ==
        "ethylene glycol bis(2-aminoethyl)tetraacetate");

  NormalizedTerm pbs = normalize_term("PBS", lex, MentionKind::Chemical);
  CHECK(pbs.source == EntityRef::Source::Cear);
  CHECK(pbs.cear_key == "pbs");
  CHECK(pbs.display_label == "PBS");

  // plural that the ontology does not list stays a CEAR role
  NormalizedTerm buffers = normalize_term("buffers", lex, MentionKind::Role);
  CHECK(buffers.source == EntityRef::Source::Cear);

  // kind must match: "buffer" is no chemical
  NormalizedTerm wrong_kind =
      normalize_term("buffer", lex, MentionKind::Chemical);
  CHECK(wrong_kind.source == EntityRef::Source::Cear);

  CHECK_THROWS_AS(normalize_term("x", lex, MentionKind::Role), Error);
  try {
    normalize_term(" y ", lex, MentionKind::Role);
    FAIL("expected TooShort");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooShort);
  }
}

TEST_CASE("assign_cear_ids numbers keys lexicographically") {
  CHECK(assign_cear_ids({"pbs"}, MentionKind::Chemical) ==
        std::map<std::string, std::string>{{"pbs", "chem_1"}});
  auto two = assign_cear_ids({"pbs", "acn"}, MentionKind::Chemical);
  CHECK(two.at("acn") == "chem_1");
  CHECK(two.at("pbs") == "chem_2");
  auto roles = assign_cear_ids({"fuel"}, MentionKind::Role);
  CHECK(roles.at("fuel") == "role_1");
  // sets are unordered by construction, so insertion order cannot matter
  std::set<std::string> reversed;
  reversed.insert("pbs");
  reversed.insert("acn");
  CHECK(assign_cear_ids(reversed, MentionKind::Chemical) == two);
}

TEST_CASE("aggregate groups by normalized refs and deduplicates locations") {
  Ontology onto = mini_ontology();
  Lexicon lex = norm_lexicon(onto);
  std::vector<VerdictRecord> records = {
      confirmed("water", "buffer", "d1", 1, 0),
      confirmed("Water", "buffer", "d1", 2, 10),   // case variant, same term
      confirmed("H2O", "buffer", "d2", 1, 5),      // synonym, same term
      confirmed("water", "buffer", "d1", 1, 0),    // duplicate location
      confirmed("PBS", "buffer", "d3", 1, 7),
  };
  auto relations = aggregate(records, lex);
  REQUIRE(relations.size() == 2);
  CHECK(relations[0].entity.id == "CHEBI:15377");
  CHECK(relations[0].entity.display_label == "water");
  CHECK(relations[0].count == 3);  // dedup left three distinct locations
  CHECK(relations[0].locations.size() == 3);
  CHECK(relations[1].entity.source == EntityRef::Source::Cear);
  CHECK(relations[1].entity.display_label == "PBS");
  CHECK(relations[1].count == 1);
  // both point at the same ChEBI role
  CHECK(relations[0].role.id == "CHEBI:35225");
  CHECK(relations[1].role.id == "CHEBI:35225");
}

TEST_CASE("aggregate drops surfaces shorter than two scalars") {
  Ontology onto = mini_ontology();
  Lexicon lex = norm_lexicon(onto);
  std::vector<VerdictRecord> records = {
      confirmed("w", "buffer", "d1", 1, 0),
      confirmed("water", "buffer", "d1", 1, 8)};
  auto relations = aggregate(records, lex);
  REQUIRE(relations.size() == 1);
  CHECK(relations[0].entity.id == "CHEBI:15377");
}

TEST_CASE("CEAR labels come from the first-seen appearance in text order") {
  Ontology onto = mini_ontology();
  Lexicon lex = norm_lexicon(onto);
  // same normalized key "pbs", two different spellings; canonical record
  // order is by location, so d1 page1 comes first regardless of input order
  std::vector<VerdictRecord> records = {
      confirmed("pbs", "buffer", "d2", 1, 0),
      confirmed("PBS", "buffer", "d1", 1, 0)};
  auto relations = aggregate(records, lex);
  REQUIRE(relations.size() == 1);
  CHECK(relations[0].entity.display_label == "PBS");
}

TEST_CASE("a surface confirmed in both kinds yields two distinct refs") {
  Ontology onto = mini_ontology();
  Lexicon lex = norm_lexicon(onto);
  // "metal" appears as an unknown chemical in one sentence and as an
  // unknown role in another; no arbitration, one ref per kind.
  VerdictRecord as_chem = confirmed("metal", "buffer", "d1", 1, 0);
  VerdictRecord as_role = confirmed("water", "metal", "d2", 1, 0);
  auto relations = aggregate({as_chem, as_role}, lex);
  REQUIRE(relations.size() == 2);
  KnowledgeGraph kg = apply_min_ref(relations, 1);
  size_t metal_refs = 0;
  for (const EntityRef& ref : kg.refs)
    if (ref.display_label == "metal") {
      ++metal_refs;
      CHECK(ref.source == EntityRef::Source::Cear);
    }
  CHECK(metal_refs == 2);
  bool chem_seen = false, role_seen = false;
  for (const EntityRef& ref : kg.refs) {
    if (ref.id == "chem_1" && ref.display_label == "metal") chem_seen = true;
    if (ref.id == "role_1" && ref.display_label == "metal") role_seen = true;
  }
  CHECK(chem_seen);
  CHECK(role_seen);
}

TEST_CASE("apply_min_ref keeps counts >= threshold and restricts labels") {
  Ontology onto = mini_ontology();
  Lexicon lex = norm_lexicon(onto);
  std::vector<VerdictRecord> records;
  for (int i = 0; i < 5; ++i)
    records.push_back(confirmed("water", "buffer", "d1", 1, 10 * i));
  for (int i = 0; i < 2; ++i)
    records.push_back(confirmed("PBS", "buffer", "d2", 1, 10 * i));
  records.push_back(confirmed("EGTA", "buffers", "d3", 1, 0));
  auto relations = aggregate(records, lex);
  REQUIRE(relations.size() == 3);

  KnowledgeGraph identity = apply_min_ref(relations, 1);
  CHECK(identity.relations.size() == 3);

  KnowledgeGraph kg = apply_min_ref(relations, 2);
  CHECK(kg.relations.size() == 2);
  CHECK(kg.min_ref == 2);
  // refs restricted to survivors: EGTA and the CEAR role "buffers" are gone
  for (const EntityRef& ref : kg.refs) {
    CHECK(ref.display_label != "buffers");
    CHECK(ref.id != "CHEBI:30741");
  }
  // monotonicity: kg(10) is a subset of kg(2)
  KnowledgeGraph strict = apply_min_ref(relations, 10);
  for (const Relation& rel : strict.relations) {
    bool found = false;
    for (const Relation& wide : kg.relations)
      if (wide.entity == rel.entity && wide.role == rel.role &&
          wide.count == rel.count)
        found = true;
    CHECK(found);
  }
}

TEST_CASE("turtle output matches the reference layout") {
  Ontology onto = mini_ontology();
  Lexicon lex = norm_lexicon(onto);
  std::vector<VerdictRecord> records = {
      confirmed("ethylene glycol bis(2-aminoethyl)tetraacetate", "buffer",
                "d1", 1, 0),
      confirmed("PBS", "buffer", "d2", 3, 42)};
  KnowledgeGraph kg = apply_min_ref(aggregate(records, lex), 1);
  const std::string ttl = emit_turtle(kg);

  CHECK(ttl ==
        "@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n"
        "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
        "@prefix obo: <http://purl.obolibrary.org/obo/> .\n"
        "@prefix cear: <https://wwwiti.cs.uni-magdeburg.de/iti_dke/cear/> .\n"
        "\n"
        "obo:CHEBI_30741 rdf:type obo:CHEBI_24431 .\n"
        "obo:CHEBI_30741 rdfs:label \"ethylene glycol "
        "bis(2-aminoethyl)tetraacetate\" .\n"
        "obo:CHEBI_30741 obo:RO_0000087 obo:CHEBI_35225 .\n"
        "\n"
        "obo:CHEBI_35225 rdf:type obo:CHEBI_50906 .\n"
        "obo:CHEBI_35225 rdfs:label \"buffer\" .\n"
        "\n"
        "cear:chem_1 rdf:type obo:CHEBI_24431 .\n"
        "cear:chem_1 rdfs:label \"PBS\" .\n"
        "cear:chem_1 obo:RO_0000087 obo:CHEBI_35225 .\n");
}

TEST_CASE("empty graph emits the prefixes only") {
  KnowledgeGraph kg = apply_min_ref({}, 1);
  CHECK(emit_turtle(kg) == std::string(kTurtlePrefixes));
}

TEST_CASE("labels with quotes and newlines re-parse to the same text") {
  EntityRef chem;
  chem.source = EntityRef::Source::Cear;
  chem.kind = MentionKind::Chemical;
  chem.id = "chem_1";
  chem.display_label = "the \"tricky\"\nlabel\t\\end";
  EntityRef role;
  role.source = EntityRef::Source::Chebi;
  role.kind = MentionKind::Role;
  role.id = "CHEBI:35225";
  role.display_label = "buffer";
  Relation rel;
  rel.entity = chem;
  rel.role = role;
  rel.locations = {TextLocation{"d", 1, 0}};
  rel.count = 1;
  KnowledgeGraph kg = apply_min_ref({rel}, 1);

  auto parsed = turtle_reader::parse(emit_turtle(kg));
  bool found = false;
  for (const auto& t : parsed.triples)
    if (t.o == "lit:the \"tricky\"\nlabel\t\\end") found = true;
  CHECK(found);
}

TEST_CASE("rdf-star adds one source annotation per location") {
  Ontology onto = mini_ontology();
  Lexicon lex = norm_lexicon(onto);
  std::vector<VerdictRecord> records = {
      confirmed("water", "buffer", "d1", 1, 5),
      confirmed("water", "buffer", "d2", 7, 99)};
  KnowledgeGraph kg = apply_min_ref(aggregate(records, lex), 1);
  const std::string star = emit_rdf_star(kg);
  auto parsed = turtle_reader::parse(star);
  REQUIRE(parsed.annotations.size() == 2);
  const auto& a = parsed.annotations[0];
  CHECK(a.target.s == "iri:http://purl.obolibrary.org/obo/CHEBI_15377");
  CHECK(a.target.p == "iri:http://purl.obolibrary.org/obo/RO_0000087");
  CHECK(a.p == "iri:https://wwwiti.cs.uni-magdeburg.de/iti_dke/cear/source");
  CHECK(a.o.find("lit:d1") != std::string::npos);
  CHECK(a.o.find("int:1") != std::string::npos);
  CHECK(a.o.find("int:5") != std::string::npos);
  // the plain emitter never writes annotations
  CHECK(turtle_reader::parse(emit_turtle(kg)).annotations.empty());
}

TEST_CASE("stats reproduces a hand-computed table and is monotone") {
  Ontology onto = mini_ontology();
  Lexicon lex = norm_lexicon(onto);
  std::vector<VerdictRecord> records;
  // water-buffer x5, PBS-buffer x3, EGTA-buffers x1
  for (int i = 0; i < 5; ++i)
    records.push_back(confirmed("water", "buffer", "w", 1, 10 * i));
  for (int i = 0; i < 3; ++i)
    records.push_back(confirmed("PBS", "buffer", "p", 1, 10 * i));
  records.push_back(confirmed("EGTA", "buffers", "e", 1, 0));
  auto relations = aggregate(records, lex);

  KgStats table = stats(relations, {1, 2, 5, 10});
  CHECK(table.relations == std::vector<size_t>{3, 2, 1, 0});
  CHECK(table.positions == std::vector<size_t>{9, 8, 5, 0});
  CHECK(table.chem_chebi == std::vector<size_t>{2, 1, 1, 0});
  CHECK(table.chem_cear == std::vector<size_t>{1, 1, 0, 0});
  CHECK(table.role_chebi == std::vector<size_t>{1, 1, 1, 0});
  CHECK(table.role_cear == std::vector<size_t>{1, 0, 0, 0});

  const std::string rendered = stats_to_table(table);
  CHECK(rendered.find("number of relations") != std::string::npos);
  CHECK(rendered.find("minRef") != std::string::npos);
  nlohmann::json j = stats_to_json(table);
  CHECK(j.at("number_of_relations")[0] == 3);
}

TEST_CASE("rank_relations lists both ends with their sources") {
  Ontology onto = mini_ontology();
  Lexicon lex = norm_lexicon(onto);
  std::vector<VerdictRecord> records;
  for (int i = 0; i < 4; ++i)
    records.push_back(confirmed("water", "buffer", "w", 1, 10 * i));
  records.push_back(confirmed("PBS", "buffer", "p", 1, 0));
  auto relations = aggregate(records, lex);
  RelationRanking ranking = rank_relations(relations, 1);
  REQUIRE(ranking.most_frequent.size() == 1);
  CHECK(ranking.most_frequent[0].entity_label == "water");
  CHECK(ranking.most_frequent[0].entity_source == "ChEBI");
  CHECK(ranking.most_frequent[0].count == 4);
  REQUIRE(ranking.least_frequent.size() == 1);
  CHECK(ranking.least_frequent[0].entity_label == "PBS");
  CHECK(ranking.least_frequent[0].entity_source == "CEAR");
}

TEST_CASE("html export inlines nodes, edges and the color scheme") {
  Ontology onto = mini_ontology();
  Lexicon lex = norm_lexicon(onto);
  std::vector<VerdictRecord> records = {
      confirmed("water", "buffer", "d", 1, 0),
      confirmed("PBS", "buffers", "d", 1, 9)};
  KnowledgeGraph kg = apply_min_ref(aggregate(records, lex), 1);
  const std::string html = emit_html(kg);
  CHECK(html.find("#8B0000") != std::string::npos);  // ChEBI chemical
  CHECK(html.find("#F08080") != std::string::npos);  // CEAR chemical
  CHECK(html.find("#00008B") != std::string::npos);  // ChEBI role
  CHECK(html.find("#ADD8E6") != std::string::npos);  // CEAR role
  CHECK(html.find("\"count\":1") != std::string::npos);
  CHECK(html.find("http-equiv") == std::string::npos);
  CHECK(html.find("src=") == std::string::npos);  // no external resources
  CHECK(html.find("href=") == std::string::npos);
  // byte-stable across calls
  CHECK(emit_html(kg) == html);
}

TEST_CASE("random graphs re-parse to the same logical content") {
  testsupport::Rng rng(404);
  for (int iter = 0; iter < 30; ++iter) {
    KnowledgeGraph kg = testsupport::random_kg(rng);
    auto parsed = turtle_reader::parse(emit_turtle(kg));
    // one type and one label per ref, one relation triple per relation
    CHECK(parsed.triples.size() == 2 * kg.refs.size() + kg.relations.size());
    // every ref appearing in a relation has a label entry
    for (const Relation& rel : kg.relations) {
      CHECK(kg.find_label(rel.entity) != nullptr);
      CHECK(kg.find_label(rel.role) != nullptr);
    }
    // count-location consistency
    for (const Relation& rel : kg.relations) {
      CHECK(rel.count == rel.locations.size());
      for (size_t i = 1; i < rel.locations.size(); ++i)
        CHECK(rel.locations[i - 1] < rel.locations[i]);
    }
  }
}
