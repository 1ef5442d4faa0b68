#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cear/kg.hpp"

namespace cear {

inline constexpr std::string_view kTurtlePrefixes =
    "@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n"
    "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
    "@prefix obo: <http://purl.obolibrary.org/obo/> .\n"
    "@prefix cear: <https://wwwiti.cs.uni-magdeburg.de/iti_dke/cear/> .\n";

inline constexpr std::string_view kHasRole = "obo:RO_0000087";
inline constexpr std::string_view kChemicalEntityClass = "obo:CHEBI_24431";
inline constexpr std::string_view kRoleClass = "obo:CHEBI_50906";

inline std::string turtle_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

/// obo:CHEBI_35225 for ontology terms (colon becomes underscore),
/// cear:chem_1 for terms unknown to the ontology.
inline std::string ref_to_turtle(const EntityRef& ref) {
  if (ref.source == EntityRef::Source::Chebi) {
    std::string local = ref.id;
    for (char& c : local)
      if (c == ':') c = '_';
    return "obo:" + local;
  }
  return "cear:" + ref.id;
}

namespace detail {

struct TurtleOptions {
  bool with_locations = false;  // RDF-star source annotations
};

inline std::string emit(const KnowledgeGraph& kg, const TurtleOptions& opts) {
  std::string out(kTurtlePrefixes);

  // Relations grouped under their chemical subject, role side sorted.
  std::map<std::tuple<EntityRef::Source, std::string>,
           std::vector<const Relation*>>
      by_entity;
  for (const Relation& rel : kg.relations)
    by_entity[rel.entity.identity()].push_back(&rel);
  for (auto& [identity, rels] : by_entity)
    std::sort(rels.begin(), rels.end(), [](const Relation* a,
                                           const Relation* b) {
      return a->role.sort_key() < b->role.sort_key();
    });

  for (const EntityRef& ref : kg.refs) {
    out += '\n';
    const std::string subject = ref_to_turtle(ref);
    const std::string_view type_of = ref.kind == MentionKind::Chemical
                                         ? kChemicalEntityClass
                                         : kRoleClass;
    out += subject + " rdf:type " + std::string(type_of) + " .\n";
    out += subject + " rdfs:label \"" + turtle_escape(ref.display_label) +
           "\" .\n";
    auto rels = by_entity.find(ref.identity());
    if (rels == by_entity.end() || ref.kind != MentionKind::Chemical) continue;
    for (const Relation* rel : rels->second) {
      const std::string triple = subject + " " + std::string(kHasRole) + " " +
                                 ref_to_turtle(rel->role);
      out += triple + " .\n";
      if (opts.with_locations) {
        for (const TextLocation& loc : rel->locations) {
          out += "<< " + triple + " >> cear:source [ cear:doc \"" +
                 turtle_escape(loc.doc_checksum) + "\" ; cear:page " +
                 std::to_string(loc.page) + " ; cear:offset " +
                 std::to_string(loc.offset) + " ] .\n";
        }
      }
    }
  }
  return out;
}

}  // namespace detail

/// Turtle serialization: the four prefix lines, one rdf:type and one
/// rdfs:label triple per distinct ref, one has-role triple per relation.
/// One triple per line with the subject repeated, so output is byte-stable.
inline std::string emit_turtle(const KnowledgeGraph& kg) {
  return detail::emit(kg, detail::TurtleOptions{false});
}

/// Same graph plus an RDF-star annotation per supporting text location.
inline std::string emit_rdf_star(const KnowledgeGraph& kg) {
  return detail::emit(kg, detail::TurtleOptions{true});
}

}  // namespace cear
