#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cear/annotate.hpp"
#include "cear/error.hpp"
#include "cear/lexicon.hpp"
#include "cear/validate.hpp"

namespace cear {

/// A graph node: either a ChEBI term or a CEAR-namespace entry for a surface
/// form unknown to the ontology.
struct EntityRef {
  enum class Source { Chebi, Cear };
  Source source = Source::Chebi;
  MentionKind kind = MentionKind::Chemical;
  std::string id;  // ChEBI CURIE ("CHEBI:35225") or CEAR local name ("chem_1")
  std::string display_label;

  // Emission order: ChEBI before CEAR, then by identifier.
  auto sort_key() const { return std::tuple(source == Source::Cear, id); }
  auto identity() const { return std::tuple(source, id); }
  friend bool operator<(const EntityRef& a, const EntityRef& b) {
    return a.sort_key() < b.sort_key();
  }
  friend bool operator==(const EntityRef& a, const EntityRef& b) {
    return a.identity() == b.identity();
  }
};

struct Relation {
  EntityRef entity;  // chemical side
  EntityRef role;
  std::vector<TextLocation> locations;  // unique, sorted
  size_t count = 0;                     // == locations.size()
};

struct KnowledgeGraph {
  std::vector<Relation> relations;
  size_t min_ref = 1;
  std::vector<EntityRef> refs;  // distinct refs of surviving relations, sorted

  const std::string* find_label(const EntityRef& ref) const {
    for (const EntityRef& r : refs)
      if (r == ref) return &r.display_label;
    return nullptr;
  }
};

/// normalize_term result before CEAR numbering: unknown terms are keyed by
/// their normalized surface, known ones by ChEBI id.
struct NormalizedTerm {
  EntityRef::Source source = EntityRef::Source::Chebi;
  MentionKind kind = MentionKind::Chemical;
  std::string chebi_id;    // set when source == Chebi
  std::string cear_key;    // normalized surface, set when source == Cear
  std::string display_label;

  std::string group_id() const {
    return source == EntityRef::Source::Chebi ? chebi_id : cear_key;
  }
};

/// Grounds a surface form against the ontology lexicon (built with
/// min_length 2): a key of matching kind resolves to its ChEBI term with the
/// term's primary label; anything else becomes a CEAR entry labeled by its
/// appearance in the text. Surfaces shorter than two scalars are refused.
inline NormalizedTerm normalize_term(const std::string& surface,
                                     const Lexicon& lexicon,
                                     MentionKind kind) {
  std::string key = normalize_surface(surface);
  if (scalar_count(key) < 2)
    throw Error(ErrorKind::TooShort, "surface \"" + surface + "\"");
  NormalizedTerm term;
  term.kind = kind;
  const LexiconEntry* entry = lexicon.lookup(key);
  if (entry && mention_kind_of(entry->kind) == kind) {
    term.source = EntityRef::Source::Chebi;
    term.chebi_id = entry->term_id;
    auto label = lexicon.primary_labels.find(entry->term_id);
    term.display_label =
        label != lexicon.primary_labels.end() ? label->second : key;
  } else {
    term.source = EntityRef::Source::Cear;
    term.cear_key = key;
    term.display_label = surface;
  }
  return term;
}

/// Stable CEAR numbering: keys sorted lexicographically get chem_1, chem_2,
/// ... (or role_n), so the mapping is independent of processing order.
inline std::map<std::string, std::string> assign_cear_ids(
    const std::set<std::string>& keys, MentionKind kind) {
  std::map<std::string, std::string> out;
  const char* prefix = kind == MentionKind::Chemical ? "chem_" : "role_";
  size_t n = 0;
  for (const std::string& key : keys)
    out.emplace(key, prefix + std::to_string(++n));
  return out;
}

/// Groups confirmed records into relations. Locations are deduplicated, CEAR
/// labels come from the first-seen text appearance in canonical record
/// order, and the result is sorted by (count desc, entity label, role
/// label): deterministic regardless of input order or worker count.
inline std::vector<Relation> aggregate(std::vector<VerdictRecord> records,
                                       const Lexicon& lexicon) {
  std::sort(records.begin(), records.end(),
            [](const VerdictRecord& a, const VerdictRecord& b) {
              return std::tie(a.pair.location, a.pair.chemical_surface,
                              a.pair.role_surface) <
                     std::tie(b.pair.location, b.pair.chemical_surface,
                              b.pair.role_surface);
            });

  struct Group {
    NormalizedTerm entity;
    NormalizedTerm role;
    std::set<TextLocation> locations;
  };
  // Key: (entity source, entity group id, role source, role group id).
  std::map<std::tuple<bool, std::string, bool, std::string>, Group> groups;

  for (const VerdictRecord& record : records) {
    NormalizedTerm entity, role;
    try {
      entity = normalize_term(record.pair.chemical_surface, lexicon,
                              MentionKind::Chemical);
      role =
          normalize_term(record.pair.role_surface, lexicon, MentionKind::Role);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::TooShort) continue;
      throw;
    }
    auto key = std::tuple(entity.source == EntityRef::Source::Cear,
                          entity.group_id(),
                          role.source == EntityRef::Source::Cear,
                          role.group_id());
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) {  // first-seen labels stick
      it->second.entity = entity;
      it->second.role = role;
    }
    it->second.locations.insert(record.pair.location);
  }

  // CEAR numbering over the final key sets.
  std::set<std::string> cear_chems, cear_roles;
  for (const auto& [key, group] : groups) {
    if (group.entity.source == EntityRef::Source::Cear)
      cear_chems.insert(group.entity.cear_key);
    if (group.role.source == EntityRef::Source::Cear)
      cear_roles.insert(group.role.cear_key);
  }
  const auto chem_ids = assign_cear_ids(cear_chems, MentionKind::Chemical);
  const auto role_ids = assign_cear_ids(cear_roles, MentionKind::Role);

  auto to_ref = [&](const NormalizedTerm& term) {
    EntityRef ref;
    ref.source = term.source;
    ref.kind = term.kind;
    ref.display_label = term.display_label;
    if (term.source == EntityRef::Source::Chebi) {
      ref.id = term.chebi_id;
    } else {
      const auto& ids =
          term.kind == MentionKind::Chemical ? chem_ids : role_ids;
      ref.id = ids.at(term.cear_key);
    }
    return ref;
  };

  std::vector<Relation> relations;
  relations.reserve(groups.size());
  for (const auto& [key, group] : groups) {
    Relation rel;
    rel.entity = to_ref(group.entity);
    rel.role = to_ref(group.role);
    rel.locations.assign(group.locations.begin(), group.locations.end());
    rel.count = rel.locations.size();
    relations.push_back(std::move(rel));
  }
  std::sort(relations.begin(), relations.end(),
            [](const Relation& a, const Relation& b) {
              if (a.count != b.count) return a.count > b.count;
              if (a.entity.display_label != b.entity.display_label)
                return a.entity.display_label < b.entity.display_label;
              if (a.role.display_label != b.role.display_label)
                return a.role.display_label < b.role.display_label;
              return std::tie(a.entity, a.role) < std::tie(b.entity, b.role);
            });
  return relations;
}

/// Keeps exactly the relations with count >= min_ref; the ref list (and so
/// the label map) is restricted to the survivors.
inline KnowledgeGraph apply_min_ref(const std::vector<Relation>& relations,
                                    size_t min_ref) {
  KnowledgeGraph kg;
  kg.min_ref = min_ref;
  for (const Relation& rel : relations)
    if (rel.count >= min_ref) kg.relations.push_back(rel);

  std::map<std::tuple<EntityRef::Source, std::string>, EntityRef> refs;
  for (const Relation& rel : kg.relations) {
    refs.emplace(rel.entity.identity(), rel.entity);
    refs.emplace(rel.role.identity(), rel.role);
  }
  for (const auto& [identity, ref] : refs) kg.refs.push_back(ref);
  std::sort(kg.refs.begin(), kg.refs.end());
  return kg;
}

/// The six rows of the minRef statistics table, one column per setting.
struct KgStats {
  std::vector<size_t> min_ref_values;
  std::vector<size_t> relations;
  std::vector<size_t> positions;  // sum of counts of surviving relations
  std::vector<size_t> chem_chebi;
  std::vector<size_t> chem_cear;
  std::vector<size_t> role_chebi;
  std::vector<size_t> role_cear;
};

inline KgStats stats(const std::vector<Relation>& relations,
                     const std::vector<size_t>& min_ref_values) {
  KgStats table;
  table.min_ref_values = min_ref_values;
  for (size_t min_ref : min_ref_values) {
    size_t n = 0, positions = 0;
    std::set<std::string> chem_chebi, chem_cear, role_chebi, role_cear;
    for (const Relation& rel : relations) {
      if (rel.count < min_ref) continue;
      ++n;
      positions += rel.count;
      (rel.entity.source == EntityRef::Source::Chebi ? chem_chebi : chem_cear)
          .insert(rel.entity.id);
      (rel.role.source == EntityRef::Source::Chebi ? role_chebi : role_cear)
          .insert(rel.role.id);
    }
    table.relations.push_back(n);
    table.positions.push_back(positions);
    table.chem_chebi.push_back(chem_chebi.size());
    table.chem_cear.push_back(chem_cear.size());
    table.role_chebi.push_back(role_chebi.size());
    table.role_cear.push_back(role_cear.size());
  }
  return table;
}

struct RelationRow {
  std::string entity_source;  // "ChEBI" or "CEAR"
  std::string entity_label;
  std::string role_source;
  std::string role_label;
  size_t count = 0;
};

struct RelationRanking {
  std::vector<RelationRow> most_frequent;
  std::vector<RelationRow> least_frequent;  // ascending count
};

inline RelationRanking rank_relations(const std::vector<Relation>& relations,
                                      size_t k) {
  auto row_of = [](const Relation& rel) {
    auto source_name = [](const EntityRef& ref) {
      return ref.source == EntityRef::Source::Chebi ? "ChEBI" : "CEAR";
    };
    return RelationRow{source_name(rel.entity), rel.entity.display_label,
                       source_name(rel.role), rel.role.display_label,
                       rel.count};
  };
  RelationRanking ranking;
  const size_t top = std::min(k, relations.size());
  for (size_t i = 0; i < top; ++i)
    ranking.most_frequent.push_back(row_of(relations[i]));
  const size_t bottom = std::min(k, relations.size());
  for (size_t i = 0; i < bottom; ++i)
    ranking.least_frequent.push_back(
        row_of(relations[relations.size() - 1 - i]));
  return ranking;
}

}  // namespace cear
