#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cear/aho_corasick.hpp"
#include "cear/obo.hpp"
#include "cear/utf8.hpp"

namespace cear {

enum class SurfaceKind { Label, Synonym };

struct LexiconEntry {
  std::string key;  // normalized surface form
  std::string term_id;
  TermKind kind;  // Chemical or Role
  SurfaceKind surface_kind = SurfaceKind::Label;
};

/// Surface-form dictionary compiled into a multi-pattern matcher. Keys are
/// normalized (trimmed, whitespace-collapsed, case-folded); each key maps to
/// exactly one term. Homonyms across terms are excluded with a diagnostic
/// instead of guessing.
class Lexicon {
 public:
  size_t min_length = 1;
  std::map<std::string, LexiconEntry> entries;        // key -> entry
  std::map<std::string, std::string> primary_labels;  // term id -> label
  std::vector<Diagnostic> diagnostics;

  const LexiconEntry* lookup(const std::string& normalized_key) const {
    auto it = entries.find(normalized_key);
    return it == entries.end() ? nullptr : &it->second;
  }

  const AhoCorasick& matcher() const { return matcher_; }

  const LexiconEntry& entry_for_pattern(uint32_t pattern) const {
    return by_pattern_[pattern];
  }

  /// Builds the automaton over exactly the entry keys. Entries are iterated
  /// in key order, so pattern ids are reproducible.
  void compile() {
    matcher_ = AhoCorasick{};
    by_pattern_.clear();
    by_pattern_.reserve(entries.size());
    for (const auto& [key, entry] : entries) {
      matcher_.add_pattern(decode_utf8(key));
      by_pattern_.push_back(entry);
    }
    matcher_.build();
  }

 private:
  AhoCorasick matcher_;
  std::vector<LexiconEntry> by_pattern_;
};

/// Collects the normalized label and synonyms of every non-obsolete,
/// non-Conflict term whose kind is in `include`. Surfaces shorter than
/// min_length (in scalar values, before or after normalization) are skipped;
/// this is the paper's length threshold against homonym mislabeling.
inline Lexicon build_lexicon(const Ontology& onto,
                             const std::map<std::string, TermKind>& kinds,
                             const std::set<TermKind>& include,
                             size_t min_length) {
  Lexicon lex;
  lex.min_length = min_length;

  struct Candidate {
    std::string term_id;
    TermKind kind;
    SurfaceKind surface_kind;
  };
  std::map<std::string, std::vector<Candidate>> candidates;

  for (const auto& [id, term] : onto.terms) {
    if (term.obsolete) continue;
    auto kind_it = kinds.find(id);
    TermKind kind = kind_it == kinds.end() ? TermKind::Neither : kind_it->second;
    if (kind == TermKind::Conflict) {
      lex.diagnostics.push_back(
          Diagnostic{id, "conflict_term", "reachable from both roots"});
      continue;
    }
    if (!include.count(kind)) continue;

    auto consider = [&](const std::string& raw, SurfaceKind surface_kind) {
      if (scalar_count(raw) < min_length) return;
      std::string key = normalize_surface(raw);
      if (key.empty() || scalar_count(key) < min_length) return;
      candidates[key].push_back(Candidate{id, kind, surface_kind});
    };
    consider(term.label, SurfaceKind::Label);
    for (const std::string& synonym : term.synonyms)
      consider(synonym, SurfaceKind::Synonym);
    lex.primary_labels[id] = term.label;
  }

  for (auto& [key, list] : candidates) {
    std::set<std::string> ids;
    for (const Candidate& c : list) ids.insert(c.term_id);
    if (ids.size() > 1) {
      std::string detail = "key \"" + key + "\" shared by";
      for (const std::string& id : ids) detail += " " + id;
      lex.diagnostics.push_back(
          Diagnostic{*ids.begin(), "ambiguous_surface_form", detail});
      continue;
    }
    // A label colliding with a synonym of the same term keeps one entry,
    // preferring Label.
    const Candidate* chosen = &list.front();
    for (const Candidate& c : list)
      if (c.surface_kind == SurfaceKind::Label) {
        chosen = &c;
        break;
      }
    lex.entries.emplace(
        key, LexiconEntry{key, chosen->term_id, chosen->kind,
                          chosen->surface_kind});
  }

  std::sort(lex.diagnostics.begin(), lex.diagnostics.end());
  lex.compile();
  return lex;
}

}  // namespace cear
