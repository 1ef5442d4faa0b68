#pragma once

#include <algorithm>
#include <deque>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cear/error.hpp"

namespace cear {

struct OntologyTerm {
  std::string id;  // CURIE, e.g. "CHEBI:35225"
  std::string label;
  std::vector<std::string> synonyms;
  std::vector<std::string> parents;  // is_a targets
  bool obsolete = false;
};

struct Diagnostic {
  std::string term_id;  // primary term, sort key
  std::string code;     // e.g. "dangling_is_a", "ambiguous_surface_form"
  std::string detail;

  friend auto operator<=>(const Diagnostic&, const Diagnostic&) = default;
};

enum class TermKind { Chemical, Role, Neither, Conflict };

inline const char* to_string(TermKind kind) {
  switch (kind) {
    case TermKind::Chemical: return "chemical";
    case TermKind::Role: return "role";
    case TermKind::Neither: return "neither";
    case TermKind::Conflict: return "conflict";
  }
  return "?";
}

struct Ontology {
  std::map<std::string, OntologyTerm> terms;
  std::string role_root = "CHEBI:50906";
  std::string entity_root = "CHEBI:24431";
  std::vector<Diagnostic> diagnostics;  // sorted by (code, term_id, detail)

  const OntologyTerm* find(const std::string& id) const {
    auto it = terms.find(id);
    return it == terms.end() ? nullptr : &it->second;
  }
};

namespace detail {

inline std::string_view trim_view(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r'))
    --e;
  return s.substr(b, e - b);
}

// Cuts an unescaped "!" trailer and resolves OBO escapes.
inline std::string strip_obo_comment(std::string_view value) {
  std::string out;
  out.reserve(value.size());
  for (size_t i = 0; i < value.size(); ++i) {
    char c = value[i];
    if (c == '\\' && i + 1 < value.size()) {
      out.push_back(value[++i]);
      continue;
    }
    if (c == '!') break;
    out.push_back(c);
  }
  return std::string(trim_view(out));
}

// First quoted string of a synonym line, with escape handling. Returns false
// when the line has no quoted text.
inline bool parse_quoted(std::string_view value, std::string& out) {
  size_t open = value.find('"');
  if (open == std::string_view::npos) return false;
  out.clear();
  for (size_t i = open + 1; i < value.size(); ++i) {
    char c = value[i];
    if (c == '\\' && i + 1 < value.size()) {
      out.push_back(value[++i]);
      continue;
    }
    if (c == '"') return true;
    out.push_back(c);
  }
  return false;  // unterminated
}

}  // namespace detail

/// Parses the `[Term]` stanzas of an OBO 1.2 flat file. Interprets id, name,
/// synonym, is_a and is_obsolete; every other tag is ignored. Obsolete terms
/// are retained and flagged. is_a targets that never appear as a term id are
/// kept and reported as dangling-reference diagnostics.
inline Ontology parse_obo(std::istream& in) {
  Ontology onto;
  std::string line;
  size_t line_no = 0;
  bool in_term = false;
  size_t stanza_line = 0;
  OntologyTerm current;

  auto finish_term = [&]() {
    if (!in_term) return;
    in_term = false;
    if (current.id.empty())
      throw Error(ErrorKind::MalformedStanza,
                  "term stanza at line " + std::to_string(stanza_line) +
                      " has no id");
    if (current.label.empty() && !current.obsolete)
      throw Error(ErrorKind::MalformedStanza,
                  "term " + current.id + " at line " +
                      std::to_string(stanza_line) + " has no name");
    auto [it, inserted] = onto.terms.try_emplace(current.id, current);
    (void)it;
    if (!inserted)
      throw Error(ErrorKind::MalformedStanza,
                  "duplicate term id " + current.id + " at line " +
                      std::to_string(stanza_line));
    current = OntologyTerm{};
  };

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = detail::trim_view(line);
    if (s.empty()) continue;
    if (s.front() == '!') continue;
    if (s.front() == '[') {
      finish_term();
      if (s == "[Term]") {
        in_term = true;
        stanza_line = line_no;
        current = OntologyTerm{};
      }
      continue;
    }
    if (!in_term) continue;  // header block or non-Term stanza
    size_t colon = s.find(':');
    if (colon == std::string_view::npos)
      throw Error(ErrorKind::MalformedStanza,
                  "line " + std::to_string(line_no) + ": expected tag: value");
    std::string_view tag = detail::trim_view(s.substr(0, colon));
    std::string_view value = detail::trim_view(s.substr(colon + 1));
    if (tag == "id") {
      current.id = detail::strip_obo_comment(value);
      if (current.id.empty())
        throw Error(ErrorKind::MalformedStanza,
                    "line " + std::to_string(line_no) + ": empty id");
    } else if (tag == "name") {
      current.label = detail::strip_obo_comment(value);
    } else if (tag == "synonym") {
      std::string text;
      if (!detail::parse_quoted(value, text))
        throw Error(ErrorKind::MalformedStanza,
                    "line " + std::to_string(line_no) +
                        ": synonym without quoted text");
      current.synonyms.push_back(std::move(text));
    } else if (tag == "is_a") {
      std::string target = detail::strip_obo_comment(value);
      size_t ws = target.find_first_of(" \t");
      if (ws != std::string::npos) target.resize(ws);
      if (target.empty())
        throw Error(ErrorKind::MalformedStanza,
                    "line " + std::to_string(line_no) + ": empty is_a target");
      current.parents.push_back(std::move(target));
    } else if (tag == "is_obsolete") {
      current.obsolete = (detail::strip_obo_comment(value) == "true");
    }
    // other tags ignored
  }
  finish_term();

  for (const auto& [id, term] : onto.terms)
    for (const std::string& parent : term.parents)
      if (!onto.terms.count(parent))
        onto.diagnostics.push_back(Diagnostic{id, "dangling_is_a", parent});
  std::sort(onto.diagnostics.begin(), onto.diagnostics.end());

  // Cycle check over resolved edges only.
  {
    enum : uint8_t { White, Grey, Black };
    std::unordered_map<std::string, uint8_t> color;
    color.reserve(onto.terms.size());
    std::vector<std::string> path;
    for (const auto& [start, term0] : onto.terms) {
      (void)term0;
      if (color[start] != White) continue;
      // Iterative DFS keeping the active path for the error message.
      struct Frame {
        const std::string* id;
        size_t next_parent;
      };
      std::vector<Frame> stack{{&start, 0}};
      color[start] = Grey;
      path.push_back(start);
      while (!stack.empty()) {
        Frame& top = stack.back();
        const OntologyTerm& term = onto.terms.at(*top.id);
        bool descended = false;
        while (top.next_parent < term.parents.size()) {
          const std::string& parent = term.parents[top.next_parent++];
          auto it = onto.terms.find(parent);
          if (it == onto.terms.end()) continue;  // dangling, not an edge
          uint8_t& c = color[parent];
          if (c == Grey) {
            auto cycle_begin =
                std::find(path.begin(), path.end(), parent);
            std::string msg = "is_a cycle: ";
            for (auto p = cycle_begin; p != path.end(); ++p)
              msg += *p + " -> ";
            msg += parent;
            throw Error(ErrorKind::CyclicIsA, msg);
          }
          if (c == White) {
            c = Grey;
            path.push_back(parent);
            stack.push_back(Frame{&it->first, 0});
            descended = true;
            break;
          }
        }
        if (!descended) {
          color[*top.id] = Black;
          path.pop_back();
          stack.pop_back();
        }
      }
    }
  }
  return onto;
}

/// Classifies every term by reflexive-transitive is_a reachability of the two
/// roots. Reachability follows the declared parent ids, so a root referenced
/// only as a dangling target still anchors its branch. Obsolete terms are
/// Neither regardless of ancestry.
inline std::map<std::string, TermKind> classify(const Ontology& onto) {
  // Reverse edges: root -> descendants.
  std::unordered_map<std::string, std::vector<const std::string*>> children;
  children.reserve(onto.terms.size() * 2);
  for (const auto& [id, term] : onto.terms)
    for (const std::string& parent : term.parents)
      children[parent].push_back(&id);

  auto reach_down = [&](const std::string& root) {
    std::unordered_set<std::string> seen;
    std::deque<const std::string*> queue;
    seen.insert(root);
    queue.push_back(&root);
    while (!queue.empty()) {
      const std::string* node = queue.front();
      queue.pop_front();
      auto it = children.find(*node);
      if (it == children.end()) continue;
      for (const std::string* child : it->second)
        if (seen.insert(*child).second) queue.push_back(child);
    }
    return seen;
  };

  const auto role_reach = reach_down(onto.role_root);
  const auto entity_reach = reach_down(onto.entity_root);

  std::map<std::string, TermKind> kinds;
  for (const auto& [id, term] : onto.terms) {
    if (term.obsolete) {
      kinds[id] = TermKind::Neither;
      continue;
    }
    bool role = role_reach.count(id) > 0;
    bool chem = entity_reach.count(id) > 0;
    kinds[id] = role && chem ? TermKind::Conflict
                : role       ? TermKind::Role
                : chem       ? TermKind::Chemical
                             : TermKind::Neither;
  }
  return kinds;
}

}  // namespace cear
