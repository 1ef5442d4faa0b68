#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "cear/annotate.hpp"
#include "cear/document.hpp"
#include "cear/error.hpp"
#include "cear/utf8.hpp"

namespace cear {

struct CandidateSentence {
  Sentence sentence;
  std::vector<Mention> chemicals;
  std::vector<Mention> roles;
};

struct CandidatePair {
  TextLocation location;  // sentence location
  std::string sentence_text;
  std::string chemical_surface;
  std::string role_surface;
};

/// Sentences holding at least one chemical and one role mention, in document
/// order. A mention is assigned to the sentence containing its start.
inline std::vector<CandidateSentence> extract_candidates(
    const AnnotatedDocument& ann, const DocumentStore& store,
    const SentenceSplitter& splitter = SentenceSplitter()) {
  const Document* doc = store.find(ann.doc_checksum);
  if (!doc) throw Error(ErrorKind::UnknownDocument, ann.doc_checksum);

  std::vector<CandidateSentence> out;
  for (const Page& page : doc->pages) {
    std::vector<Sentence> sentences = splitter.split(page, ann.doc_checksum);
    if (sentences.empty()) continue;
    std::vector<CandidateSentence> per_sentence(sentences.size());
    for (size_t i = 0; i < sentences.size(); ++i)
      per_sentence[i].sentence = sentences[i];

    for (const Mention& m : ann.mentions) {
      if (m.location.page != page.number) continue;
      // Last sentence starting at or before the mention start.
      size_t lo = 0, hi = sentences.size();
      while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        if (sentences[mid].location.offset <= m.location.offset)
          lo = mid + 1;
        else
          hi = mid;
      }
      if (lo == 0) continue;
      const Sentence& s = sentences[lo - 1];
      if (m.location.offset >= s.location.offset + scalar_count(s.text))
        continue;  // starts in an inter-sentence gap
      if (m.kind == MentionKind::Chemical)
        per_sentence[lo - 1].chemicals.push_back(m);
      else
        per_sentence[lo - 1].roles.push_back(m);
    }
    for (CandidateSentence& c : per_sentence)
      if (!c.chemicals.empty() && !c.roles.empty()) out.push_back(std::move(c));
  }
  return out;
}

/// All combinations of the distinct chemical and role surfaces of one
/// candidate sentence. Distinctness uses the normalized surface form, so the
/// same string is validated once per sentence; ordering follows text order.
inline std::vector<CandidatePair> enumerate_pairs(const CandidateSentence& c) {
  auto distinct_in_text_order = [](const std::vector<Mention>& mentions) {
    std::vector<Mention> sorted(mentions);
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::string> surfaces;
    std::set<std::string> seen;
    for (const Mention& m : sorted)
      if (seen.insert(normalize_surface(m.surface)).second)
        surfaces.push_back(m.surface);
    return surfaces;
  };

  std::vector<std::string> chems = distinct_in_text_order(c.chemicals);
  std::vector<std::string> roles = distinct_in_text_order(c.roles);

  std::vector<CandidatePair> out;
  out.reserve(chems.size() * roles.size());
  for (const std::string& chem : chems)
    for (const std::string& role : roles)
      out.push_back(CandidatePair{c.sentence.location, c.sentence.text, chem,
                                  role});
  return out;
}

}  // namespace cear
