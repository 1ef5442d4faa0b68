#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "cear/document.hpp"
#include "cear/error.hpp"
#include "cear/lexicon.hpp"
#include "cear/utf8.hpp"

namespace cear {

enum class MentionKind { Chemical, Role };

inline const char* to_string(MentionKind kind) {
  return kind == MentionKind::Chemical ? "chemical" : "role";
}

inline MentionKind mention_kind_of(TermKind kind) {
  return kind == TermKind::Role ? MentionKind::Role : MentionKind::Chemical;
}

enum class Provenance { Gazetteer, External, Gold };

inline const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::Gazetteer: return "gazetteer";
    case Provenance::External: return "external";
    case Provenance::Gold: return "gold";
  }
  return "?";
}

struct Mention {
  TextLocation location;  // span start
  size_t end = 0;         // exclusive scalar position on the same page
  MentionKind kind = MentionKind::Chemical;
  std::string surface;
  Provenance provenance = Provenance::Gazetteer;

  size_t start() const { return location.offset; }
  size_t length() const { return end - location.offset; }

  auto sort_key() const {
    return std::tie(location.doc_checksum, location.page, location.offset, end,
                    kind, surface, provenance);
  }
  friend bool operator<(const Mention& a, const Mention& b) {
    return a.sort_key() < b.sort_key();
  }
  friend bool operator==(const Mention& a, const Mention& b) {
    return a.sort_key() == b.sort_key();
  }
};

struct AnnotatedDocument {
  std::string doc_checksum;
  std::vector<Mention> mentions;  // sorted by (page, offset, end)
};

/// Dictionary annotation of one sentence: leftmost-longest, non-overlapping
/// matches of lexicon keys against the case-folded text, restricted to token
/// boundaries. Offsets refer to the original text.
inline std::vector<Mention> gazetteer_annotate(const Sentence& sentence,
                                               const Lexicon& lexicon) {
  std::vector<Mention> out;
  const std::u32string cps = decode_utf8(sentence.text);
  std::u32string folded(cps);
  for (char32_t& cp : folded)
    cp = is_space_scalar(cp) ? U' ' : fold_scalar(cp);

  std::vector<AhoCorasick::Match> hits;
  lexicon.matcher().scan(folded, [&](const AhoCorasick::Match& m) {
    bool left_ok = m.start == 0 || !is_word_scalar(cps[m.start - 1]);
    bool right_ok = m.end == cps.size() || !is_word_scalar(cps[m.end]);
    if (left_ok && right_ok) hits.push_back(m);
  });
  std::sort(hits.begin(), hits.end(),
            [](const AhoCorasick::Match& a, const AhoCorasick::Match& b) {
              if (a.start != b.start) return a.start < b.start;
              if (a.end != b.end) return a.end > b.end;  // longest first
              return a.pattern < b.pattern;
            });
  size_t taken_end = 0;
  bool any = false;
  for (const AhoCorasick::Match& m : hits) {
    if (any && m.start < taken_end) continue;
    const LexiconEntry& entry = lexicon.entry_for_pattern(m.pattern);
    Mention mention;
    mention.location = sentence.location;
    mention.location.offset = sentence.location.offset + m.start;
    mention.end = sentence.location.offset + m.end;
    mention.kind = mention_kind_of(entry.kind);
    mention.surface = slice_scalars(cps, m.start, m.end);
    mention.provenance = Provenance::Gazetteer;
    out.push_back(std::move(mention));
    taken_end = m.end;
    any = true;
  }
  return out;
}

/// Checks a mention against the store: the document exists, the span is in
/// range, and the declared surface equals the actual text slice.
inline void validate_mention(const Mention& mention,
                             const DocumentStore& store) {
  const Document* doc = store.find(mention.location.doc_checksum);
  if (!doc)
    throw Error(ErrorKind::UnknownDocument, mention.location.doc_checksum);
  const Page* page = doc->find_page(mention.location.page);
  if (!page)
    throw Error(ErrorKind::SpanOutOfRange,
                "no page " + std::to_string(mention.location.page) + " in " +
                    mention.location.doc_checksum);
  const std::u32string cps = decode_utf8(page->text);
  if (mention.end <= mention.location.offset || mention.end > cps.size())
    throw Error(ErrorKind::SpanOutOfRange,
                "span [" + std::to_string(mention.location.offset) + "," +
                    std::to_string(mention.end) + ") on page of length " +
                    std::to_string(cps.size()));
  std::string actual =
      slice_scalars(cps, mention.location.offset, mention.end);
  if (actual != mention.surface)
    throw Error(ErrorKind::SurfaceMismatch,
                "declared \"" + mention.surface + "\" but text reads \"" +
                    actual + "\"");
}

namespace detail {

inline int provenance_rank(Provenance p) {
  switch (p) {
    case Provenance::Gold: return 2;
    case Provenance::External: return 1;
    case Provenance::Gazetteer: return 0;
  }
  return 0;
}

}  // namespace detail

/// Union of two individually non-overlapping mention lists. Overlaps are
/// resolved by: longer span wins; equal length, External beats Gazetteer
/// (Gold beats both); still tied, earlier start wins. Symmetric in its
/// arguments and the result is non-overlapping and sorted.
inline std::vector<Mention> merge_annotations(const std::vector<Mention>& a,
                                              const std::vector<Mention>& b) {
  std::vector<Mention> all;
  all.reserve(a.size() + b.size());
  all.insert(all.end(), a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end(), [](const Mention& x, const Mention& y) {
    if (x.length() != y.length()) return x.length() > y.length();
    int rx = detail::provenance_rank(x.provenance);
    int ry = detail::provenance_rank(y.provenance);
    if (rx != ry) return rx > ry;
    return x.sort_key() < y.sort_key();
  });

  // Accepted spans per (doc, page), keyed by start.
  std::map<std::pair<std::string, int>, std::map<size_t, size_t>> taken;
  std::vector<Mention> out;
  for (const Mention& m : all) {
    auto& spans = taken[{m.location.doc_checksum, m.location.page}];
    auto after = spans.lower_bound(m.location.offset);
    bool overlaps = false;
    if (after != spans.end() && after->first < m.end) overlaps = true;
    if (after != spans.begin()) {
      auto before = std::prev(after);
      if (before->second > m.location.offset) overlaps = true;
    }
    if (overlaps) continue;
    spans.emplace(m.location.offset, m.end);
    out.push_back(m);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace cear
