#pragma once

#include <algorithm>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cear/error.hpp"
#include "cear/sha256.hpp"
#include "cear/utf8.hpp"

namespace cear {

struct Page {
  int number = 0;
  std::string text;  // UTF-8; offsets into it count Unicode scalar values
};

struct Document {
  std::string checksum;  // 64-char lowercase hex, unique per store
  std::string source_name;
  std::vector<Page> pages;
  // Which bytes the checksum covers: the canonical page serialization or the
  // raw source file the pages were split from.
  enum class ChecksumOf { Pages, SourceBytes };
  ChecksumOf checksum_of = ChecksumOf::Pages;

  const Page* find_page(int number) const {
    for (const Page& p : pages)
      if (p.number == number) return &p;
    return nullptr;
  }
};

struct TextLocation {
  std::string doc_checksum;
  int page = 0;
  size_t offset = 0;  // scalar position of the sentence start in the page

  friend auto operator<=>(const TextLocation&, const TextLocation&) = default;
};

struct Sentence {
  TextLocation location;
  std::string text;
};

/// SHA-256 digest of a byte sequence, 64 lowercase hex characters.
inline std::string compute_checksum(std::string_view bytes) {
  return sha256_hex(bytes);
}

/// Canonical identity of already-extracted pages: the digest of the page
/// texts joined with a single form feed, the page separator pdftotext emits.
inline std::string canonical_page_checksum(const std::vector<Page>& pages) {
  Sha256 h;
  bool first = true;
  for (const Page& p : pages) {
    if (!first) h.update("\f", 1);
    first = false;
    h.update(p.text);
  }
  return to_hex(h.digest());
}

inline void validate_pages(const std::vector<Page>& pages) {
  if (pages.empty())
    throw Error(ErrorKind::EmptyDocument, "document has no pages");
  bool any_text = false;
  int previous = 0;
  for (const Page& p : pages) {
    if (p.number < 1 || p.number <= previous)
      throw Error(ErrorKind::NonMonotonicPages,
                  "page numbers must be strictly increasing from 1, got " +
                      std::to_string(p.number) + " after " +
                      std::to_string(previous));
    previous = p.number;
    if (p.text.find('\0') != std::string::npos)
      throw Error(ErrorKind::InvalidText, "page " + std::to_string(p.number) +
                                              " contains a NUL character");
    if (!p.text.empty()) any_text = true;
  }
  if (pages.front().number != 1)
    throw Error(ErrorKind::NonMonotonicPages, "page numbering must start at 1");
  if (!any_text)
    throw Error(ErrorKind::EmptyDocument, "all pages are empty");
}

struct IngestResult {
  enum class Status { Added, Duplicate };
  Status status = Status::Added;
  std::string checksum;

  bool added() const { return status == Status::Added; }
};

/// Immutable documents keyed by checksum. Inserts are serialized so the
/// duplicate check and the insert are atomic per checksum; lookups hand out
/// stable pointers (std::map nodes do not move).
class DocumentStore {
 public:
  DocumentStore() = default;
  // Moves transfer the documents only; they are not thread-safe and belong
  // to setup code, before the store is shared.
  DocumentStore(DocumentStore&& other) noexcept
      : docs_(std::move(other.docs_)) {}
  DocumentStore& operator=(DocumentStore&& other) noexcept {
    docs_ = std::move(other.docs_);
    return *this;
  }

  IngestResult ingest(std::vector<Page> pages, std::string source_name) {
    validate_pages(pages);
    Document doc;
    doc.checksum = canonical_page_checksum(pages);
    doc.source_name = std::move(source_name);
    doc.pages = std::move(pages);
    doc.checksum_of = Document::ChecksumOf::Pages;
    return insert(std::move(doc));
  }

  /// Raw-source path: the checksum covers the file bytes; pages are the
  /// form-feed-separated segments of the text.
  IngestResult ingest_raw(std::string_view bytes, std::string source_name) {
    Document doc;
    doc.checksum = compute_checksum(bytes);
    doc.source_name = std::move(source_name);
    doc.checksum_of = Document::ChecksumOf::SourceBytes;
    int number = 1;
    size_t pos = 0;
    while (true) {
      size_t ff = bytes.find('\f', pos);
      std::string_view segment = (ff == std::string_view::npos)
                                     ? bytes.substr(pos)
                                     : bytes.substr(pos, ff - pos);
      doc.pages.push_back(Page{number++, std::string(segment)});
      if (ff == std::string_view::npos) break;
      pos = ff + 1;
    }
    while (doc.pages.size() > 1 && doc.pages.back().text.empty())
      doc.pages.pop_back();  // pdftotext leaves a trailing form feed
    validate_pages(doc.pages);
    return insert(std::move(doc));
  }

  /// Inserts a document whose checksum is already set (e.g. loaded from a
  /// document file). Returns Duplicate and leaves the store unchanged when
  /// the checksum is present.
  IngestResult insert(Document doc) {
    std::lock_guard<std::mutex> lock(mu_);
    std::string checksum = doc.checksum;
    auto [it, inserted] = docs_.try_emplace(checksum, std::move(doc));
    (void)it;
    return IngestResult{inserted ? IngestResult::Status::Added
                                 : IngestResult::Status::Duplicate,
                        std::move(checksum)};
  }

  const Document* find(const std::string& checksum) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = docs_.find(checksum);
    return it == docs_.end() ? nullptr : &it->second;
  }

  size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return docs_.size();
  }

  /// Checksums in sorted order; iteration everywhere goes through this so
  /// downstream output is independent of insertion order.
  std::vector<std::string> checksums() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::vector<std::string> out;
    out.reserve(docs_.size());
    for (const auto& [checksum, doc] : docs_) out.push_back(checksum);
    return out;
  }

 private:
  mutable std::mutex mu_;
  std::map<std::string, Document> docs_;
};

// ---------------------------------------------------------------------------
// Sentence segmentation.
//
// Boundary rule: '.', '!' or '?' followed by at least one whitespace scalar
// and then an uppercase letter or digit ends a sentence, unless the text up
// to the terminator ends with a guarded abbreviation. A whitespace run
// containing two or more newlines always forces a boundary. Single newlines
// behave like spaces.

inline const std::vector<std::string>& default_abbreviations() {
  static const std::vector<std::string> abbreviations = {
      "approx.", "e.g.", "i.e.", "et al.", "Fig.", "vs."};
  return abbreviations;
}

class SentenceSplitter {
 public:
  explicit SentenceSplitter(
      std::vector<std::string> abbreviations = default_abbreviations()) {
    for (const std::string& a : abbreviations)
      guards_.push_back(normalize_scalars(decode_utf8(a)));
  }

  std::vector<Sentence> split(const Page& page,
                              const std::string& doc_checksum) const {
    std::vector<Sentence> out;
    const std::u32string cps = decode_utf8(page.text);
    const size_t n = cps.size();
    size_t i = 0;
    while (i < n) {
      while (i < n && is_space_scalar(cps[i])) ++i;
      if (i >= n) break;
      const size_t start = i;
      size_t end = n;  // exclusive; set when a boundary fires
      size_t j = start;
      while (j < n) {
        char32_t c = cps[j];
        if (c == U'.' || c == U'!' || c == U'?') {
          size_t k = j + 1;
          while (k < n && is_space_scalar(cps[k])) ++k;
          bool followed_by_space = k > j + 1;
          if (followed_by_space && k < n &&
              (is_upper_scalar(cps[k]) || is_ascii_digit(cps[k])) &&
              !(c == U'.' && guarded(cps, start, j))) {
            end = j + 1;
            i = j + 1;
            break;
          }
          ++j;
        } else if (is_space_scalar(c)) {
          size_t k = j;
          int newlines = 0;
          while (k < n && is_space_scalar(cps[k])) {
            if (cps[k] == U'\n') ++newlines;
            ++k;
          }
          if (newlines >= 2 || k >= n) {
            end = j;
            i = k;
            break;
          }
          j = k;
        } else {
          ++j;
        }
      }
      if (j >= n) {
        end = n;
        i = n;
      }
      if (end > start) {
        Sentence s;
        s.location = TextLocation{doc_checksum, page.number, start};
        s.text = slice_scalars(cps, start, end);
        out.push_back(std::move(s));
      }
    }
    return out;
  }

 private:
  // True when the sentence text ending at the terminator (inclusive) ends
  // with a guard abbreviation standing on its own token.
  bool guarded(const std::u32string& cps, size_t start, size_t dot) const {
    for (const std::u32string& g : guards_) {
      if (g.empty() || dot + 1 < start + g.size()) continue;
      size_t g_start = dot + 1 - g.size();
      if (g_start < start) continue;
      bool match = true;
      for (size_t k = 0; k < g.size(); ++k) {
        if (fold_scalar(cps[g_start + k]) != g[k]) {
          match = false;
          break;
        }
      }
      if (!match) continue;
      if (g_start == start || !is_word_scalar(cps[g_start - 1])) return true;
    }
    return false;
  }

  std::vector<std::u32string> guards_;
};

inline std::vector<Sentence> segment_sentences(const Page& page,
                                               const std::string& doc_checksum) {
  static const SentenceSplitter splitter;
  return splitter.split(page, doc_checksum);
}

}  // namespace cear
