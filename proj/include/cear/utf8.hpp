#pragma once

#include <cstdint>
#include <string>
#include <string_view>

// Text positions throughout the pipeline count Unicode scalar values, not
// bytes. Everything that touches offsets goes through the helpers here so
// the counting rule is fixed in exactly one place.

namespace cear {

inline bool is_utf8_continuation(unsigned char b) { return (b & 0xC0) == 0x80; }

/// Decodes UTF-8 into scalar values. Invalid bytes decode to U+FFFD, one
/// replacement per bad byte, so positions stay deterministic on dirty input.
inline std::u32string decode_utf8(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  size_t i = 0;
  const size_t n = bytes.size();
  while (i < n) {
    unsigned char b0 = static_cast<unsigned char>(bytes[i]);
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    if (i + len > n) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k < len; ++k) {
      unsigned char bk = static_cast<unsigned char>(bytes[i + k]);
      if (!is_utf8_continuation(bk)) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (bk & 0x3F);
    }
    if (!ok || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF) ||
        (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
        (len == 4 && cp < 0x10000)) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode_utf8(std::u32string_view scalars) {
  std::string out;
  out.reserve(scalars.size());
  for (char32_t cp : scalars) append_utf8(out, cp);
  return out;
}

/// Number of Unicode scalar values in a UTF-8 string.
inline size_t scalar_count(std::string_view bytes) {
  size_t count = 0;
  for (size_t i = 0; i < bytes.size();) {
    unsigned char b = static_cast<unsigned char>(bytes[i]);
    if (b < 0x80) {
      ++i;
    } else if ((b & 0xE0) == 0xC0 && i + 1 < bytes.size() &&
               is_utf8_continuation(bytes[i + 1])) {
      i += 2;
    } else if ((b & 0xF0) == 0xE0 && i + 2 < bytes.size() &&
               is_utf8_continuation(bytes[i + 1]) &&
               is_utf8_continuation(bytes[i + 2])) {
      i += 3;
    } else if ((b & 0xF8) == 0xF0 && i + 3 < bytes.size() &&
               is_utf8_continuation(bytes[i + 1]) &&
               is_utf8_continuation(bytes[i + 2]) &&
               is_utf8_continuation(bytes[i + 3])) {
      i += 4;
    } else {
      ++i;  // stray byte, counted as one replacement scalar
    }
    ++count;
  }
  return count;
}

inline bool is_space_scalar(char32_t cp) {
  return cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U'\r' ||
         cp == U'\f' || cp == U'\v' || cp == 0xA0;
}

inline bool is_ascii_digit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

/// Letters from the scripts that occur in chemistry prose: ASCII, Latin-1
/// and Latin Extended, Greek, Cyrillic.
inline bool is_letter_scalar(char32_t cp) {
  if ((cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z')) return true;
  if (cp < 0x80) return false;
  if (cp >= 0xC0 && cp <= 0xFF && cp != 0xD7 && cp != 0xF7) return true;
  if (cp >= 0x100 && cp <= 0x24F) return true;   // Latin Extended-A/B
  if (cp >= 0x370 && cp <= 0x3FF) return true;   // Greek
  if (cp >= 0x400 && cp <= 0x4FF) return true;   // Cyrillic
  return false;
}

/// Token-boundary rule: a word character is a letter, a digit, or a
/// sub/superscript digit (formula subscripts must not split tokens).
inline bool is_word_scalar(char32_t cp) {
  if (is_letter_scalar(cp) || is_ascii_digit(cp)) return true;
  if (cp == 0xB2 || cp == 0xB3 || cp == 0xB9) return true;
  if (cp >= 0x2070 && cp <= 0x2089) return true;
  return false;
}

inline bool is_upper_scalar(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return true;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return true;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return true;
  if (cp >= 0x400 && cp <= 0x42F) return true;
  return false;
}

/// One-to-one case fold over the same script ranges. Position-preserving by
/// construction (never expands), which keeps folded text aligned with the
/// original for offset reporting.
inline char32_t fold_scalar(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 32;
  if (cp < 0x80) return cp;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
  if (cp >= 0x100 && cp <= 0x137) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp >= 0x139 && cp <= 0x148) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x14A && cp <= 0x177) return (cp % 2 == 0) ? cp + 1 : cp;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E) return (cp % 2 == 1) ? cp + 1 : cp;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 32;
  if (cp == 0x3C2) return 0x3C3;  // final sigma folds to sigma
  if (cp >= 0x400 && cp <= 0x40F) return cp + 80;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 32;
  return cp;
}

inline std::u32string fold_scalars(std::u32string_view scalars) {
  std::u32string out(scalars);
  for (char32_t& cp : out) cp = fold_scalar(cp);
  return out;
}

/// Canonical surface form: trim, collapse whitespace runs to one space,
/// case-fold. Greek letters and hyphens pass through unchanged.
inline std::u32string normalize_scalars(std::u32string_view scalars) {
  std::u32string out;
  out.reserve(scalars.size());
  bool pending_space = false;
  for (char32_t cp : scalars) {
    if (is_space_scalar(cp)) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(U' ');
      pending_space = false;
    }
    out.push_back(fold_scalar(cp));
  }
  return out;
}

inline std::string normalize_surface(std::string_view surface) {
  return encode_utf8(normalize_scalars(decode_utf8(surface)));
}

/// Substring by scalar positions, returned as UTF-8.
inline std::string slice_scalars(std::u32string_view scalars, size_t start,
                                 size_t end) {
  if (start > scalars.size()) start = scalars.size();
  if (end > scalars.size()) end = scalars.size();
  if (start >= end) return {};
  return encode_utf8(scalars.substr(start, end - start));
}

}  // namespace cear
