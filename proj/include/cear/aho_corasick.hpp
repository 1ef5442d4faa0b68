#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Multi-pattern matcher over Unicode scalar values. Patterns are the folded
// lexicon keys; one pass over a folded page finds every occurrence of every
// key, which keeps corpus-scale annotation linear in the text size.

namespace cear {

class AhoCorasick {
 public:
  struct Match {
    size_t start;      // scalar position, inclusive
    size_t end;        // scalar position, exclusive
    uint32_t pattern;  // index in insertion order
  };

  /// Adds a non-empty pattern; returns its index.
  uint32_t add_pattern(std::u32string_view pattern) {
    patterns_.emplace_back(pattern);
    built_ = false;
    return static_cast<uint32_t>(patterns_.size() - 1);
  }

  size_t pattern_count() const { return patterns_.size(); }
  const std::u32string& pattern(uint32_t index) const {
    return patterns_[index];
  }

  void build() {
    nodes_.clear();
    nodes_.emplace_back();  // root
    root_ascii_.fill(-1);
    for (uint32_t p = 0; p < patterns_.size(); ++p) {
      const std::u32string& pat = patterns_[p];
      int32_t state = 0;
      for (char32_t cp : pat) {
        int32_t next = find_edge(state, cp);
        if (next < 0) {
          next = static_cast<int32_t>(nodes_.size());
          nodes_.emplace_back();
          add_edge(state, cp, next);
        }
        state = next;
      }
      nodes_[state].terminal = static_cast<int32_t>(p);
    }
    // Failure links, breadth first.
    std::deque<int32_t> queue;
    auto init_child = [&](int32_t child, int32_t fail) {
      nodes_[child].fail = fail;
      nodes_[child].out_link =
          nodes_[fail].terminal >= 0 ? fail : nodes_[fail].out_link;
      queue.push_back(child);
    };
    for (int32_t child : root_ascii_)
      if (child >= 0) init_child(child, 0);
    for (const auto& [cp, child] : nodes_[0].next) {
      (void)cp;
      init_child(child, 0);
    }
    while (!queue.empty()) {
      int32_t u = queue.front();
      queue.pop_front();
      for (const auto& [cp, v] : nodes_[u].next)
        init_child(v, step(nodes_[u].fail, cp));
    }
    built_ = true;
  }

  bool built() const { return built_; }

  /// Calls on_match(Match) for every occurrence of every pattern, in order of
  /// match end position.
  template <typename Fn>
  void scan(std::u32string_view text, Fn&& on_match) const {
    int32_t state = 0;
    for (size_t i = 0; i < text.size(); ++i) {
      state = step(state, text[i]);
      int32_t o = nodes_[state].terminal >= 0 ? state : nodes_[state].out_link;
      while (o >= 0) {
        uint32_t p = static_cast<uint32_t>(nodes_[o].terminal);
        size_t len = patterns_[p].size();
        on_match(Match{i + 1 - len, i + 1, p});
        o = nodes_[o].out_link;
      }
    }
  }

  std::vector<Match> find_all(std::u32string_view text) const {
    std::vector<Match> out;
    scan(text, [&](const Match& m) { out.push_back(m); });
    return out;
  }

 private:
  struct Node {
    std::vector<std::pair<char32_t, int32_t>> next;  // sorted by scalar
    int32_t fail = 0;
    int32_t terminal = -1;  // pattern ending here
    int32_t out_link = -1;  // nearest suffix state with a terminal
  };

  int32_t find_edge(int32_t state, char32_t cp) const {
    if (state == 0 && cp < 128) return root_ascii_[cp];
    const auto& next = nodes_[state].next;
    auto it = std::lower_bound(
        next.begin(), next.end(), cp,
        [](const std::pair<char32_t, int32_t>& e, char32_t c) {
          return e.first < c;
        });
    if (it != next.end() && it->first == cp) return it->second;
    return -1;
  }

  void add_edge(int32_t state, char32_t cp, int32_t target) {
    if (state == 0 && cp < 128) {
      root_ascii_[cp] = target;
      return;
    }
    auto& next = nodes_[state].next;
    auto it = std::lower_bound(
        next.begin(), next.end(), cp,
        [](const std::pair<char32_t, int32_t>& e, char32_t c) {
          return e.first < c;
        });
    next.insert(it, {cp, target});
  }

  // Transition with failure fallback.
  int32_t step(int32_t state, char32_t cp) const {
    while (true) {
      int32_t next = find_edge(state, cp);
      if (next >= 0) return next;
      if (state == 0) return 0;
      state = nodes_[state].fail;
    }
  }

  std::vector<std::u32string> patterns_;
  std::vector<Node> nodes_;
  std::array<int32_t, 128> root_ascii_{};
  bool built_ = false;
};

}  // namespace cear
