#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cear/annotate.hpp"
#include "cear/error.hpp"

namespace cear {

struct Metrics {
  size_t tp = 0;
  size_t fp = 0;
  size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static Metrics from_counts(size_t tp, size_t fp, size_t fn) {
    Metrics m;
    m.tp = tp;
    m.fp = fp;
    m.fn = fn;
    m.precision = (tp + fp) ? static_cast<double>(tp) / (tp + fp) : 0.0;
    m.recall = (tp + fn) ? static_cast<double>(tp) / (tp + fn) : 0.0;
    m.f1 = (m.precision + m.recall) > 0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
  }
};

struct EvalReport {
  Metrics chemical;
  Metrics role;
  Metrics overall;  // micro-averaged over both kinds
};

struct ErrorTable {
  std::vector<std::pair<std::string, size_t>> false_positives;
  std::vector<std::pair<std::string, size_t>> false_negatives;
  size_t k = 0;
};

namespace detail {

// Strict-span identity: document, page, exact start, exact end, kind.
using SpanKey = std::tuple<std::string, int, size_t, size_t, MentionKind>;

inline SpanKey span_key(const Mention& m) {
  return {m.location.doc_checksum, m.location.page, m.location.offset, m.end,
          m.kind};
}

}  // namespace detail

/// Strict-span scoring: a prediction is a true positive only when a gold
/// mention with identical (doc, page, start, end, kind) exists. Matching is
/// one-to-one; duplicate identical spans on either side collapse before
/// scoring. Predictions for documents outside the gold corpus raise
/// MixedDocuments.
inline EvalReport score_strict(
    const std::vector<Mention>& gold, const std::vector<Mention>& pred,
    const std::optional<std::set<std::string>>& gold_docs = std::nullopt) {
  std::set<std::string> docs;
  if (gold_docs) {
    docs = *gold_docs;
  } else {
    for (const Mention& g : gold) docs.insert(g.location.doc_checksum);
  }
  for (const Mention& g : gold)
    if (!docs.count(g.location.doc_checksum))
      throw Error(ErrorKind::MixedDocuments,
                  "gold mention outside corpus: " + g.location.doc_checksum);
  for (const Mention& p : pred)
    if (!docs.count(p.location.doc_checksum))
      throw Error(ErrorKind::MixedDocuments,
                  "prediction for unknown document " +
                      p.location.doc_checksum);

  std::set<detail::SpanKey> gold_set, pred_set;
  for (const Mention& g : gold) gold_set.insert(detail::span_key(g));
  for (const Mention& p : pred) pred_set.insert(detail::span_key(p));

  size_t counts[2][3] = {};  // [kind][tp, fp, fn]
  for (const auto& key : pred_set) {
    int kind = std::get<4>(key) == MentionKind::Chemical ? 0 : 1;
    if (gold_set.count(key))
      ++counts[kind][0];
    else
      ++counts[kind][1];
  }
  for (const auto& key : gold_set) {
    int kind = std::get<4>(key) == MentionKind::Chemical ? 0 : 1;
    if (!pred_set.count(key)) ++counts[kind][2];
  }

  EvalReport report;
  report.chemical = Metrics::from_counts(counts[0][0], counts[0][1],
                                         counts[0][2]);
  report.role = Metrics::from_counts(counts[1][0], counts[1][1], counts[1][2]);
  report.overall = Metrics::from_counts(counts[0][0] + counts[1][0],
                                        counts[0][1] + counts[1][1],
                                        counts[0][2] + counts[1][2]);
  return report;
}

/// Most frequently misclassified surfaces: false positives and false
/// negatives grouped by exact surface string, top k of each, count
/// descending with ties broken by surface.
inline ErrorTable error_table(const std::vector<Mention>& gold,
                              const std::vector<Mention>& pred, size_t k) {
  std::set<detail::SpanKey> gold_set, pred_set;
  std::map<detail::SpanKey, std::string> surface_of;
  for (const Mention& g : gold) {
    gold_set.insert(detail::span_key(g));
    surface_of.emplace(detail::span_key(g), g.surface);
  }
  for (const Mention& p : pred) {
    pred_set.insert(detail::span_key(p));
    surface_of.emplace(detail::span_key(p), p.surface);
  }

  std::map<std::string, size_t> fp_counts, fn_counts;
  for (const auto& key : pred_set)
    if (!gold_set.count(key)) ++fp_counts[surface_of.at(key)];
  for (const auto& key : gold_set)
    if (!pred_set.count(key)) ++fn_counts[surface_of.at(key)];

  auto top_k = [k](const std::map<std::string, size_t>& counts) {
    std::vector<std::pair<std::string, size_t>> rows(counts.begin(),
                                                     counts.end());
    std::sort(rows.begin(), rows.end(),
              [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
              });
    if (rows.size() > k) rows.resize(k);
    return rows;
  };

  ErrorTable table;
  table.k = k;
  table.false_positives = top_k(fp_counts);
  table.false_negatives = top_k(fn_counts);
  return table;
}

}  // namespace cear
