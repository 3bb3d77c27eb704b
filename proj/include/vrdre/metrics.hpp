#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vrdre/document.hpp"
#include "vrdre/errors.hpp"
#include "vrdre/preprocess.hpp"

namespace vrdre {

using PairSet = std::set<std::pair<int, int>>;  // (child, parent)

struct DocPrediction {
  std::string doc_id;
  PairSet pairs;                 // predicted (child, parent)
  PairSet cross_window_gold;     // gold pairs split across windows
  std::map<std::pair<int, int>, double> probs;  // optional per-pair prob
};

struct DocCounts {
  std::string doc_id;
  int tp = 0, fp = 0, fn = 0;
  int cross_window_fn = 0;
};

struct MetricsReport {
  double precision = 0, recall = 0, f1 = 0;
  double macro_f1 = 0;
  int tp = 0, fp = 0, fn = 0;
  int cross_window_fn = 0;
  double entity_f1 = -1;  // < 0 when EE was not evaluated
  std::vector<DocCounts> per_doc;
};

inline double f1_from(double p, double r) {
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

inline PairSet gold_pairs(const Document& doc) {
  RelationMatrix m = build_gold_matrix(doc);
  PairSet out;
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j)
      if (m.at(i, j)) out.insert({i, j});
  return out;
}

inline PairSet to_unordered(const PairSet& pairs) {
  PairSet out;
  for (auto [a, b] : pairs) out.insert({std::min(a, b), std::max(a, b)});
  return out;
}

// Micro-averaged relation P/R/F1. KEY_VALUE scores directed (child, parent)
// pairs; GROUP scores unordered pairs. Documents without a prediction entry
// count all-FN.
inline MetricsReport evaluate_relations(
    const std::vector<DocPrediction>& predictions,
    const std::vector<Document>& gold_docs, RelationKind kind) {
  std::map<std::string, const DocPrediction*> by_id;
  for (const auto& p : predictions) by_id[p.doc_id] = &p;

  MetricsReport rep;
  double macro_sum = 0;
  for (const auto& doc : gold_docs) {
    if (doc.relation_kind != kind)
      throw ConfigError("relation kind mismatch for doc " + doc.doc_id);
    PairSet gold = gold_pairs(doc);
    PairSet pred, cross;
    auto it = by_id.find(doc.doc_id);
    if (it != by_id.end()) {
      pred = it->second->pairs;
      cross = it->second->cross_window_gold;
    }
    if (kind == RelationKind::GROUP) {
      gold = to_unordered(gold);
      pred = to_unordered(pred);
      cross = to_unordered(cross);
    }
    DocCounts dc;
    dc.doc_id = doc.doc_id;
    for (const auto& pr : pred)
      gold.count(pr) ? ++dc.tp : ++dc.fp;
    for (const auto& g : gold) {
      if (!pred.count(g)) {
        ++dc.fn;
        if (cross.count(g)) ++dc.cross_window_fn;
      }
    }
    rep.tp += dc.tp;
    rep.fp += dc.fp;
    rep.fn += dc.fn;
    rep.cross_window_fn += dc.cross_window_fn;
    const double dp = dc.tp + dc.fp > 0 ? double(dc.tp) / (dc.tp + dc.fp) : 0;
    const double dr = dc.tp + dc.fn > 0 ? double(dc.tp) / (dc.tp + dc.fn) : 0;
    macro_sum += f1_from(dp, dr);
    rep.per_doc.push_back(std::move(dc));
  }
  rep.precision = rep.tp + rep.fp > 0 ? double(rep.tp) / (rep.tp + rep.fp) : 0;
  rep.recall = rep.tp + rep.fn > 0 ? double(rep.tp) / (rep.tp + rep.fn) : 0;
  rep.f1 = f1_from(rep.precision, rep.recall);
  rep.macro_f1 = gold_docs.empty() ? 0 : macro_sum / double(gold_docs.size());
  return rep;
}

// Span-level (exact boundary + class) entity scoring from IOB tags.
struct EntityScore {
  double precision = 0, recall = 0, f1 = 0;
  int tp = 0, fp = 0, fn = 0;
  bool zero_spans = false;
};

inline EntityScore evaluate_entities(
    const std::vector<std::vector<std::string>>& pred_tags,
    const std::vector<std::vector<std::string>>& gold_tags) {
  if (pred_tags.size() != gold_tags.size())
    throw InputError("prediction/gold sequence count mismatch");
  EntityScore s;
  for (size_t k = 0; k < pred_tags.size(); ++k) {
    if (pred_tags[k].size() != gold_tags[k].size())
      throw InputError("tag sequence length mismatch");
    auto pred = decode_iob_spans(pred_tags[k]);
    auto gold = decode_iob_spans(gold_tags[k]);
    std::set<TagSpan> gold_set(gold.begin(), gold.end());
    for (const auto& sp : pred)
      gold_set.count(sp) ? ++s.tp : ++s.fp;
    std::set<TagSpan> pred_set(pred.begin(), pred.end());
    for (const auto& sp : gold)
      if (!pred_set.count(sp)) ++s.fn;
  }
  if (s.tp + s.fp + s.fn == 0) {
    s.zero_spans = true;
    return s;
  }
  s.precision = s.tp + s.fp > 0 ? double(s.tp) / (s.tp + s.fp) : 0;
  s.recall = s.tp + s.fn > 0 ? double(s.tp) / (s.tp + s.fn) : 0;
  s.f1 = f1_from(s.precision, s.recall);
  return s;
}

}  // namespace vrdre
