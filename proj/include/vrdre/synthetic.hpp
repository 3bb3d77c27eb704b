#pragma once

#include <random>
#include <string>
#include <vector>

#include "vrdre/document.hpp"

namespace vrdre {

// Synthetic key-value corpus: each document holds rows of (key, value)
// segment pairs; the gold parent of every value is the nearest key segment
// to its left or above (here: the key sharing its row). A few unlinked
// "other" segments are mixed in as distractors.
inline std::vector<Document> make_synthetic_corpus(int num_docs,
                                                   uint64_t seed) {
  static const std::vector<std::string> key_words = {
      "name",  "date",  "total", "amount", "phone",
      "email", "city",  "state", "invoice", "due"};
  static const std::vector<std::string> value_words = {
      "alpha", "bravo", "42",  "2021", "oak",   "street",
      "blue",  "north", "17",  "delta", "acme", "ltd"};
  static const std::vector<std::string> noise_words = {"page", "form", "copy",
                                                       "draft"};

  std::mt19937_64 rng(seed);
  std::vector<Document> docs;
  for (int d = 0; d < num_docs; ++d) {
    Document doc;
    doc.doc_id = "synth_" + std::to_string(d);
    doc.relation_kind = RelationKind::KEY_VALUE;

    std::uniform_int_distribution<int> n_pairs_dist(3, 6);
    std::uniform_int_distribution<int> n_noise_dist(0, 2);
    const int n_pairs = n_pairs_dist(rng);
    const int n_noise = n_noise_dist(rng);

    // distinct rows, quantized y so key and value share a bucket
    std::vector<int> rows(9);
    for (int r = 0; r < 9; ++r) rows[r] = 100 * (r + 1);
    std::shuffle(rows.begin(), rows.end(), rng);

    auto make_segment = [&](int seg_id, int x, int y,
                            const std::vector<std::string>& pool,
                            int n_words) {
      Segment s;
      s.segment_id = seg_id;
      std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
      int cx = x;
      for (int w = 0; w < n_words; ++w) {
        s.tokens.push_back(pool[pick(rng)]);
        s.word_boxes.push_back(BBox{cx, y, cx + 40, y + 20});
        cx += 50;
      }
      s.box = BBox{x, y, cx - 10, y + 20};
      return s;
    };

    int seg_id = 0;
    std::uniform_int_distribution<int> words12(1, 2);
    std::uniform_int_distribution<int> words13(1, 3);
    for (int p = 0; p < n_pairs; ++p) {
      const int y = rows[p];
      Segment key = make_segment(seg_id, 50, y, key_words, words12(rng));
      Entity ke{seg_id, {seg_id, 0, int(key.tokens.size()) - 1}, "question", {}};
      doc.segments.push_back(std::move(key));
      doc.entities.push_back(ke);
      const int key_id = seg_id++;

      Segment val = make_segment(seg_id, 400, y, value_words, words13(rng));
      Entity ve{seg_id, {seg_id, 0, int(val.tokens.size()) - 1}, "answer", {}};
      doc.segments.push_back(std::move(val));
      doc.entities.push_back(ve);
      doc.links.push_back(Link{key_id, seg_id});
      ++seg_id;
    }
    for (int k = 0; k < n_noise; ++k) {
      const int y = rows[n_pairs + k];
      Segment noise = make_segment(seg_id, 700, y, noise_words, 1);
      Entity ne{seg_id, {seg_id, 0, 0}, "other", {}};
      doc.segments.push_back(std::move(noise));
      doc.entities.push_back(ne);
      ++seg_id;
    }
    // Scramble presentation order so BBO has something to fix.
    std::shuffle(doc.segments.begin(), doc.segments.end(), rng);
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace vrdre
