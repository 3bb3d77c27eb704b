#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "vrdre/document.hpp"
#include "vrdre/errors.hpp"
#include "vrdre/tokenizer.hpp"

namespace vrdre {

// --- reading-order transforms --------------------------------------------

// Sorts segments by ascending y0, ties by x0, then original position
// (stable). Entities and links are id-based, so only presentation order
// changes.
inline Document order_segments_bbo(Document doc) {
  std::stable_sort(doc.segments.begin(), doc.segments.end(),
                   [](const Segment& a, const Segment& b) {
                     if (a.box.y0 != b.box.y0) return a.box.y0 < b.box.y0;
                     return a.box.x0 < b.box.x0;
                   });
  return doc;
}

// Random segment permutation, seeded. Token order inside each segment is
// untouched; relations are invariant since entities keep their ids.
inline Document shuffle_segments_bbs(Document doc, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::shuffle(doc.segments.begin(), doc.segments.end(), rng);
  return doc;
}

// --- entity markers -------------------------------------------------------

enum class MarkerMode { NONE, SIMPLE, PUNCT };

struct MarkerScheme {
  MarkerMode mode = MarkerMode::NONE;
  std::map<std::string, std::string> type_names;  // label -> marker word(s)
  bool include_markers_in_span = false;

  std::string type_name(const std::string& label) const {
    auto it = type_names.find(label);
    if (it != type_names.end()) return it->second;
    std::string name;
    for (char c : label)
      name.push_back(c == '_' ? ' ' : char(std::tolower((unsigned char)c)));
    return name;
  }
};

inline std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Prepends entity type words in front of each entity span (SIMPLE), or wraps
// spans in the punctuation-delimited form (PUNCT, token-budget analysis
// only). Marker words inherit the entity's first word's box.
inline Document inject_entity_markers(const Document& in,
                                      const MarkerScheme& scheme) {
  if (scheme.mode == MarkerMode::NONE)
    throw ConfigError("inject_entity_markers requires SIMPLE or PUNCT mode");
  Document doc = in;
  if (doc.entities.empty()) return doc;

  // Entities per segment, ordered by span start; overlap is an input error.
  std::map<int, std::vector<int>> by_segment;
  for (const auto& e : doc.entities)
    by_segment[e.span.segment_id].push_back(e.entity_id);
  for (auto& [seg_id, ids] : by_segment) {
    std::sort(ids.begin(), ids.end(), [&](int a, int b) {
      return doc.entities[a].span.first_word < doc.entities[b].span.first_word;
    });
    for (size_t k = 1; k < ids.size(); ++k)
      if (doc.entities[ids[k]].span.first_word <=
          doc.entities[ids[k - 1]].span.last_word)
        throw InputError("overlapping entity spans in segment " +
                         std::to_string(seg_id));
  }

  for (auto& seg : doc.segments) {
    auto it = by_segment.find(seg.segment_id);
    if (it == by_segment.end()) continue;
    const auto& ids = it->second;

    std::vector<std::string> new_tokens;
    std::vector<BBox> new_boxes;
    std::vector<int> word_pos(seg.tokens.size());  // old index -> new index
    std::map<int, int> marker_start;               // entity -> first marker pos

    size_t next_entity = 0;
    for (int w = 0; w < static_cast<int>(seg.tokens.size()); ++w) {
      // Opening markers before the entity's first word.
      if (next_entity < ids.size()) {
        const Entity& e = doc.entities[ids[next_entity]];
        if (e.span.first_word == w) {
          const BBox anchor = seg.word_boxes[w];
          const std::string tname = scheme.type_name(e.label);
          std::vector<std::string> marker_words;
          if (scheme.mode == MarkerMode::SIMPLE) {
            marker_words = split_words(tname);
          } else {
            // Alternate the two punctuation roles by entity order.
            const bool even = e.entity_id % 2 == 0;
            const std::string outer = even ? "@" : "#";
            const std::string inner = even ? "*" : "^";
            marker_words.push_back(outer);
            marker_words.push_back(inner);
            for (auto& wd : split_words(tname)) marker_words.push_back(wd);
            marker_words.push_back(inner);
          }
          marker_start[e.entity_id] = static_cast<int>(new_tokens.size());
          for (auto& mw : marker_words) {
            new_tokens.push_back(mw);
            new_boxes.push_back(anchor);
          }
        }
      }
      word_pos[w] = static_cast<int>(new_tokens.size());
      new_tokens.push_back(seg.tokens[w]);
      new_boxes.push_back(seg.word_boxes[w]);
      // Closing punctuation after the entity's last word.
      if (next_entity < ids.size()) {
        const Entity& e = doc.entities[ids[next_entity]];
        if (e.span.last_word == w) {
          if (scheme.mode == MarkerMode::PUNCT) {
            const BBox anchor = seg.word_boxes[e.span.first_word];
            new_tokens.push_back(e.entity_id % 2 == 0 ? "@" : "#");
            new_boxes.push_back(anchor);
          }
          ++next_entity;
        }
      }
    }

    for (int id : ids) {
      Entity& e = doc.entities[id];
      const int first = scheme.include_markers_in_span
                            ? marker_start[id]
                            : word_pos[e.span.first_word];
      e.span = {seg.segment_id, first, word_pos[e.span.last_word]};
    }
    seg.tokens = std::move(new_tokens);
    seg.word_boxes = std::move(new_boxes);
  }
  return doc;
}

// --- tokenized windows ----------------------------------------------------

struct WindowEntity {
  int entity_id = 0;
  int first_token = 0;
  int last_token = 0;  // inclusive
  std::string label;
};

struct Window {
  std::string doc_id;
  std::vector<int> token_ids;
  std::vector<BBox> token_boxes;
  std::vector<std::pair<int, int>> token_to_word;  // (segment_id, word index)
  std::vector<WindowEntity> entities;
  std::vector<uint8_t> attention_mask;  // 1 = real token (no padding emitted)
};

// Segment-aligned greedy packing into windows of at most max_len tokens.
// Segments never split; each entity lands in the (first) window holding its
// segment. stride > 0 re-emits up to `stride` trailing tokens' worth of
// segments at the start of the next window.
inline std::vector<Window> tokenize_and_window(const Document& doc,
                                               const Tokenizer& tokenizer,
                                               int max_len, int stride = 0) {
  if (max_len <= 0) throw ConfigError("max_len must be positive");
  if (stride < 0 || stride >= max_len)
    throw ConfigError("stride must lie in [0, max_len)");

  struct SegTok {
    const Segment* seg;
    std::vector<int> ids;
    std::vector<BBox> boxes;
    std::vector<int> word_first;  // word index -> first subword offset
    std::vector<int> word_last;
    std::vector<std::pair<int, int>> to_word;
  };
  std::vector<SegTok> toks;
  for (const auto& seg : doc.segments) {
    SegTok st;
    st.seg = &seg;
    for (int w = 0; w < static_cast<int>(seg.tokens.size()); ++w) {
      auto ids = tokenizer.encode_word(seg.tokens[w]);
      st.word_first.push_back(static_cast<int>(st.ids.size()));
      for (int id : ids) {
        st.ids.push_back(id);
        st.boxes.push_back(seg.word_boxes[w]);
        st.to_word.emplace_back(seg.segment_id, w);
      }
      st.word_last.push_back(static_cast<int>(st.ids.size()) - 1);
    }
    if (static_cast<int>(st.ids.size()) > max_len)
      throw InputError("segment " + std::to_string(seg.segment_id) +
                       " exceeds max_len after tokenization");
    toks.push_back(std::move(st));
  }

  // Entities indexed by segment id, in document entity order.
  std::map<int, std::vector<const Entity*>> ents_by_seg;
  for (const auto& e : doc.entities)
    ents_by_seg[e.span.segment_id].push_back(&e);
  std::set<int> placed;

  std::vector<Window> windows;
  size_t start = 0;
  while (start < toks.size()) {
    Window win;
    win.doc_id = doc.doc_id;
    size_t end = start;
    int used = 0;
    std::vector<int> seg_offset(toks.size(), -1);
    while (end < toks.size() &&
           used + static_cast<int>(toks[end].ids.size()) <= max_len) {
      seg_offset[end] = used;
      const auto& st = toks[end];
      win.token_ids.insert(win.token_ids.end(), st.ids.begin(), st.ids.end());
      win.token_boxes.insert(win.token_boxes.end(), st.boxes.begin(),
                             st.boxes.end());
      win.token_to_word.insert(win.token_to_word.end(), st.to_word.begin(),
                               st.to_word.end());
      used += static_cast<int>(st.ids.size());
      ++end;
    }
    win.attention_mask.assign(win.token_ids.size(), 1);
    for (size_t s = start; s < end; ++s) {
      auto it = ents_by_seg.find(toks[s].seg->segment_id);
      if (it == ents_by_seg.end()) continue;
      for (const Entity* e : it->second) {
        if (!placed.insert(e->entity_id).second) continue;
        WindowEntity we;
        we.entity_id = e->entity_id;
        we.first_token = seg_offset[s] + toks[s].word_first[e->span.first_word];
        we.last_token = seg_offset[s] + toks[s].word_last[e->span.last_word];
        we.label = e->label;
        win.entities.push_back(we);
      }
    }
    windows.push_back(std::move(win));
    if (end >= toks.size()) break;
    size_t next = end;
    if (stride > 0) {
      int back = 0;
      while (next > start + 1 &&
             back + static_cast<int>(toks[next - 1].ids.size()) <= stride) {
        back += static_cast<int>(toks[next - 1].ids.size());
        --next;
      }
    }
    start = next;
  }
  return windows;
}

// --- IOB tagging ----------------------------------------------------------

inline std::string iob_class(const std::string& label) {
  std::string u;
  for (char c : label) u.push_back(char(std::toupper((unsigned char)c)));
  return u;
}

// Tagset: O + {B-,I-} per non-"other" label, in label_set order.
inline std::vector<std::string> iob_tagset(
    const std::vector<std::string>& label_set) {
  std::vector<std::string> tags = {"O"};
  for (const auto& l : label_set) {
    if (l == "other") continue;
    tags.push_back("B-" + iob_class(l));
    tags.push_back("I-" + iob_class(l));
  }
  return tags;
}

inline std::vector<std::string> iob_gold_tags(
    const Window& win, const std::vector<std::string>& label_set) {
  std::vector<std::string> tags(win.token_ids.size(), "O");
  std::vector<uint8_t> covered(win.token_ids.size(), 0);
  const auto tagset = iob_tagset(label_set);
  auto known = [&](const std::string& t) {
    return std::find(tagset.begin(), tagset.end(), t) != tagset.end();
  };
  for (const auto& e : win.entities) {
    if (e.label == "other") continue;
    for (int t = e.first_token; t <= e.last_token; ++t) {
      if (covered[t]) throw InputError("overlapping entity spans in window");
      covered[t] = 1;
      tags[t] = (t == e.first_token ? "B-" : "I-") + iob_class(e.label);
      if (!known(tags[t]))
        throw InputError("entity label outside tagset: " + e.label);
    }
  }
  return tags;
}

struct TagSpan {
  int first = 0;
  int last = 0;
  std::string cls;
  bool operator==(const TagSpan&) const = default;
  auto operator<=>(const TagSpan&) const = default;
};

// Decodes an IOB tag sequence back into class spans. An I- tag without a
// matching open span starts a new one (conventional lenient decoding).
inline std::vector<TagSpan> decode_iob_spans(
    const std::vector<std::string>& tags) {
  std::vector<TagSpan> spans;
  for (int t = 0; t < static_cast<int>(tags.size()); ++t) {
    const std::string& tag = tags[t];
    if (tag == "O") continue;
    if (tag.size() < 3 || tag[1] != '-')
      throw InputError("malformed IOB tag: " + tag);
    const std::string cls = tag.substr(2);
    const bool cont = tag[0] == 'I' && !spans.empty() &&
                      spans.back().last == t - 1 && spans.back().cls == cls;
    if (cont)
      spans.back().last = t;
    else if (tag[0] == 'B' || tag[0] == 'I')
      spans.push_back({t, t, cls});
    else
      throw InputError("malformed IOB tag: " + tag);
  }
  return spans;
}

}  // namespace vrdre
