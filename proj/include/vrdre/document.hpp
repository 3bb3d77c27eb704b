#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vrdre/geometry.hpp"
#include "vrdre/relation_matrix.hpp"

namespace vrdre {

enum class RelationKind { KEY_VALUE, GROUP };

inline const char* to_string(RelationKind k) {
  return k == RelationKind::KEY_VALUE ? "key_value" : "group";
}

// OCR text block: ordered words sharing one box.
struct Segment {
  int segment_id = 0;
  std::vector<std::string> tokens;  // word strings, reading order
  BBox box;
  std::vector<BBox> word_boxes;  // one per word
};

// Contiguous word span inside a single segment.
struct EntitySpan {
  int segment_id = 0;
  int first_word = 0;
  int last_word = 0;  // inclusive
  bool operator==(const EntitySpan&) const = default;
};

struct Entity {
  int entity_id = 0;
  EntitySpan span;
  std::string label;
  std::optional<int> group_id;
};

struct Link {
  int parent = 0;
  int child = 0;
  bool operator==(const Link&) const = default;
  auto operator<=>(const Link&) const = default;
};

struct Document {
  std::string doc_id;
  std::vector<Segment> segments;
  std::vector<Entity> entities;
  std::vector<Link> links;  // directed parent -> child
  RelationKind relation_kind = RelationKind::KEY_VALUE;
  double page_width = 1000.0;
  double page_height = 1000.0;

  const Segment* find_segment(int segment_id) const {
    for (const auto& s : segments)
      if (s.segment_id == segment_id) return &s;
    return nullptr;
  }
};

// --- gold matrix ----------------------------------------------------------

inline RelationMatrix build_gold_matrix(const std::vector<Entity>& entities,
                                        const std::vector<Link>& links,
                                        RelationKind kind) {
  const int n = static_cast<int>(entities.size());
  RelationMatrix m(n);
  if (kind == RelationKind::KEY_VALUE) {
    for (const auto& l : links) {
      if (l.parent < 0 || l.parent >= n || l.child < 0 || l.child >= n)
        throw std::out_of_range("link references unknown entity id");
      if (l.parent == l.child)
        throw std::invalid_argument("self-link rejected");
      m.set(l.child, l.parent, 1);
    }
    return m;
  }
  // GROUP: full clique per shared group id; explicit links joined in too.
  std::map<int, std::vector<int>> groups;
  for (const auto& e : entities)
    if (e.group_id) groups[*e.group_id].push_back(e.entity_id);
  for (const auto& [gid, members] : groups) {
    for (size_t a = 0; a < members.size(); ++a)
      for (size_t b = a + 1; b < members.size(); ++b) {
        m.set(members[a], members[b], 1);
        m.set(members[b], members[a], 1);
      }
  }
  for (const auto& l : links) {
    if (l.parent < 0 || l.parent >= n || l.child < 0 || l.child >= n)
      throw std::out_of_range("link references unknown entity id");
    if (l.parent == l.child) throw std::invalid_argument("self-link rejected");
    m.set(l.child, l.parent, 1);
    m.set(l.parent, l.child, 1);
  }
  return m;
}

inline RelationMatrix build_gold_matrix(const Document& doc) {
  return build_gold_matrix(doc.entities, doc.links, doc.relation_kind);
}

// --- validation -----------------------------------------------------------

enum class ViolationCode {
  DANGLING_LINK,
  SELF_LINK,
  NONCONTIGUOUS_SPAN,
  EMPTY_SEGMENT,
  WORD_BOX_MISMATCH,
  BOX_OUT_OF_RANGE,
  BOX_NOT_CONTAINED,
  NON_DENSE_ENTITY_IDS,
  UNKNOWN_LABEL,
  MISSING_GROUP_ID,
};

inline const char* to_string(ViolationCode c) {
  switch (c) {
    case ViolationCode::DANGLING_LINK: return "DANGLING_LINK";
    case ViolationCode::SELF_LINK: return "SELF_LINK";
    case ViolationCode::NONCONTIGUOUS_SPAN: return "NONCONTIGUOUS_SPAN";
    case ViolationCode::EMPTY_SEGMENT: return "EMPTY_SEGMENT";
    case ViolationCode::WORD_BOX_MISMATCH: return "WORD_BOX_MISMATCH";
    case ViolationCode::BOX_OUT_OF_RANGE: return "BOX_OUT_OF_RANGE";
    case ViolationCode::BOX_NOT_CONTAINED: return "BOX_NOT_CONTAINED";
    case ViolationCode::NON_DENSE_ENTITY_IDS: return "NON_DENSE_ENTITY_IDS";
    case ViolationCode::UNKNOWN_LABEL: return "UNKNOWN_LABEL";
    case ViolationCode::MISSING_GROUP_ID: return "MISSING_GROUP_ID";
  }
  return "?";
}

struct Violation {
  ViolationCode code;
  std::string where;  // human-readable location, e.g. "entity 3"
};

using ValidationReport = std::vector<Violation>;

inline ValidationReport validate_document(
    const Document& doc,
    const std::vector<std::string>* label_set = nullptr) {
  ValidationReport report;
  auto add = [&](ViolationCode c, std::string where) {
    report.push_back({c, std::move(where)});
  };

  for (const auto& s : doc.segments) {
    const std::string where = "segment " + std::to_string(s.segment_id);
    if (s.tokens.empty()) add(ViolationCode::EMPTY_SEGMENT, where);
    if (s.word_boxes.size() != s.tokens.size())
      add(ViolationCode::WORD_BOX_MISMATCH, where);
    if (!s.box.valid()) add(ViolationCode::BOX_OUT_OF_RANGE, where);
    for (const auto& wb : s.word_boxes) {
      if (!wb.valid()) {
        add(ViolationCode::BOX_OUT_OF_RANGE, where);
        break;
      }
    }
    for (const auto& wb : s.word_boxes) {
      if (!s.box.contains(wb, /*tol=*/1)) {
        add(ViolationCode::BOX_NOT_CONTAINED, where);
        break;
      }
    }
  }

  const int n = static_cast<int>(doc.entities.size());
  for (int i = 0; i < n; ++i) {
    const auto& e = doc.entities[i];
    const std::string where = "entity " + std::to_string(e.entity_id);
    if (e.entity_id != i) add(ViolationCode::NON_DENSE_ENTITY_IDS, where);
    const Segment* seg = doc.find_segment(e.span.segment_id);
    if (!seg || e.span.first_word < 0 || e.span.last_word < e.span.first_word ||
        e.span.last_word >= static_cast<int>(seg ? seg->tokens.size() : 0))
      add(ViolationCode::NONCONTIGUOUS_SPAN, where);
    if (label_set &&
        std::find(label_set->begin(), label_set->end(), e.label) ==
            label_set->end())
      add(ViolationCode::UNKNOWN_LABEL, where);
  }

  for (const auto& l : doc.links) {
    const std::string where =
        "link (" + std::to_string(l.parent) + "," + std::to_string(l.child) + ")";
    if (l.parent < 0 || l.parent >= n || l.child < 0 || l.child >= n)
      add(ViolationCode::DANGLING_LINK, where);
    else if (l.parent == l.child)
      add(ViolationCode::SELF_LINK, where);
  }

  if (doc.relation_kind == RelationKind::GROUP) {
    for (const auto& e : doc.entities)
      if (!e.group_id)
        add(ViolationCode::MISSING_GROUP_ID,
            "entity " + std::to_string(e.entity_id));
  }
  return report;
}

}  // namespace vrdre
