#pragma once

#include <string>

#include "json.hpp"
#include "vrdre/document.hpp"

// Canonical Document JSON, used for ingest caching and CLI output.

namespace vrdre {

using json = nlohmann::json;

inline json to_json(const BBox& b) { return json::array({b.x0, b.y0, b.x1, b.y1}); }

inline BBox bbox_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4)
    throw std::runtime_error("bbox must be a 4-element array");
  return BBox{j[0].get<int>(), j[1].get<int>(), j[2].get<int>(), j[3].get<int>()};
}

inline json to_json(const Document& doc) {
  json j;
  j["doc_id"] = doc.doc_id;
  j["relation_kind"] = to_string(doc.relation_kind);
  j["page_size"] = json::array({doc.page_width, doc.page_height});
  j["segments"] = json::array();
  for (const auto& s : doc.segments) {
    json js;
    js["segment_id"] = s.segment_id;
    js["tokens"] = s.tokens;
    js["box"] = to_json(s.box);
    js["word_boxes"] = json::array();
    for (const auto& wb : s.word_boxes) js["word_boxes"].push_back(to_json(wb));
    j["segments"].push_back(std::move(js));
  }
  j["entities"] = json::array();
  for (const auto& e : doc.entities) {
    json je;
    je["entity_id"] = e.entity_id;
    je["span"] = {{"segment_id", e.span.segment_id},
                  {"first_word", e.span.first_word},
                  {"last_word", e.span.last_word}};
    je["label"] = e.label;
    if (e.group_id) je["group_id"] = *e.group_id;
    j["entities"].push_back(std::move(je));
  }
  j["links"] = json::array();
  for (const auto& l : doc.links)
    j["links"].push_back(json::array({l.parent, l.child}));
  return j;
}

inline Document document_from_json(const json& j) {
  Document doc;
  doc.doc_id = j.at("doc_id").get<std::string>();
  const auto kind = j.at("relation_kind").get<std::string>();
  if (kind == "key_value")
    doc.relation_kind = RelationKind::KEY_VALUE;
  else if (kind == "group")
    doc.relation_kind = RelationKind::GROUP;
  else
    throw std::runtime_error("unknown relation_kind: " + kind);
  doc.page_width = j.at("page_size")[0].get<double>();
  doc.page_height = j.at("page_size")[1].get<double>();
  for (const auto& js : j.at("segments")) {
    Segment s;
    s.segment_id = js.at("segment_id").get<int>();
    s.tokens = js.at("tokens").get<std::vector<std::string>>();
    s.box = bbox_from_json(js.at("box"));
    for (const auto& wb : js.at("word_boxes")) s.word_boxes.push_back(bbox_from_json(wb));
    doc.segments.push_back(std::move(s));
  }
  for (const auto& je : j.at("entities")) {
    Entity e;
    e.entity_id = je.at("entity_id").get<int>();
    e.span.segment_id = je.at("span").at("segment_id").get<int>();
    e.span.first_word = je.at("span").at("first_word").get<int>();
    e.span.last_word = je.at("span").at("last_word").get<int>();
    e.label = je.at("label").get<std::string>();
    if (je.contains("group_id")) e.group_id = je.at("group_id").get<int>();
    doc.entities.push_back(std::move(e));
  }
  if (j.contains("links"))
    for (const auto& jl : j.at("links"))
      doc.links.push_back(Link{jl[0].get<int>(), jl[1].get<int>()});
  return doc;
}

}  // namespace vrdre
