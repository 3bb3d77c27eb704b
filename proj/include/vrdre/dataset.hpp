#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "vrdre/document.hpp"
#include "vrdre/errors.hpp"
#include "vrdre/geometry.hpp"

namespace vrdre {

enum class DatasetName { FUNSD, CORD, SYNTHETIC };

inline const std::vector<std::string>& funsd_labels() {
  static const std::vector<std::string> labels = {"question", "answer",
                                                  "header", "other"};
  return labels;
}

struct DatasetSpec {
  DatasetName name = DatasetName::FUNSD;
  std::filesystem::path root;
  std::string split = "train";
  std::vector<std::string> label_set;
  std::string group_key = "group_id";       // CORD only
  std::string fallback_label = "other";     // CORD unknown-category mapping
};

using WarnFn = std::function<void(const std::string&)>;
inline void ignore_warning(const std::string&) {}

// --- coordinate normalization --------------------------------------------

// Maps raw pixel coordinates into [0,1000]; pure, clamping out-of-page
// values with a warning.
inline Document normalize_coords(Document doc, double page_w, double page_h,
                                 const WarnFn& warn = ignore_warning) {
  if (page_w <= 0 || page_h <= 0)
    throw InputError("page dimensions must be positive");
  auto norm = [&](const BBox& raw) {
    if (raw.x0 < 0 || raw.y0 < 0 || raw.x1 > page_w || raw.y1 > page_h)
      warn("coordinates outside page bounds, clamping");
    return normalize_box(raw.x0, raw.y0, raw.x1, raw.y1, page_w, page_h);
  };
  for (auto& s : doc.segments) {
    s.box = norm(s.box);
    for (auto& wb : s.word_boxes) wb = norm(wb);
  }
  doc.page_width = 1000.0;
  doc.page_height = 1000.0;
  return doc;
}

// --- FUNSD ----------------------------------------------------------------

// Parses one FUNSD annotation file: a "form" array of labeled segments with
// word boxes and directed linking pairs [parent, child]. Coordinates are
// left raw; call normalize_coords afterwards.
inline Document parse_funsd(const nlohmann::json& j, const std::string& doc_id,
                            const WarnFn& warn = ignore_warning) {
  if (!j.contains("form") || !j.at("form").is_array())
    throw SchemaError(doc_id + ": missing top-level 'form' array");
  Document doc;
  doc.doc_id = doc_id;
  doc.relation_kind = RelationKind::KEY_VALUE;

  // Original entry id -> dense entity id (skipped entries drop out).
  std::map<int, int> id_map;
  std::vector<std::pair<int, int>> raw_links;

  int next_id = 0;
  int entry_idx = -1;
  for (const auto& entry : j.at("form")) {
    ++entry_idx;
    const std::string where =
        doc_id + ": form[" + std::to_string(entry_idx) + "]";
    for (const char* field : {"id", "text", "label", "box", "words", "linking"})
      if (!entry.contains(field))
        throw SchemaError(where + ": missing field '" + field + "'");

    if (entry.at("words").empty()) {
      warn(where + ": empty words array, segment skipped");
      continue;
    }
    const int orig_id = entry.at("id").get<int>();

    Segment seg;
    seg.segment_id = next_id;
    const auto& box = entry.at("box");
    if (!box.is_array() || box.size() != 4)
      throw SchemaError(where + ": 'box' must hold 4 integers");
    seg.box = BBox{box[0].get<int>(), box[1].get<int>(), box[2].get<int>(),
                   box[3].get<int>()};
    for (const auto& w : entry.at("words")) {
      if (!w.contains("text") || !w.contains("box"))
        throw SchemaError(where + ": word missing 'text' or 'box'");
      seg.tokens.push_back(w.at("text").get<std::string>());
      const auto& wb = w.at("box");
      seg.word_boxes.push_back(BBox{wb[0].get<int>(), wb[1].get<int>(),
                                    wb[2].get<int>(), wb[3].get<int>()});
    }

    Entity ent;
    ent.entity_id = next_id;
    ent.span = {next_id, 0, static_cast<int>(seg.tokens.size()) - 1};
    ent.label = entry.at("label").get<std::string>();

    for (const auto& pair : entry.at("linking")) {
      if (!pair.is_array() || pair.size() != 2)
        throw SchemaError(where + ": linking pair must hold 2 ids");
      raw_links.emplace_back(pair[0].get<int>(), pair[1].get<int>());
    }

    id_map[orig_id] = next_id;
    doc.segments.push_back(std::move(seg));
    doc.entities.push_back(std::move(ent));
    ++next_id;
  }

  // Pair [a, b] means a is the key (parent) of b; pairs are repeated in both
  // endpoints' entries, so dedupe.
  std::set<Link> seen;
  for (const auto& [a, b] : raw_links) {
    auto pa = id_map.find(a);
    auto pb = id_map.find(b);
    if (pa == id_map.end() || pb == id_map.end()) {
      warn(doc_id + ": linking pair references skipped segment, dropped");
      continue;
    }
    Link l{pa->second, pb->second};
    if (seen.insert(l).second) doc.links.push_back(l);
  }
  return doc;
}

// --- CORD -----------------------------------------------------------------

// Parses one CORD annotation file: "valid_line" entries, each a line-level
// group of words with quads, a category, and a group-identity field.
inline Document parse_cord(const nlohmann::json& j, const std::string& doc_id,
                           const DatasetSpec& spec,
                           const WarnFn& warn = ignore_warning) {
  if (!j.contains("valid_line") || !j.at("valid_line").is_array())
    throw SchemaError(doc_id + ": missing top-level 'valid_line' array");
  Document doc;
  doc.doc_id = doc_id;
  doc.relation_kind = RelationKind::GROUP;

  if (j.contains("meta") && j.at("meta").contains("image_size")) {
    doc.page_width = j.at("meta").at("image_size").at("width").get<double>();
    doc.page_height = j.at("meta").at("image_size").at("height").get<double>();
  } else {
    throw SchemaError(doc_id + ": missing meta.image_size");
  }

  auto quad_to_box = [&](const nlohmann::json& w,
                         const std::string& where) -> BBox {
    if (w.contains("quad")) {
      const auto& q = w.at("quad");
      double xs[4] = {q.at("x1").get<double>(), q.at("x2").get<double>(),
                      q.at("x3").get<double>(), q.at("x4").get<double>()};
      double ys[4] = {q.at("y1").get<double>(), q.at("y2").get<double>(),
                      q.at("y3").get<double>(), q.at("y4").get<double>()};
      BBox b;
      b.x0 = static_cast<int>(std::lround(*std::min_element(xs, xs + 4)));
      b.x1 = static_cast<int>(std::lround(*std::max_element(xs, xs + 4)));
      b.y0 = static_cast<int>(std::lround(*std::min_element(ys, ys + 4)));
      b.y1 = static_cast<int>(std::lround(*std::max_element(ys, ys + 4)));
      return b;
    }
    if (w.contains("box")) {
      const auto& b = w.at("box");
      return BBox{b[0].get<int>(), b[1].get<int>(), b[2].get<int>(),
                  b[3].get<int>()};
    }
    throw SchemaError(where + ": word missing 'quad' or 'box'");
  };

  int next_id = 0;
  int line_idx = -1;
  for (const auto& line : j.at("valid_line")) {
    ++line_idx;
    const std::string where =
        doc_id + ": valid_line[" + std::to_string(line_idx) + "]";
    if (!line.contains("words") || line.at("words").empty())
      throw SchemaError(where + ": missing or empty 'words'");
    if (!line.contains("category"))
      throw SchemaError(where + ": missing 'category'");
    if (!line.contains(spec.group_key))
      throw SchemaError(where + ": missing group key '" + spec.group_key + "'");

    Segment seg;
    seg.segment_id = next_id;
    for (const auto& w : line.at("words")) {
      if (!w.contains("text"))
        throw SchemaError(where + ": word missing 'text'");
      seg.tokens.push_back(w.at("text").get<std::string>());
      seg.word_boxes.push_back(quad_to_box(w, where));
    }
    BBox line_box = seg.word_boxes.front();
    for (const auto& wb : seg.word_boxes) {
      line_box.x0 = std::min(line_box.x0, wb.x0);
      line_box.y0 = std::min(line_box.y0, wb.y0);
      line_box.x1 = std::max(line_box.x1, wb.x1);
      line_box.y1 = std::max(line_box.y1, wb.y1);
    }
    seg.box = line_box;

    Entity ent;
    ent.entity_id = next_id;
    ent.span = {next_id, 0, static_cast<int>(seg.tokens.size()) - 1};
    std::string category = line.at("category").get<std::string>();
    if (!spec.label_set.empty() &&
        std::find(spec.label_set.begin(), spec.label_set.end(), category) ==
            spec.label_set.end()) {
      warn(where + ": unknown category '" + category + "', mapped to '" +
           spec.fallback_label + "'");
      category = spec.fallback_label;
    }
    ent.label = category;
    ent.group_id = line.at(spec.group_key).get<int>();

    doc.segments.push_back(std::move(seg));
    doc.entities.push_back(std::move(ent));
    ++next_id;
  }
  return doc;
}

// --- split loading --------------------------------------------------------

inline std::vector<std::filesystem::path> list_annotation_files(
    const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw InputError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json")
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  return files;
}

// FUNSD splits live under <root>/<training_data|testing_data>/annotations;
// falls back to <root>/<split> when the canonical layout is absent.
inline std::filesystem::path funsd_split_dir(const std::filesystem::path& root,
                                             const std::string& split) {
  const std::string canonical =
      split == "train" ? "training_data" : "testing_data";
  auto p = root / canonical / "annotations";
  if (std::filesystem::is_directory(p)) return p;
  return root / split;
}

inline std::filesystem::path cord_split_dir(const std::filesystem::path& root,
                                            const std::string& split) {
  const std::string canonical = split == "validation" ? "dev" : split;
  auto p = root / canonical / "json";
  if (std::filesystem::is_directory(p)) return p;
  return root / split;
}

// Loads, parses, and normalizes an entire split.
inline std::vector<Document> load_split(const DatasetSpec& spec,
                                        const WarnFn& warn = ignore_warning) {
  std::vector<Document> docs;
  std::filesystem::path dir;
  if (spec.name == DatasetName::FUNSD)
    dir = funsd_split_dir(spec.root, spec.split);
  else if (spec.name == DatasetName::CORD)
    dir = cord_split_dir(spec.root, spec.split);
  else
    throw ConfigError("load_split handles FUNSD and CORD only");

  for (const auto& path : list_annotation_files(dir)) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(path.string() + ": " + e.what());
    }
    const std::string doc_id = path.stem().string();
    Document doc;
    if (spec.name == DatasetName::FUNSD) {
      doc = parse_funsd(j, doc_id, warn);
      // FUNSD annotations carry no page size; use the drawing extent.
      double w = 1, h = 1;
      if (j.contains("image_size")) {
        w = j.at("image_size").at("width").get<double>();
        h = j.at("image_size").at("height").get<double>();
      } else {
        for (const auto& s : doc.segments) {
          w = std::max({w, double(s.box.x1)});
          h = std::max({h, double(s.box.y1)});
          for (const auto& wb : s.word_boxes) {
            w = std::max(w, double(wb.x1));
            h = std::max(h, double(wb.y1));
          }
        }
      }
      doc = normalize_coords(std::move(doc), w, h, warn);
    } else {
      doc = parse_cord(j, doc_id, spec, warn);
      doc = normalize_coords(std::move(doc), doc.page_width, doc.page_height,
                             warn);
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

}  // namespace vrdre
