#pragma once

// Shared test fixtures: schema-faithful FUNSD/CORD annotation writers,
// random document/matrix generators, and small model configurations.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "vrdre/config.hpp"
#include "vrdre/document.hpp"
#include "vrdre/relation_matrix.hpp"

namespace fixtures {

namespace fs = std::filesystem;
using nlohmann::json;

inline fs::path make_temp_dir(const std::string& tag) {
  auto base = fs::temp_directory_path() / ("vrdre_" + tag + "_XXXXXX");
  std::string tmpl = base.string();
  if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  return fs::path(tmpl);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) : path(make_temp_dir(tag)) {}
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

// --- FUNSD fixtures -------------------------------------------------------

// One form entry in the raw FUNSD schema.
inline json funsd_entry(int id, const std::string& label,
                        const std::vector<std::string>& words, int x, int y,
                        const std::vector<std::vector<int>>& linking) {
  json entry;
  entry["id"] = id;
  entry["label"] = label;
  std::string text;
  json jwords = json::array();
  int cx = x;
  for (const auto& w : words) {
    if (!text.empty()) text += " ";
    text += w;
    jwords.push_back({{"text", w}, {"box", {cx, y, cx + 30, y + 15}}});
    cx += 35;
  }
  entry["text"] = text;
  entry["words"] = jwords;
  entry["box"] = {x, y, cx - 5, y + 15};
  entry["linking"] = linking;
  return entry;
}

// Deterministic multi-entity FUNSD file: q/a pairs on separate rows plus a
// header. Every linking pair is listed in both endpoints (dataset habit).
inline json funsd_doc_json(uint64_t seed, int n_pairs = 3) {
  std::mt19937_64 rng(seed);
  static const std::vector<std::string> qwords = {"NAME", "DATE", "TOTAL",
                                                  "FROM", "TO", "SUBJECT"};
  static const std::vector<std::string> awords = {"john", "1998", "402",
                                                  "acme", "smith", "memo"};
  json form = json::array();
  int id = 0;
  form.push_back(funsd_entry(id++, "header", {"REPORT", "FORM"}, 300, 40, {}));
  for (int p = 0; p < n_pairs; ++p) {
    const int y = 120 + 60 * p;
    std::uniform_int_distribution<size_t> pick(0, qwords.size() - 1);
    const int qid = id;
    const int aid = id + 1;
    form.push_back(funsd_entry(qid, "question", {qwords[pick(rng)]}, 60, y,
                               {{qid, aid}}));
    form.push_back(funsd_entry(aid, "answer",
                               {awords[pick(rng)], awords[pick(rng)]}, 300, y,
                               {{qid, aid}}));
    id += 2;
  }
  return json{{"form", form}};
}

inline void write_funsd_split(const fs::path& root, const std::string& split,
                              int n_docs, uint64_t seed = 11) {
  const fs::path dir = root /
                       (split == "train" ? "training_data" : "testing_data") /
                       "annotations";
  fs::create_directories(dir);
  for (int d = 0; d < n_docs; ++d) {
    char name[32];
    std::snprintf(name, sizeof(name), "%s%05d.json", split.c_str(), d);
    std::ofstream out(dir / name);
    out << funsd_doc_json(seed + d).dump(1);
  }
}

// --- CORD fixtures --------------------------------------------------------

inline json cord_word(const std::string& text, int x, int y) {
  return json{{"text", text},
              {"quad",
               {{"x1", x}, {"y1", y}, {"x2", x + 40}, {"y2", y},
                {"x3", x + 40}, {"y3", y + 18}, {"x4", x}, {"y4", y + 18}}}};
}

// CORD-style receipt: menu lines grouped by row id, subtotal and total
// groups. `heavy` pads lines with extra words to stress window budgets.
inline json cord_doc_json(uint64_t seed, int n_menu_rows = 4,
                          int words_per_line = 2) {
  std::mt19937_64 rng(seed);
  static const std::vector<std::string> items = {"nasi", "ayam", "teh",
                                                 "kopi", "roti", "soto"};
  json lines = json::array();
  int gid = 1;
  std::uniform_int_distribution<size_t> pick(0, items.size() - 1);
  for (int r = 0; r < n_menu_rows; ++r) {
    const int y = 80 + 40 * r;
    json name_words = json::array();
    int cx = 40;
    for (int w = 0; w < words_per_line; ++w) {
      name_words.push_back(cord_word(items[pick(rng)], cx, y));
      cx += 50;
    }
    lines.push_back({{"words", name_words},
                     {"category", "menu.nm"},
                     {"group_id", gid}});
    lines.push_back({{"words", json::array({cord_word(
                         std::to_string(1000 + int(rng() % 9000)), 360, y)})},
                     {"category", "menu.price"},
                     {"group_id", gid}});
    ++gid;
  }
  const int y_tot = 80 + 40 * n_menu_rows + 30;
  lines.push_back({{"words", json::array({cord_word("total", 40, y_tot)})},
                   {"category", "total.total_price"},
                   {"group_id", gid}});
  lines.push_back(
      {{"words", json::array({cord_word(std::to_string(2000 + int(rng() % 9000)),
                                        360, y_tot)})},
       {"category", "total.total_price"},
       {"group_id", gid}});
  json doc;
  doc["valid_line"] = lines;
  doc["meta"] = {{"image_size", {{"width", 480}, {"height", 640}}}};
  return doc;
}

inline void write_cord_split(const fs::path& root, const std::string& split,
                             int n_docs, uint64_t seed = 23,
                             int n_menu_rows = 4, int words_per_line = 2) {
  const std::string dirname = split == "validation" ? "dev" : split;
  const fs::path dir = root / dirname / "json";
  fs::create_directories(dir);
  for (int d = 0; d < n_docs; ++d) {
    char name[32];
    std::snprintf(name, sizeof(name), "receipt_%05d.json", d);
    std::ofstream out(dir / name);
    out << cord_doc_json(seed + d, n_menu_rows, words_per_line).dump(1);
  }
}

// --- random in-memory documents ------------------------------------------

// Random well-formed document for property tests: one entity per segment,
// random boxes, random links or groups.
inline vrdre::Document random_document(std::mt19937_64& rng,
                                       vrdre::RelationKind kind,
                                       int max_segments = 8) {
  std::uniform_int_distribution<int> nseg_dist(1, max_segments);
  const int nseg = nseg_dist(rng);
  vrdre::Document doc;
  doc.doc_id = "rand_" + std::to_string(rng());
  doc.relation_kind = kind;
  std::uniform_int_distribution<int> coord(0, 900);
  std::uniform_int_distribution<int> nw_dist(1, 4);
  static const std::vector<std::string> pool = {"aa", "bb", "cc", "dd", "ee",
                                                "ff", "gg"};
  for (int s = 0; s < nseg; ++s) {
    vrdre::Segment seg;
    seg.segment_id = s;
    const int x = coord(rng), y = coord(rng);
    const int nw = nw_dist(rng);
    int cx = x;
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    for (int w = 0; w < nw; ++w) {
      seg.tokens.push_back(pool[pick(rng)]);
      seg.word_boxes.push_back(
          vrdre::BBox{cx, y, std::min(cx + 20, 1000), std::min(y + 10, 1000)});
      cx = std::min(cx + 24, 970);
    }
    seg.box = vrdre::BBox{x, y, std::min(cx + 20, 1000), std::min(y + 10, 1000)};
    doc.segments.push_back(seg);

    vrdre::Entity e;
    e.entity_id = s;
    e.span = {s, 0, nw - 1};
    e.label = (s % 3 == 0) ? "question" : (s % 3 == 1 ? "answer" : "other");
    if (kind == vrdre::RelationKind::GROUP) {
      e.label = "menu.nm";
      e.group_id = int(rng() % 3);
    }
    doc.entities.push_back(e);
  }
  if (kind == vrdre::RelationKind::KEY_VALUE && nseg >= 2) {
    std::uniform_int_distribution<int> pickseg(0, nseg - 1);
    const int nlinks = int(rng() % size_t(nseg));
    std::set<vrdre::Link> links;
    for (int l = 0; l < nlinks; ++l) {
      int a = pickseg(rng), b = pickseg(rng);
      if (a != b) links.insert(vrdre::Link{a, b});
    }
    doc.links.assign(links.begin(), links.end());
  }
  return doc;
}

inline vrdre::ProbMatrix random_prob_matrix(std::mt19937_64& rng, int n) {
  vrdre::ProbMatrix p(n);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (p.valid(i, j)) p.set(i, j, u(rng));
  return p;
}

// Direct per-cell evaluation of the RSF rule, written independently of the
// library implementation.
inline vrdre::RelationMatrix rsf_brute_force(const vrdre::ProbMatrix& p,
                                             double tau) {
  vrdre::RelationMatrix r(p.n);
  for (int i = 0; i < p.n; ++i) {
    for (int j = 0; j < p.n; ++j) {
      if (!p.valid(i, j)) continue;
      double row_max = -1e9;
      for (int k = 0; k < p.n; ++k)
        if (p.valid(i, k) && p.at(i, k) > row_max) row_max = p.at(i, k);
      const bool above = p.at(i, j) > 0.5;
      const bool near_max = row_max < p.at(i, j) + tau;
      if (above && near_max) r.set(i, j, 1);
    }
  }
  return r;
}

// --- small model configs --------------------------------------------------

inline vrdre::ExperimentConfig tiny_experiment() {
  vrdre::ExperimentConfig cfg;
  cfg.encoder.d = 16;
  cfg.encoder.layers = 1;
  cfg.encoder.heads = 2;
  cfg.encoder.ffn = 32;
  cfg.encoder.vocab = 128;
  cfg.encoder.max_len = 64;
  cfg.d_proj = 8;
  cfg.steps = 20;
  cfg.lr = 1e-3;
  cfg.holdout_frac = 0;
  cfg.data.synth_train_docs = 4;
  cfg.data.synth_eval_docs = 2;
  return cfg;
}

}  // namespace fixtures
