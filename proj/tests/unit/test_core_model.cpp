#include <random>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "vrdre/document.hpp"

using namespace vrdre;

namespace {

std::vector<Entity> make_entities(int n) {
  std::vector<Entity> ents(n);
  for (int i = 0; i < n; ++i) {
    ents[i].entity_id = i;
    ents[i].span = {i, 0, 0};
    ents[i].label = "question";
  }
  return ents;
}

}  // namespace

TEST_CASE("gold matrix: GROUP pair and singleton") {
  auto ents = make_entities(3);
  ents[0].group_id = 1;
  ents[1].group_id = 1;
  ents[2].group_id = 2;
  auto m = build_gold_matrix(ents, {}, RelationKind::GROUP);
  CHECK(m.at(0, 1) == 1);
  CHECK(m.at(1, 0) == 1);
  CHECK(m.count_ones() == 2);
}

TEST_CASE("gold matrix: KEY_VALUE directed link") {
  auto ents = make_entities(2);
  auto m = build_gold_matrix(ents, {Link{0, 1}}, RelationKind::KEY_VALUE);
  CHECK(m.at(1, 0) == 1);
  CHECK(m.count_ones() == 1);
}

TEST_CASE("gold matrix: GROUP clique of three") {
  auto ents = make_entities(3);
  for (auto& e : ents) e.group_id = 5;
  auto m = build_gold_matrix(ents, {}, RelationKind::GROUP);
  CHECK(m.count_ones() == 6);  // all off-diagonal pairs
  CHECK(m.zero_diagonal());
}

TEST_CASE("gold matrix: bad links rejected") {
  auto ents = make_entities(2);
  CHECK_THROWS_AS(
      build_gold_matrix(ents, {Link{0, 9}}, RelationKind::KEY_VALUE),
      std::out_of_range);
  CHECK_THROWS_AS(
      build_gold_matrix(ents, {Link{1, 1}}, RelationKind::KEY_VALUE),
      std::invalid_argument);
}

TEST_CASE("gold matrix properties over random groups") {
  std::mt19937_64 rng(42);
  for (int it = 0; it < 300; ++it) {
    const int n = 1 + int(rng() % 10);
    auto ents = make_entities(n);
    for (auto& e : ents) e.group_id = int(rng() % 4);
    auto m = build_gold_matrix(ents, {}, RelationKind::GROUP);
    CHECK(m.symmetric());
    CHECK(m.zero_diagonal());
  }
}

TEST_CASE("gold matrix permutation equivariance") {
  std::mt19937_64 rng(7);
  for (int it = 0; it < 100; ++it) {
    const int n = 2 + int(rng() % 6);
    auto ents = make_entities(n);
    std::set<Link> links;
    for (int l = 0; l < n; ++l) {
      int a = int(rng() % n), b = int(rng() % n);
      if (a != b) links.insert({a, b});
    }
    std::vector<Link> lv(links.begin(), links.end());
    auto m = build_gold_matrix(ents, lv, RelationKind::KEY_VALUE);
    CHECK(m.count_ones() == int(lv.size()));

    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Link> plinks;
    for (auto& l : lv) plinks.push_back({perm[l.parent], perm[l.child]});
    auto pm = build_gold_matrix(ents, plinks, RelationKind::KEY_VALUE);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        CHECK(pm.at(perm[i], perm[j]) == m.at(i, j));
  }
}

TEST_CASE("validate_document: clean two-entity doc") {
  Document doc;
  doc.relation_kind = RelationKind::KEY_VALUE;
  for (int s = 0; s < 2; ++s) {
    Segment seg;
    seg.segment_id = s;
    seg.tokens = {"hi"};
    seg.box = {10, 10 + 50 * s, 80, 40 + 50 * s};
    seg.word_boxes = {{12, 12 + 50 * s, 70, 38 + 50 * s}};
    doc.segments.push_back(seg);
    doc.entities.push_back({s, {s, 0, 0}, s == 0 ? "question" : "answer", {}});
  }
  doc.links = {{0, 1}};
  CHECK(validate_document(doc).empty());
}

TEST_CASE("validate_document: dangling link and bad span") {
  Document doc;
  Segment seg;
  seg.segment_id = 0;
  seg.tokens = {"a", "b"};
  seg.box = {0, 0, 100, 20};
  seg.word_boxes = {{0, 0, 40, 20}, {50, 0, 100, 20}};
  doc.segments.push_back(seg);
  doc.entities.push_back({0, {0, 0, 1}, "question", {}});
  doc.entities.push_back({1, {0, 0, 5}, "answer", {}});  // span runs past seg
  doc.links.push_back({0, 99});

  auto report = validate_document(doc);
  int dangling = 0, noncontig = 0;
  for (auto& v : report) {
    if (v.code == ViolationCode::DANGLING_LINK) ++dangling;
    if (v.code == ViolationCode::NONCONTIGUOUS_SPAN) ++noncontig;
  }
  CHECK(dangling == 1);
  CHECK(noncontig == 1);
}

TEST_CASE("validate_document: violations are data, not exceptions") {
  Document doc;  // empty doc, no segments
  doc.links.push_back({3, 3});
  CHECK_NOTHROW(validate_document(doc));
  CHECK_FALSE(validate_document(doc).empty());
}
