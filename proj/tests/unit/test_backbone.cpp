#include <random>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "vrdre/encoder.hpp"

using namespace vrdre;

namespace {

ToyEncoderConfig small_cfg() {
  ToyEncoderConfig c;
  c.d = 16;
  c.layers = 2;
  c.heads = 2;
  c.ffn = 24;
  c.vocab = 64;
  c.max_len = 32;
  return c;
}

Window make_window(std::mt19937_64& rng, int T, int vocab) {
  Window w;
  w.doc_id = "t";
  std::uniform_int_distribution<int> id(0, vocab - 1);
  std::uniform_int_distribution<int> c(0, 900);
  for (int t = 0; t < T; ++t) {
    w.token_ids.push_back(id(rng));
    const int x = c(rng), y = c(rng);
    w.token_boxes.push_back({x, y, x + 50, y + 20});
    w.token_to_word.emplace_back(0, t);
  }
  w.attention_mask.assign(T, 1);
  return w;
}

}  // namespace

TEST_CASE("encode: shape, finiteness, determinism") {
  std::mt19937_64 rng(1);
  ToyEncoder enc(small_cfg(), 11);
  auto win = make_window(rng, 7, 64);
  auto h = enc.encode(win);
  CHECK(h.rows() == 7);
  CHECK(h.cols() == 16);
  CHECK(h.allFinite());
  CHECK(enc.encode(win) == h);
}

TEST_CASE("encode: sensitive to a single box bucket change") {
  std::mt19937_64 rng(2);
  ToyEncoder enc(small_cfg(), 5);
  auto win = make_window(rng, 5, 64);
  auto a = enc.encode(win);
  win.token_boxes[2].x0 += 1;  // different bucket for one coordinate
  auto b = enc.encode(win);
  CHECK((a - b).cwiseAbs().maxCoeff() > 0);
}

TEST_CASE("encode: input validation") {
  std::mt19937_64 rng(3);
  ToyEncoder enc(small_cfg(), 5);
  Window empty;
  CHECK_THROWS_AS(enc.encode(empty), InputError);
  auto too_long = make_window(rng, 33, 64);
  CHECK_THROWS_AS(enc.encode(too_long), InputError);
}

TEST_CASE("encode: finite over fuzzed windows") {
  std::mt19937_64 rng(4);
  ToyEncoder enc(small_cfg(), 7);
  for (int it = 0; it < 100; ++it) {
    auto win = make_window(rng, 1 + int(rng() % 20), 64);
    CHECK(enc.encode(win).allFinite());
  }
}

TEST_CASE("layout concatenation appends scaled coordinates") {
  Matrix h = Matrix::Random(3, 16);
  std::vector<BBox> boxes = {{0, 0, 1000, 1000}, {250, 500, 750, 900},
                             {1, 2, 3, 4}};
  auto out = concat_layout_lc(h, boxes);
  CHECK(out.cols() == 20);
  CHECK(out.leftCols(16) == h);
  CHECK(out(0, 16) == 0.0);
  CHECK(out(0, 17) == 0.0);
  CHECK(out(0, 18) == 1.0);
  CHECK(out(0, 19) == 1.0);
  CHECK(out(1, 16) == doctest::Approx(0.25));
  boxes.pop_back();
  CHECK_THROWS_AS(concat_layout_lc(h, boxes), InputError);
}

TEST_CASE("entity pooling: FIRST and MEAN") {
  Matrix h(4, 3);
  h << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  auto first = pool_entity(h, 1, 3, PoolMode::FIRST);
  CHECK(first.vec.transpose() == h.row(1));
  auto mean = pool_entity(h, 1, 2, PoolMode::MEAN);
  CHECK(mean.vec(0) == doctest::Approx(5.5));
  // single-token span: FIRST == MEAN
  auto f1 = pool_entity(h, 2, 2, PoolMode::FIRST);
  auto m1 = pool_entity(h, 2, 2, PoolMode::MEAN);
  CHECK(f1.vec == m1.vec);
  CHECK_THROWS_AS(pool_entity(h, 3, 2, PoolMode::MEAN), InputError);
  CHECK_THROWS_AS(pool_entity(h, 0, 4, PoolMode::MEAN), InputError);
}

TEST_CASE("MEAN pooling is invariant to row permutation within the span") {
  std::mt19937_64 rng(6);
  Matrix h = Matrix::Random(6, 8);
  auto base = pool_entity(h, 1, 4, PoolMode::MEAN);
  std::vector<int> perm = {3, 1, 4, 2};
  Matrix hp = h;
  for (int k = 0; k < 4; ++k) hp.row(1 + k) = h.row(perm[size_t(k)]);
  auto permuted = pool_entity(hp, 1, 4, PoolMode::MEAN);
  CHECK((base.vec - permuted.vec).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pooling backward scatters gradients") {
  Matrix d = Matrix::Zero(4, 3);
  Vector g(3);
  g << 1, 2, 3;
  pool_entity_backward(d, 1, 2, PoolMode::MEAN, g);
  CHECK(d(1, 0) == doctest::Approx(0.5));
  CHECK(d(2, 2) == doctest::Approx(1.5));
  CHECK(d(0, 0) == 0.0);
  Matrix df = Matrix::Zero(4, 3);
  pool_entity_backward(df, 2, 2, PoolMode::FIRST, g);
  CHECK(df.row(2).transpose() == g);
}
