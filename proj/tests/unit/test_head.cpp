#include <random>

#include "doctest.h"
#include "support/fixtures.hpp"
#include "vrdre/head.hpp"

using namespace vrdre;

namespace {

RelationHead unit_head() {
  // d_in = d_proj = 1, weights zeroed, biases and bilinear set to 1, so every
  // raw score is exactly 1.0.
  RelationHeadConfig cfg;
  cfg.d_in = 1;
  cfg.d_proj = 1;
  RelationHead head(cfg, 0);
  head.child_proj().v.setZero();
  head.parent_proj().v.setZero();
  head.child_bias().v(0, 0) = 1.0;
  head.parent_bias().v(0, 0) = 1.0;
  head.bilinear().v(0, 0) = 1.0;
  return head;
}

RelationMatrix random_gold(std::mt19937_64& rng, int n) {
  RelationMatrix g(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && rng() % 3 == 0) g.set(i, j, 1);
  return g;
}

}  // namespace

TEST_CASE("bilinear score of 1.0 maps through the logistic") {
  auto head = unit_head();
  Matrix e = Matrix::Random(2, 1);
  auto p = head.relation_scores(e);
  CHECK(p.at(0, 1) == doctest::Approx(0.7310585786300049).epsilon(1e-12));
  CHECK(p.at(1, 0) == doctest::Approx(0.7310585786300049).epsilon(1e-12));
}

TEST_CASE("zero bilinear matrix gives chance probabilities") {
  RelationHeadConfig cfg;
  cfg.d_in = 8;
  cfg.d_proj = 4;
  RelationHead head(cfg, 3);
  head.bilinear().v.setZero();
  Matrix e = Matrix::Random(5, 8);
  auto p = head.relation_scores(e);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      if (p.valid(i, j)) CHECK(p.at(i, j) == doctest::Approx(0.5));
}

TEST_CASE("relation scores: validation and determinism") {
  RelationHeadConfig cfg;
  cfg.d_in = 6;
  cfg.d_proj = 4;
  RelationHead head(cfg, 4);
  CHECK_THROWS_AS(head.relation_scores(Matrix::Random(3, 5)), InputError);
  CHECK_THROWS_AS(head.relation_scores(Matrix(0, 6)), InputError);
  Matrix bad = Matrix::Random(2, 6);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(head.relation_scores(bad), InputError);

  Matrix e = Matrix::Random(4, 6);
  auto a = head.relation_scores(e);
  auto b = head.relation_scores(e);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (a.valid(i, j)) CHECK(a.at(i, j) == b.at(i, j));
}

TEST_CASE("relation scores are permutation-equivariant") {
  RelationHeadConfig cfg;
  cfg.d_in = 6;
  cfg.d_proj = 5;
  RelationHead head(cfg, 9);
  std::mt19937_64 rng(9);
  const int n = 5;
  Matrix e = Matrix::Random(n, 6);
  auto p = head.relation_scores(e);
  std::vector<int> perm = {2, 0, 4, 1, 3};
  Matrix ep(n, 6);
  for (int i = 0; i < n; ++i) ep.row(perm[size_t(i)]) = e.row(i);
  auto pp = head.relation_scores(ep);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (p.valid(i, j))
        CHECK(pp.at(perm[size_t(i)], perm[size_t(j)]) ==
              doctest::Approx(p.at(i, j)).epsilon(1e-12));
}

TEST_CASE("bilinear head is direction-asymmetric in general") {
  RelationHeadConfig cfg;
  cfg.d_in = 8;
  cfg.d_proj = 8;
  RelationHead head(cfg, 17);
  std::mt19937_64 rng(17);
  Matrix e = Matrix::Random(2, 8);
  auto p = head.relation_scores(e);
  CHECK(std::abs(p.at(0, 1) - p.at(1, 0)) > 1e-9);

  // identical projections + symmetric A force symmetry
  head.parent_proj().v = head.child_proj().v;
  head.parent_bias().v = head.child_bias().v;
  Matrix sym = 0.5 * (head.bilinear().v + head.bilinear().v.transpose());
  head.bilinear().v = sym;
  auto ps = head.relation_scores(e);
  CHECK(ps.at(0, 1) == doctest::Approx(ps.at(1, 0)).epsilon(1e-12));
}

TEST_CASE("BCE frozen values") {
  ProbMatrix p(2);
  p.set(0, 1, 0.5);
  p.set(1, 0, 0.5);
  RelationMatrix g(2);
  g.set(1, 0, 1);
  CHECK(relation_bce_loss(p, g) ==
        doctest::Approx(0.6931471805599453).epsilon(1e-12));

  ProbMatrix q(2);
  q.set(0, 1, 0.99);
  q.set(1, 0, 0.99);
  RelationMatrix ones(2);
  ones.set(0, 1, 1);
  ones.set(1, 0, 1);
  CHECK(relation_bce_loss(q, ones) ==
        doctest::Approx(0.01005033585350145).epsilon(1e-10));
}

TEST_CASE("BCE approaches zero near the gold and rejects endpoints") {
  ProbMatrix p(2);
  p.set(0, 1, 1e-9);
  p.set(1, 0, 1.0 - 1e-9);
  RelationMatrix g(2);
  g.set(1, 0, 1);
  CHECK(relation_bce_loss(p, g) < 1e-8);

  ProbMatrix bad(2);
  bad.set(0, 1, 1.0);
  bad.set(1, 0, 0.5);
  CHECK_THROWS_AS(relation_bce_loss(bad, g), std::domain_error);
  bad.set(0, 1, 0.0);
  CHECK_THROWS_AS(relation_bce_loss(bad, g), std::domain_error);
}

TEST_CASE("BCE gradient matches (p - y) / count") {
  ProbMatrix p(2);
  p.set(0, 1, 0.8);
  p.set(1, 0, 0.3);
  RelationMatrix g(2);
  g.set(0, 1, 1);
  Matrix d = Matrix::Zero(2, 2);
  relation_bce_loss(p, g, &d);
  CHECK(d(0, 1) == doctest::Approx((0.8 - 1.0) / 2).epsilon(1e-12));
  CHECK(d(1, 0) == doctest::Approx(0.3 / 2).epsilon(1e-12));
  CHECK(d(0, 0) == 0.0);
}

TEST_CASE("score-space BCE agrees with the probability form") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int it = 0; it < 100; ++it) {
    const int n = 2 + int(rng() % 5);
    Matrix s(n, n);
    ProbMatrix p(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        s(i, j) = u(rng);
        if (p.valid(i, j)) p.set(i, j, logistic(s(i, j)));
      }
    auto g = random_gold(rng, n);
    Matrix da = Matrix::Zero(n, n), db = Matrix::Zero(n, n);
    const double a = relation_bce_loss(p, g, &da);
    const double b = relation_bce_loss_from_scores(s, p, g, &db);
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
    CHECK((da - db).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("EE loss frozen values") {
  RelationHeadConfig cfg;
  cfg.d_in = 4;
  cfg.d_proj = 4;
  cfg.tagset = 7;
  RelationHead head(cfg, 1);
  // uniform logits -> ln(7)
  head.visit_params([](Param& p) { p.v.setZero(); });
  Matrix hidden = Matrix::Zero(3, 4);
  auto res = head.ee_loss(hidden, {0, 3, 6});
  CHECK(std::abs(res.loss - 1.9459101490553132) < 1e-9);  // ln 7
  CHECK(std::abs(res.loss - std::log(7.0)) < 1e-12);

  // a strongly peaked gold logit -> near zero
  head.child_bias();  // no-op, keep params zero except the EE bias
  RelationHead peaked(cfg, 1);
  peaked.visit_params([](Param& p) { p.v.setZero(); });
  Matrix h2 = Matrix::Ones(1, 4);
  // push gold class logit far up via ee weights
  peaked.visit_params([](Param& p) {
    if (p.name == "head.ee_w") p.v.row(2).setConstant(20.0);
  });
  auto res2 = peaked.ee_loss(h2, {2});
  CHECK(res2.loss < 1e-6);
  CHECK_THROWS_AS(peaked.ee_loss(h2, {9}), InputError);
}

TEST_CASE("EE disabled by config") {
  RelationHeadConfig cfg;
  cfg.d_in = 4;
  cfg.d_proj = 4;
  RelationHead head(cfg, 1);
  CHECK_THROWS_AS(head.ee_loss(Matrix::Zero(1, 4), {0}), ConfigError);
}

TEST_CASE("variance loss frozen values") {
  RelationMatrix g(3);
  g.set(0, 1, 1);
  g.set(0, 2, 1);

  ProbMatrix equal(3);
  equal.set(0, 1, 0.8);
  equal.set(0, 2, 0.8);
  CHECK(variance_loss(equal, g) == 0.0);

  ProbMatrix split(3);
  split.set(0, 1, 0.9);
  split.set(0, 2, 0.5);
  CHECK(variance_loss(split, g) == doctest::Approx(0.04).epsilon(1e-12));

  // no multi-parent child -> zero by convention
  RelationMatrix single(3);
  single.set(0, 1, 1);
  CHECK(variance_loss(split, single) == 0.0);
}

TEST_CASE("joint loss combines weighted components") {
  CHECK(joint_loss({1.0, 2.0, 3.0}, {1.0, 0.5, 0.0}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(joint_loss({1.0}, {1.0, 2.0}), InputError);
  CHECK_THROWS_AS(joint_loss({1.0}, {-0.1}), InputError);

  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int it = 0; it < 100; ++it) {
    std::vector<double> c = {u(rng), u(rng), u(rng)};
    std::vector<double> w = {u(rng), u(rng), u(rng)};
    CHECK(joint_loss(c, w) ==
          doctest::Approx(w[0] * c[0] + w[1] * c[1] + w[2] * c[2])
              .epsilon(1e-12));
  }
}

TEST_CASE("gradient descent on the head drives BCE down") {
  RelationHeadConfig cfg;
  cfg.d_in = 6;
  cfg.d_proj = 6;
  RelationHead head(cfg, 5);
  std::mt19937_64 rng(5);
  Matrix e = Matrix::Random(4, 6);
  auto gold = random_gold(rng, 4);

  double first = -1, last = -1;
  for (int step = 0; step < 100; ++step) {
    head.visit_params([](Param& p) { p.g.setZero(); });
    RelationHead::ScoreCache cache;
    auto p = head.relation_scores(e, cache);
    Matrix d_score = Matrix::Zero(4, 4);
    const double loss =
        relation_bce_loss_from_scores(cache.score, p, gold, &d_score);
    if (step == 0) first = loss;
    last = loss;
    head.relation_scores_backward(cache, d_score);
    head.visit_params([](Param& p) { p.v -= 0.5 * p.g; });
  }
  CHECK(last < first);
  CHECK(last < 0.3);
}
