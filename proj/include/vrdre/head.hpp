#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "vrdre/errors.hpp"
#include "vrdre/param.hpp"
#include "vrdre/relation_matrix.hpp"

namespace vrdre {

inline double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + e^x) without overflow
inline double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

struct RelationHeadConfig {
  int d_in = 128;   // entity embedding width (d, or d+4 with LC)
  int d_proj = 128;
  int tagset = 0;   // 0 disables the EE classifier

  bool operator==(const RelationHeadConfig&) const = default;
};

// Bilinear relation scorer with separate child/parent projections, plus the
// token-level EE classifier. P[i][j] = logistic((Wp e_j + bp) A (Wc e_i + bc)^T).
class RelationHead {
 public:
  explicit RelationHead(const RelationHeadConfig& cfg, uint64_t seed = 0)
      : cfg_(cfg) {
    wc_ = Param("head.wc", cfg.d_proj, cfg.d_in);
    bc_ = Param("head.bc", 1, cfg.d_proj);
    wp_ = Param("head.wp", cfg.d_proj, cfg.d_in);
    bp_ = Param("head.bp", 1, cfg.d_proj);
    bilinear_ = Param("head.bilinear", cfg.d_proj, cfg.d_proj);
    if (cfg.tagset > 0) {
      ee_w_ = Param("head.ee_w", cfg.tagset, cfg.d_in);
      ee_b_ = Param("head.ee_b", 1, cfg.tagset);
    }
    init(seed);
  }

  const RelationHeadConfig& config() const { return cfg_; }

  void init(uint64_t seed) {
    std::mt19937_64 rng(seed);
    init_uniform_fanin(wc_, rng, cfg_.d_in);
    init_uniform_fanin(wp_, rng, cfg_.d_in);
    init_uniform_fanin(bilinear_, rng, cfg_.d_proj);
    if (cfg_.tagset > 0) init_uniform_fanin(ee_w_, rng, cfg_.d_in);
  }

  void visit_params(const ParamVisitor& fn) {
    fn(wc_);
    fn(bc_);
    fn(wp_);
    fn(bp_);
    fn(bilinear_);
    if (cfg_.tagset > 0) {
      fn(ee_w_);
      fn(ee_b_);
    }
  }

  Param& child_proj() { return wc_; }
  Param& child_bias() { return bc_; }
  Param& parent_proj() { return wp_; }
  Param& parent_bias() { return bp_; }
  Param& bilinear() { return bilinear_; }

  struct ScoreCache {
    Matrix entity_emb;  // n x d_in
    Matrix child;       // n x d_proj
    Matrix parent;      // n x d_proj
    Matrix score;       // n x n raw bilinear scores
  };

  ProbMatrix relation_scores(const Matrix& entity_emb, ScoreCache& cache) {
    if (entity_emb.rows() < 1) throw InputError("need at least one entity");
    if (entity_emb.cols() != cfg_.d_in)
      throw InputError("entity embedding width mismatch");
    if (!entity_emb.allFinite()) throw InputError("non-finite embeddings");
    const int n = static_cast<int>(entity_emb.rows());
    cache.entity_emb = entity_emb;
    cache.child =
        (entity_emb * wc_.v.transpose()).rowwise() + bc_.v.row(0);
    cache.parent =
        (entity_emb * wp_.v.transpose()).rowwise() + bp_.v.row(0);
    cache.score =
        cache.child * bilinear_.v.transpose() * cache.parent.transpose();
    ProbMatrix p(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (p.valid(i, j)) p.set(i, j, logistic(cache.score(i, j)));
    return p;
  }

  ProbMatrix relation_scores(const Matrix& entity_emb) {
    ScoreCache cache;
    return relation_scores(entity_emb, cache);
  }

  // Propagates a raw-score gradient back; returns d(entity embeddings).
  Matrix relation_scores_backward(const ScoreCache& c, const Matrix& d_score) {
    Matrix d_child = d_score * c.parent * bilinear_.v;
    Matrix d_parent = d_score.transpose() * c.child * bilinear_.v.transpose();
    bilinear_.g += c.parent.transpose() * d_score.transpose() * c.child;
    wc_.g += d_child.transpose() * c.entity_emb;
    bc_.g.row(0) += d_child.colwise().sum();
    wp_.g += d_parent.transpose() * c.entity_emb;
    bp_.g.row(0) += d_parent.colwise().sum();
    return d_child * wc_.v + d_parent * wp_.v;
  }

  // Token-tag cross-entropy. Returns mean loss over tokens and per-token tag
  // probabilities; optionally accumulates gradients (scaled by weight) into
  // the EE parameters and *d_hidden.
  struct EeResult {
    double loss = 0;
    Matrix probs;  // T x tagset
  };

  EeResult ee_loss(const Matrix& hidden, const std::vector<int>& gold_tags,
                   Matrix* d_hidden = nullptr, double weight = 1.0) {
    if (cfg_.tagset <= 0) throw ConfigError("EE classifier disabled");
    const int T = static_cast<int>(hidden.rows());
    if (T != static_cast<int>(gold_tags.size()))
      throw InputError("hidden/tag length mismatch");
    Matrix logits = (hidden * ee_w_.v.transpose()).rowwise() + ee_b_.v.row(0);
    EeResult res;
    res.probs.resize(T, cfg_.tagset);
    double total = 0;
    for (int t = 0; t < T; ++t) {
      const int y = gold_tags[t];
      if (y < 0 || y >= cfg_.tagset) throw InputError("unknown gold tag id");
      const double mx = logits.row(t).maxCoeff();
      Eigen::RowVectorXd ex = (logits.row(t).array() - mx).exp();
      const double z = ex.sum();
      res.probs.row(t) = ex / z;
      total += -(logits(t, y) - mx - std::log(z));
    }
    res.loss = total / T;
    if (d_hidden) {
      Matrix d_logits = res.probs;
      for (int t = 0; t < T; ++t) d_logits(t, gold_tags[t]) -= 1.0;
      d_logits *= weight / T;
      ee_w_.g += d_logits.transpose() * hidden;
      ee_b_.g.row(0) += d_logits.colwise().sum();
      *d_hidden += d_logits * ee_w_.v;
    }
    return res;
  }

 private:
  RelationHeadConfig cfg_;
  Param wc_, bc_, wp_, bp_, bilinear_;
  Param ee_w_, ee_b_;
};

// --- relation losses ------------------------------------------------------

// Mean binary cross-entropy over valid cells, full matrix (no negative
// sampling). If d_score is given, the gradient w.r.t. raw scores (scaled by
// weight) is accumulated into it; this path is numerically exact because
// dL/dscore = (p - y) / n_valid.
inline double relation_bce_loss(const ProbMatrix& p, const RelationMatrix& gold,
                                Matrix* d_score = nullptr,
                                double weight = 1.0) {
  if (p.n != gold.n) throw InputError("prob/gold size mismatch");
  double total = 0;
  int count = 0;
  for (int i = 0; i < p.n; ++i)
    for (int j = 0; j < p.n; ++j)
      if (p.valid(i, j)) ++count;
  if (count == 0) return 0.0;
  for (int i = 0; i < p.n; ++i) {
    for (int j = 0; j < p.n; ++j) {
      if (!p.valid(i, j)) continue;
      const double pij = p.at(i, j);
      if (!(pij > 0.0) || !(pij < 1.0))
        throw std::domain_error("probability outside (0,1)");
      const double y = gold.at(i, j);
      total += -(y * std::log(pij) + (1.0 - y) * std::log(1.0 - pij));
      if (d_score) (*d_score)(i, j) += weight * (pij - y) / count;
    }
  }
  return total / count;
}

// Same objective computed from raw scores; safe when logistic saturates.
inline double relation_bce_loss_from_scores(const Matrix& score,
                                            const ProbMatrix& p,
                                            const RelationMatrix& gold,
                                            Matrix* d_score = nullptr,
                                            double weight = 1.0) {
  int count = 0;
  for (int i = 0; i < p.n; ++i)
    for (int j = 0; j < p.n; ++j)
      if (p.valid(i, j)) ++count;
  if (count == 0) return 0.0;
  double total = 0;
  for (int i = 0; i < p.n; ++i) {
    for (int j = 0; j < p.n; ++j) {
      if (!p.valid(i, j)) continue;
      const double s = score(i, j);
      const double y = gold.at(i, j);
      total += softplus(s) - y * s;
      if (d_score) (*d_score)(i, j) += weight * (logistic(s) - y) / count;
    }
  }
  return total / count;
}

// Population variance of each multi-parent child's gold-parent
// probabilities, averaged over such children. Training-time regularizer for
// the RSF rule.
inline double variance_loss(const ProbMatrix& p, const RelationMatrix& gold,
                            Matrix* d_score = nullptr, double weight = 1.0) {
  if (p.n != gold.n) throw InputError("prob/gold size mismatch");
  double total = 0;
  int children = 0;
  // first pass: count qualifying children
  std::vector<std::vector<int>> parents(p.n);
  for (int i = 0; i < p.n; ++i) {
    for (int j = 0; j < p.n; ++j)
      if (p.valid(i, j) && gold.at(i, j)) parents[i].push_back(j);
    if (parents[i].size() >= 2) ++children;
  }
  if (children == 0) return 0.0;
  for (int i = 0; i < p.n; ++i) {
    const auto& ks = parents[i];
    if (ks.size() < 2) continue;
    const double m = double(ks.size());
    double mean = 0;
    for (int k : ks) mean += p.at(i, k);
    mean /= m;
    double var = 0;
    for (int k : ks) var += (p.at(i, k) - mean) * (p.at(i, k) - mean);
    var /= m;
    total += var;
    if (d_score) {
      for (int k : ks) {
        const double pij = p.at(i, k);
        const double dp = 2.0 * (pij - mean) / m / children;
        (*d_score)(i, k) += weight * dp * pij * (1.0 - pij);
      }
    }
  }
  return total / children;
}

inline double joint_loss(const std::vector<double>& components,
                         const std::vector<double>& weights) {
  if (components.size() != weights.size())
    throw InputError("component/weight count mismatch");
  double total = 0;
  for (size_t i = 0; i < components.size(); ++i) {
    if (weights[i] < 0) throw InputError("loss weights must be >= 0");
    total += weights[i] * components[i];
  }
  return total;
}

}  // namespace vrdre
