#pragma once

#include <memory>
#include <vector>

#include "vrdre/encoder.hpp"
#include "vrdre/head.hpp"
#include "vrdre/preprocess.hpp"
#include "vrdre/relation_matrix.hpp"

namespace vrdre {

struct ModelConfig {
  ToyEncoderConfig encoder;
  int d_proj = 128;
  bool lc = false;
  bool eef = false;
  bool use_variance_loss = false;
  PoolMode pooling = PoolMode::FIRST;
  double w_re = 1.0;
  double w_ee = 1.0;
  double w_var = 1.0;
  std::vector<std::string> tagset;  // used when eef
};

// Toy backbone + relation head, wired for joint forward/backward over one
// window at a time.
class Model {
 public:
  explicit Model(const ModelConfig& cfg, uint64_t seed = 0)
      : cfg_(cfg),
        encoder_(cfg.encoder, seed),
        head_(make_head_config(cfg), seed + 0x9e3779b97f4a7c15ull) {}

  const ModelConfig& config() const { return cfg_; }
  ToyEncoder& encoder() { return encoder_; }
  RelationHead& head() { return head_; }
  int head_input_dim() const { return cfg_.encoder.d + (cfg_.lc ? 4 : 0); }

  void visit_params(const ParamVisitor& fn) {
    encoder_.visit_params(fn);
    head_.visit_params(fn);
  }

  void zero_grads() {
    visit_params([](Param& p) { p.zero_grad(); });
  }

  struct WindowResult {
    double total = 0;
    double re = 0;
    double ee = 0;
    double var = 0;
    ProbMatrix probs;                 // over the window's entities
    std::vector<int> entity_ids;      // window index -> document entity id
    std::vector<int> pred_tag_ids;    // argmax EE tags (when eef)
  };

  // Forward pass over one window; when do_backward, accumulates gradients
  // of w_re*BCE + w_ee*EE + w_var*variance into all parameters.
  WindowResult run_window(const Window& win, const RelationMatrix& gold_full,
                          const std::vector<int>& gold_tag_ids,
                          bool do_backward) {
    WindowResult res;
    EncodeCache enc_cache;
    Matrix hidden = encoder_.forward(win, enc_cache);
    Matrix head_in =
        cfg_.lc ? concat_layout_lc(hidden, win.token_boxes) : hidden;

    const int m = static_cast<int>(win.entities.size());
    Matrix d_head_in = Matrix::Zero(head_in.rows(), head_in.cols());

    RelationHead::ScoreCache score_cache;
    RelationMatrix gold_sub;
    if (m >= 1) {
      Matrix emb(m, head_input_dim());
      for (int k = 0; k < m; ++k) {
        const auto& we = win.entities[k];
        emb.row(k) = pool_entity(head_in, we.first_token, we.last_token,
                                 cfg_.pooling)
                         .vec.transpose();
        res.entity_ids.push_back(we.entity_id);
      }
      res.probs = head_.relation_scores(emb, score_cache);

      gold_sub = RelationMatrix(m);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          if (a != b)
            gold_sub.set(a, b,
                         gold_full.at(res.entity_ids[a], res.entity_ids[b]));

      Matrix d_score = Matrix::Zero(m, m);
      Matrix* ds = do_backward ? &d_score : nullptr;
      res.re = relation_bce_loss_from_scores(score_cache.score, res.probs,
                                             gold_sub, ds, cfg_.w_re);
      if (cfg_.use_variance_loss)
        res.var = variance_loss(res.probs, gold_sub, ds, cfg_.w_var);
      if (do_backward) {
        Matrix d_emb = head_.relation_scores_backward(score_cache, d_score);
        for (int k = 0; k < m; ++k) {
          const auto& we = win.entities[k];
          pool_entity_backward(d_head_in, we.first_token, we.last_token,
                               cfg_.pooling, d_emb.row(k).transpose());
        }
      }
    }

    if (cfg_.eef) {
      auto ee = head_.ee_loss(head_in, gold_tag_ids,
                              do_backward ? &d_head_in : nullptr, cfg_.w_ee);
      res.ee = ee.loss;
      res.pred_tag_ids.resize(ee.probs.rows());
      for (Eigen::Index t = 0; t < ee.probs.rows(); ++t) {
        Eigen::Index arg = 0;
        ee.probs.row(t).maxCoeff(&arg);
        res.pred_tag_ids[size_t(t)] = static_cast<int>(arg);
      }
    }

    if (do_backward) {
      Matrix d_hidden = cfg_.lc ? Matrix(d_head_in.leftCols(hidden.cols()))
                                : d_head_in;
      encoder_.backward(enc_cache, d_hidden);
    }

    res.total = joint_loss({res.re, res.ee, res.var},
                           {cfg_.w_re, cfg_.eef ? cfg_.w_ee : 0.0,
                            cfg_.use_variance_loss ? cfg_.w_var : 0.0});
    return res;
  }

 private:
  static RelationHeadConfig make_head_config(const ModelConfig& cfg) {
    RelationHeadConfig hc;
    hc.d_in = cfg.encoder.d + (cfg.lc ? 4 : 0);
    hc.d_proj = cfg.d_proj;
    hc.tagset = cfg.eef ? static_cast<int>(cfg.tagset.size()) : 0;
    return hc;
  }

  ModelConfig cfg_;
  ToyEncoder encoder_;
  RelationHead head_;
};

}  // namespace vrdre
