#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "vrdre/checkpoint.hpp"
#include "vrdre/config.hpp"
#include "vrdre/dataset.hpp"
#include "vrdre/decode.hpp"
#include "vrdre/json_io.hpp"
#include "vrdre/metrics.hpp"
#include "vrdre/model.hpp"
#include "vrdre/synthetic.hpp"

namespace vrdre {

// --- optimizer ------------------------------------------------------------

// First-order adaptive-moment optimizer (Adam).
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::function<void(const ParamVisitor&)>& visit) {
    ++t_;
    size_t idx = 0;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    visit([&](Param& p) {
      if (idx >= m_.size()) {
        m_.push_back(Matrix::Zero(p.v.rows(), p.v.cols()));
        v_.push_back(Matrix::Zero(p.v.rows(), p.v.cols()));
      }
      Matrix& m = m_[idx];
      Matrix& v = v_[idx];
      m = beta1_ * m + (1.0 - beta1_) * p.g;
      v = beta2_ * v + (1.0 - beta2_) * p.g.cwiseProduct(p.g);
      p.v.array() -= lr_ * (m.array() / bc1) /
                     ((v.array() / bc2).sqrt() + eps_);
      ++idx;
    });
  }

 private:
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  std::vector<Matrix> m_, v_;
};

// --- data loading ---------------------------------------------------------

inline std::vector<Document> load_canonical_dir(
    const std::filesystem::path& dir) {
  std::vector<Document> docs;
  for (const auto& path : list_annotation_files(dir)) {
    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    docs.push_back(document_from_json(j));
  }
  return docs;
}

inline std::vector<Document> load_documents(const DataConfig& data,
                                            const std::string& split,
                                            const WarnFn& warn = ignore_warning) {
  switch (data.format) {
    case DataFormat::GENERATE: {
      if (data.name != DatasetName::SYNTHETIC)
        throw ConfigError("format=generate requires the synthetic dataset");
      // Train and eval docs come from disjoint seed-derived streams.
      if (split == data.train_split)
        return make_synthetic_corpus(data.synth_train_docs, data.synth_seed);
      return make_synthetic_corpus(data.synth_eval_docs,
                                   data.synth_seed + 0x51ed270b7a3e13b5ull);
    }
    case DataFormat::CANONICAL:
      return load_canonical_dir(std::filesystem::path(data.root) / split);
    case DataFormat::RAW: {
      DatasetSpec spec;
      spec.name = data.name;
      spec.root = data.root;
      spec.split = split;
      spec.group_key = data.group_key;
      spec.label_set = data.label_set;
      if (spec.label_set.empty() && data.name == DatasetName::FUNSD)
        spec.label_set = funsd_labels();
      return load_split(spec, warn);
    }
  }
  throw ConfigError("unhandled data format");
}

inline std::vector<std::string> derive_label_set(
    const std::vector<Document>& docs) {
  std::set<std::string> labels;
  for (const auto& d : docs)
    for (const auto& e : d.entities) labels.insert(e.label);
  return {labels.begin(), labels.end()};
}

// --- document pipeline ----------------------------------------------------

// Static (non-stochastic) preprocessing: entity markers, then BBO ordering.
inline Document preprocess_static(Document doc, const ExperimentConfig& cfg) {
  if (cfg.em != MarkerMode::NONE) {
    MarkerScheme scheme;
    scheme.mode = cfg.em;
    doc = inject_entity_markers(doc, scheme);
  }
  if (cfg.bbo) doc = order_segments_bbo(doc);
  return doc;
}

inline std::vector<int> tag_ids_for_window(
    const Window& win, const std::vector<std::string>& label_set,
    const std::vector<std::string>& tagset) {
  auto tags = iob_gold_tags(win, label_set);
  std::vector<int> ids(tags.size());
  for (size_t t = 0; t < tags.size(); ++t) {
    auto it = std::find(tagset.begin(), tagset.end(), tags[t]);
    if (it == tagset.end()) throw InputError("tag outside tagset: " + tags[t]);
    ids[t] = static_cast<int>(it - tagset.begin());
  }
  return ids;
}

// --- prediction / evaluation ---------------------------------------------

struct EvalOutput {
  MetricsReport report;
  std::vector<DocPrediction> predictions;
};

inline DocPrediction predict_document(Model& model, const Document& raw_doc,
                                      const ExperimentConfig& cfg,
                                      const Tokenizer& tokenizer,
                                      const std::vector<std::string>& label_set,
                                      const std::vector<std::string>& tagset,
                                      std::vector<std::vector<std::string>>*
                                          pred_tags_out = nullptr,
                                      std::vector<std::vector<std::string>>*
                                          gold_tags_out = nullptr) {
  Document doc = preprocess_static(raw_doc, cfg);
  const RelationMatrix gold = build_gold_matrix(doc);
  auto windows =
      tokenize_and_window(doc, tokenizer, cfg.encoder.max_len, cfg.stride);

  DocPrediction pred;
  pred.doc_id = doc.doc_id;
  std::map<int, int> entity_window;  // entity id -> window index
  for (size_t w = 0; w < windows.size(); ++w)
    for (const auto& we : windows[w].entities)
      entity_window[we.entity_id] = static_cast<int>(w);

  for (auto& win : windows) {
    std::vector<int> tag_ids;
    if (cfg.eef) tag_ids = tag_ids_for_window(win, label_set, tagset);
    auto res = model.run_window(win, gold, tag_ids, /*do_backward=*/false);
    if (cfg.eef && pred_tags_out) {
      std::vector<std::string> ptags;
      for (int id : res.pred_tag_ids) ptags.push_back(tagset[size_t(id)]);
      pred_tags_out->push_back(std::move(ptags));
      gold_tags_out->push_back(iob_gold_tags(win, label_set));
    }
    if (res.entity_ids.empty()) continue;
    ProbMatrix probs = res.probs;
    if (doc.relation_kind == RelationKind::GROUP) probs = symmetrize(probs);
    RelationMatrix decoded =
        cfg.rsf ? rsf_decode(probs, cfg.tau) : threshold_decode(probs);
    for (int i = 0; i < decoded.n; ++i) {
      for (int j = 0; j < decoded.n; ++j) {
        if (!decoded.at(i, j)) continue;
        const std::pair<int, int> pair{res.entity_ids[i], res.entity_ids[j]};
        pred.pairs.insert(pair);
        pred.probs[pair] = probs.at(i, j);
      }
    }
  }
  // Gold pairs with endpoints in different windows are unpredictable here.
  for (int i = 0; i < gold.n; ++i)
    for (int j = 0; j < gold.n; ++j)
      if (gold.at(i, j) && entity_window[i] != entity_window[j])
        pred.cross_window_gold.insert({i, j});
  return pred;
}

inline EvalOutput evaluate_split(Model& model,
                                 const std::vector<Document>& docs,
                                 const ExperimentConfig& cfg,
                                 const Tokenizer& tokenizer,
                                 const std::vector<std::string>& label_set,
                                 const std::vector<std::string>& tagset) {
  EvalOutput out;
  std::vector<std::vector<std::string>> pred_tags, gold_tags;
  for (const auto& doc : docs)
    out.predictions.push_back(predict_document(model, doc, cfg, tokenizer,
                                               label_set, tagset, &pred_tags,
                                               &gold_tags));
  const RelationKind kind =
      docs.empty() ? RelationKind::KEY_VALUE : docs.front().relation_kind;
  out.report = evaluate_relations(out.predictions, docs, kind);
  if (cfg.eef && !pred_tags.empty())
    out.report.entity_f1 = evaluate_entities(pred_tags, gold_tags).f1;
  return out;
}

// --- training -------------------------------------------------------------

struct TrainLogEntry {
  int step = 0;
  double loss = 0, re = 0, ee = 0, var = 0;
};

struct TrainResult {
  std::vector<TrainLogEntry> log;
  double best_holdout_f1 = -1;
  int best_step = -1;
  std::string selection_rule;
  std::vector<std::string> label_set;
  std::vector<std::string> tagset;
};

class Trainer {
 public:
  Trainer(const ExperimentConfig& cfg, std::vector<Document> train_docs)
      : cfg_(cfg), tokenizer_(cfg.encoder.vocab) {
    if (train_docs.empty()) throw InputError("empty training split");
    label_set_ = cfg.data.label_set.empty() ? derive_label_set(train_docs)
                                            : cfg.data.label_set;
    tagset_ = iob_tagset(label_set_);

    // Seed-derived holdout for checkpoint selection.
    std::mt19937_64 split_rng(cfg.seed ^ 0xc2b2ae3d27d4eb4full);
    std::vector<size_t> order(train_docs.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), split_rng);
    const size_t n_hold =
        cfg.holdout_frac > 0
            ? std::min(train_docs.size() - 1,
                       size_t(std::llround(cfg.holdout_frac *
                                           double(train_docs.size()))))
            : 0;
    for (size_t k = 0; k < order.size(); ++k) {
      if (k < n_hold)
        holdout_.push_back(train_docs[order[k]]);
      else
        train_.push_back(train_docs[order[k]]);
    }

    ModelConfig mc;
    mc.encoder = cfg.encoder;
    mc.d_proj = cfg.d_proj;
    mc.lc = cfg.lc;
    mc.eef = cfg.eef;
    mc.use_variance_loss = cfg.use_variance_loss;
    mc.pooling = cfg.pooling;
    mc.w_re = cfg.w_re;
    mc.w_ee = cfg.w_ee;
    mc.w_var = cfg.w_var;
    mc.tagset = tagset_;
    model_ = std::make_unique<Model>(mc, cfg.seed);
  }

  Model& model() { return *model_; }
  const Tokenizer& tokenizer() const { return tokenizer_; }
  const std::vector<std::string>& label_set() const { return label_set_; }
  const std::vector<std::string>& tagset() const { return tagset_; }

  TrainResult train() {
    TrainResult result;
    result.label_set = label_set_;
    result.tagset = tagset_;
    result.selection_rule =
        holdout_.empty() ? "final step (no holdout)"
                         : "best held-out relation F1";

    // BBO/EM are static; BBS is re-drawn per batch below.
    std::vector<Document> docs;
    docs.reserve(train_.size());
    for (const auto& d : train_) docs.push_back(preprocess_static(d, cfg_));
    std::vector<RelationMatrix> golds;
    for (const auto& d : docs) golds.push_back(build_gold_matrix(d));

    AdamOptimizer opt(cfg_.lr);
    std::mt19937_64 order_rng(cfg_.seed ^ 0xa0761d6478bd642full);
    std::mt19937_64 bbs_rng(cfg_.seed ^ 0xe7037ed1a0b428dbull);
    std::vector<size_t> order(docs.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), order_rng);
    size_t cursor = 0;

    const int eval_every =
        cfg_.eval_every > 0 ? cfg_.eval_every : std::max(cfg_.steps / 10, 1);
    std::vector<Matrix> best_params;

    auto visit = [this](const ParamVisitor& fn) { model_->visit_params(fn); };

    for (int step = 1; step <= cfg_.steps; ++step) {
      model_->zero_grads();
      double loss = 0, re = 0, ee = 0, var = 0;
      int n_windows = 0;
      for (int b = 0; b < cfg_.batch_size; ++b) {
        if (cursor >= order.size()) {
          std::shuffle(order.begin(), order.end(), order_rng);
          cursor = 0;
        }
        const size_t di = order[cursor++];
        Document doc = docs[di];
        const RelationMatrix& gold = golds[di];
        if (cfg_.bbs) {
          doc = shuffle_segments_bbs(std::move(doc), bbs_rng());
          // presentation-only: the gold relation set must be unchanged
          if (build_gold_matrix(doc) != gold)
            throw std::logic_error("BBS altered gold relations");
        }
        auto windows = tokenize_and_window(doc, tokenizer_,
                                           cfg_.encoder.max_len, cfg_.stride);
        for (const auto& win : windows) {
          std::vector<int> tag_ids;
          if (cfg_.eef) tag_ids = tag_ids_for_window(win, label_set_, tagset_);
          auto res = model_->run_window(win, gold, tag_ids, true);
          loss += res.total;
          re += res.re;
          ee += res.ee;
          var += res.var;
          ++n_windows;
        }
      }
      if (n_windows > 0) {
        const double inv = 1.0 / n_windows;
        loss *= inv;
        re *= inv;
        ee *= inv;
        var *= inv;
        model_->visit_params([&](Param& p) { p.g *= inv; });
      }
      if (!std::isfinite(loss))
        throw std::runtime_error("training diverged at step " +
                                 std::to_string(step));
      opt.step(visit);
      result.log.push_back({step, loss, re, ee, var});

      if (!holdout_.empty() &&
          (step % eval_every == 0 || step == cfg_.steps)) {
        auto ev = evaluate_split(*model_, holdout_, cfg_, tokenizer_,
                                 label_set_, tagset_);
        if (ev.report.f1 > result.best_holdout_f1) {
          result.best_holdout_f1 = ev.report.f1;
          result.best_step = step;
          best_params.clear();
          model_->visit_params(
              [&](Param& p) { best_params.push_back(p.v); });
        }
      }
    }
    if (!best_params.empty()) {
      size_t idx = 0;
      model_->visit_params([&](Param& p) { p.v = best_params[idx++]; });
    }
    return result;
  }

  nlohmann::json config_echo(const TrainResult& result) const {
    nlohmann::json j = to_json(cfg_);
    j["label_set"] = result.label_set;
    j["tagset"] = result.tagset;
    j["selection_rule"] = result.selection_rule;
    j["best_step"] = result.best_step;
    return j;
  }

  void save(const std::string& path, const TrainResult& result) {
    std::vector<const Param*> params;
    model_->visit_params([&](Param& p) { params.push_back(&p); });
    save_checkpoint(path, config_echo(result), params);
  }

 private:
  ExperimentConfig cfg_;
  HashingTokenizer tokenizer_;
  std::vector<std::string> label_set_, tagset_;
  std::vector<Document> train_, holdout_;
  std::unique_ptr<Model> model_;
};

// Rebuilds a model from a checkpoint archive.
struct RestoredModel {
  ExperimentConfig cfg;
  std::vector<std::string> label_set, tagset;
  std::unique_ptr<Model> model;
  std::unique_ptr<HashingTokenizer> tokenizer;
};

inline RestoredModel restore_model(const std::string& checkpoint_path) {
  auto ck = load_checkpoint(checkpoint_path);
  RestoredModel rm;
  rm.cfg = experiment_config_from_json(ck.config_echo);
  rm.label_set =
      ck.config_echo.at("label_set").get<std::vector<std::string>>();
  rm.tagset = ck.config_echo.at("tagset").get<std::vector<std::string>>();
  ModelConfig mc;
  mc.encoder = rm.cfg.encoder;
  mc.d_proj = rm.cfg.d_proj;
  mc.lc = rm.cfg.lc;
  mc.eef = rm.cfg.eef;
  mc.use_variance_loss = rm.cfg.use_variance_loss;
  mc.pooling = rm.cfg.pooling;
  mc.w_re = rm.cfg.w_re;
  mc.w_ee = rm.cfg.w_ee;
  mc.w_var = rm.cfg.w_var;
  mc.tagset = rm.tagset;
  rm.model = std::make_unique<Model>(mc, rm.cfg.seed);
  rm.model->visit_params([&](Param& p) {
    auto it = ck.tensors.find(p.name);
    if (it == ck.tensors.end())
      throw SchemaError("checkpoint missing tensor " + p.name);
    if (it->second.rows() != p.v.rows() || it->second.cols() != p.v.cols())
      throw SchemaError("checkpoint tensor shape mismatch for " + p.name);
    p.v = it->second;
  });
  rm.tokenizer = std::make_unique<HashingTokenizer>(rm.cfg.encoder.vocab);
  return rm;
}

}  // namespace vrdre
