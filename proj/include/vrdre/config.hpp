#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "vrdre/dataset.hpp"
#include "vrdre/encoder.hpp"
#include "vrdre/errors.hpp"
#include "vrdre/preprocess.hpp"

namespace vrdre {

// How the dataset root is laid out.
enum class DataFormat { RAW, CANONICAL, GENERATE };

struct DataConfig {
  DatasetName name = DatasetName::SYNTHETIC;
  DataFormat format = DataFormat::GENERATE;
  std::string root;
  std::string train_split = "train";
  std::string eval_split = "test";
  std::string group_key = "group_id";
  std::vector<std::string> label_set;  // empty = derive from data
  // GENERATE only:
  int synth_train_docs = 200;
  int synth_eval_docs = 50;
  uint64_t synth_seed = 7;
};

struct ExperimentConfig {
  DataConfig data;

  // strategy flags
  bool eef = false;
  MarkerMode em = MarkerMode::NONE;
  bool lc = false;
  bool bbo = false;
  bool bbs = false;
  bool rsf = false;
  bool use_variance_loss = false;
  double tau = 0.1;
  PoolMode pooling = PoolMode::FIRST;

  // optimization
  uint64_t seed = 0;
  double lr = 1e-3;
  int steps = 500;
  int batch_size = 2;
  double w_re = 1.0;
  double w_ee = 1.0;
  double w_var = 1.0;
  double holdout_frac = 0.1;  // checkpoint selection split of train
  int eval_every = 0;         // 0 = steps/10

  // model
  ToyEncoderConfig encoder;
  int d_proj = 128;
  int stride = 0;
};

inline std::string to_string(DatasetName n) {
  switch (n) {
    case DatasetName::FUNSD: return "funsd";
    case DatasetName::CORD: return "cord";
    case DatasetName::SYNTHETIC: return "synthetic";
  }
  return "?";
}

inline DatasetName dataset_name_from(const std::string& s) {
  if (s == "funsd") return DatasetName::FUNSD;
  if (s == "cord") return DatasetName::CORD;
  if (s == "synthetic") return DatasetName::SYNTHETIC;
  throw ConfigError("unknown dataset name: " + s);
}

inline std::string to_string(DataFormat f) {
  switch (f) {
    case DataFormat::RAW: return "raw";
    case DataFormat::CANONICAL: return "canonical";
    case DataFormat::GENERATE: return "generate";
  }
  return "?";
}

inline DataFormat data_format_from(const std::string& s) {
  if (s == "raw") return DataFormat::RAW;
  if (s == "canonical") return DataFormat::CANONICAL;
  if (s == "generate") return DataFormat::GENERATE;
  throw ConfigError("unknown data format: " + s);
}

inline std::string to_string(MarkerMode m) {
  switch (m) {
    case MarkerMode::NONE: return "none";
    case MarkerMode::SIMPLE: return "simple";
    case MarkerMode::PUNCT: return "punct";
  }
  return "?";
}

inline MarkerMode marker_mode_from(const std::string& s) {
  if (s == "none") return MarkerMode::NONE;
  if (s == "simple") return MarkerMode::SIMPLE;
  if (s == "punct") return MarkerMode::PUNCT;
  throw ConfigError("unknown marker mode: " + s);
}

inline std::string to_string(PoolMode m) {
  return m == PoolMode::FIRST ? "first" : "mean";
}

inline PoolMode pool_mode_from(const std::string& s) {
  if (s == "first") return PoolMode::FIRST;
  if (s == "mean") return PoolMode::MEAN;
  throw ConfigError("unknown pooling mode: " + s);
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["data"] = {{"name", to_string(c.data.name)},
               {"format", to_string(c.data.format)},
               {"root", c.data.root},
               {"train_split", c.data.train_split},
               {"eval_split", c.data.eval_split},
               {"group_key", c.data.group_key},
               {"label_set", c.data.label_set},
               {"synth_train_docs", c.data.synth_train_docs},
               {"synth_eval_docs", c.data.synth_eval_docs},
               {"synth_seed", c.data.synth_seed}};
  j["eef"] = c.eef;
  j["em"] = to_string(c.em);
  j["lc"] = c.lc;
  j["bbo"] = c.bbo;
  j["bbs"] = c.bbs;
  j["rsf"] = c.rsf;
  j["variance_loss"] = c.use_variance_loss;
  j["tau"] = c.tau;
  j["pooling"] = to_string(c.pooling);
  j["seed"] = c.seed;
  j["lr"] = c.lr;
  j["steps"] = c.steps;
  j["batch_size"] = c.batch_size;
  j["w_re"] = c.w_re;
  j["w_ee"] = c.w_ee;
  j["w_var"] = c.w_var;
  j["holdout_frac"] = c.holdout_frac;
  j["eval_every"] = c.eval_every;
  j["encoder"] = {{"d", c.encoder.d},       {"layers", c.encoder.layers},
                  {"heads", c.encoder.heads}, {"ffn", c.encoder.ffn},
                  {"vocab", c.encoder.vocab}, {"max_len", c.encoder.max_len}};
  j["d_proj"] = c.d_proj;
  j["stride"] = c.stride;
  return j;
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  if (j.contains("data")) {
    const auto& d = j.at("data");
    if (d.contains("name")) c.data.name = dataset_name_from(d.at("name"));
    if (d.contains("format")) c.data.format = data_format_from(d.at("format"));
    if (d.contains("root")) c.data.root = d.at("root");
    if (d.contains("train_split")) c.data.train_split = d.at("train_split");
    if (d.contains("eval_split")) c.data.eval_split = d.at("eval_split");
    if (d.contains("group_key")) c.data.group_key = d.at("group_key");
    if (d.contains("label_set"))
      c.data.label_set = d.at("label_set").get<std::vector<std::string>>();
    if (d.contains("synth_train_docs"))
      c.data.synth_train_docs = d.at("synth_train_docs");
    if (d.contains("synth_eval_docs"))
      c.data.synth_eval_docs = d.at("synth_eval_docs");
    if (d.contains("synth_seed")) c.data.synth_seed = d.at("synth_seed");
  }
  auto get = [&](const char* k, auto& field) {
    if (j.contains(k)) field = j.at(k).template get<std::decay_t<decltype(field)>>();
  };
  get("eef", c.eef);
  if (j.contains("em")) c.em = marker_mode_from(j.at("em"));
  get("lc", c.lc);
  get("bbo", c.bbo);
  get("bbs", c.bbs);
  get("rsf", c.rsf);
  if (j.contains("variance_loss")) c.use_variance_loss = j.at("variance_loss");
  get("tau", c.tau);
  if (j.contains("pooling")) c.pooling = pool_mode_from(j.at("pooling"));
  get("seed", c.seed);
  get("lr", c.lr);
  get("steps", c.steps);
  get("batch_size", c.batch_size);
  get("w_re", c.w_re);
  get("w_ee", c.w_ee);
  get("w_var", c.w_var);
  get("holdout_frac", c.holdout_frac);
  get("eval_every", c.eval_every);
  if (j.contains("encoder")) {
    const auto& e = j.at("encoder");
    if (e.contains("d")) c.encoder.d = e.at("d");
    if (e.contains("layers")) c.encoder.layers = e.at("layers");
    if (e.contains("heads")) c.encoder.heads = e.at("heads");
    if (e.contains("ffn")) c.encoder.ffn = e.at("ffn");
    if (e.contains("vocab")) c.encoder.vocab = e.at("vocab");
    if (e.contains("max_len")) c.encoder.max_len = e.at("max_len");
  }
  get("d_proj", c.d_proj);
  get("stride", c.stride);

  if (c.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (c.steps < 1) throw ConfigError("steps must be >= 1");
  if (c.em == MarkerMode::PUNCT)
    throw ConfigError("PUNCT markers are analysis-only, not trainable");
  return c;
}

}  // namespace vrdre
