// Command-line front end: dataset ingestion, training, evaluation, ablation
// grids, and tau sweeps. Exit codes: 0 ok, 2 I/O, 3 data schema, 64 usage,
// 70 internal.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "vrdre/ablation.hpp"
#include "vrdre/config.hpp"
#include "vrdre/dataset.hpp"
#include "vrdre/json_io.hpp"
#include "vrdre/synthetic.hpp"
#include "vrdre/train.hpp"

namespace fs = std::filesystem;
using namespace vrdre;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 2;
constexpr int kExitSchema = 3;
constexpr int kExitUsage = 64;
constexpr int kExitInternal = 70;

std::string default_data_root() {
  const char* env = std::getenv("VRDRE_DATA_ROOT");
  return env ? env : "";
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  nlohmann::json j;
  in >> j;
  return j;
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

nlohmann::json predictions_to_json(const std::vector<DocPrediction>& preds) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : preds) {
    nlohmann::json jp;
    jp["doc_id"] = p.doc_id;
    jp["pairs"] = nlohmann::json::array();
    for (const auto& [pair, prob] : p.probs)
      jp["pairs"].push_back(
          nlohmann::json::array({pair.first, pair.second, prob}));
    out.push_back(std::move(jp));
  }
  return out;
}

nlohmann::json report_to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["precision"] = r.precision;
  j["recall"] = r.recall;
  j["f1"] = r.f1;
  j["macro_f1"] = r.macro_f1;
  j["tp"] = r.tp;
  j["fp"] = r.fp;
  j["fn"] = r.fn;
  j["cross_window_fn"] = r.cross_window_fn;
  if (r.entity_f1 >= 0) j["entity_f1"] = r.entity_f1;
  return j;
}

int cmd_ingest(const std::string& dataset, const std::string& root,
               const std::string& split, const std::string& out,
               const std::string& group_key, int synth_docs,
               uint64_t synth_seed) {
  std::vector<Document> docs;
  int warnings = 0;
  WarnFn warn = [&](const std::string& msg) {
    std::cerr << "warning: " << msg << "\n";
    ++warnings;
  };
  if (dataset == "synthetic") {
    docs = make_synthetic_corpus(synth_docs, synth_seed);
  } else {
    if (root.empty()) {
      std::cerr << "error: --root required (or set VRDRE_DATA_ROOT)\n";
      return kExitUsage;
    }
    if (!fs::is_directory(root)) {
      std::cerr << "error: unreadable root " << root << "\n";
      return kExitIo;
    }
    DatasetSpec spec;
    spec.name = dataset_name_from(dataset);
    spec.root = root;
    spec.split = split;
    spec.group_key = group_key;
    if (spec.name == DatasetName::FUNSD) spec.label_set = funsd_labels();
    docs = load_split(spec, warn);
  }

  int violations = 0;
  for (const auto& doc : docs) {
    for (const auto& v : validate_document(doc)) {
      std::cerr << doc.doc_id << ": " << to_string(v.code) << " at " << v.where
                << "\n";
      ++violations;
    }
  }
  const fs::path out_dir = fs::path(out) / split;
  fs::create_directories(out_dir);
  for (const auto& doc : docs)
    write_text_file(out_dir / (doc.doc_id + ".json"), to_json(doc).dump(2));
  std::cout << "ingested " << docs.size() << " documents (" << split
            << "), " << warnings << " warnings, " << violations
            << " validation violations -> " << out_dir.string() << "\n";
  return violations == 0 ? kExitOk : kExitSchema;
}

ExperimentConfig load_config(const std::string& path, bool seed_set,
                             uint64_t seed_override) {
  auto cfg = experiment_config_from_json(read_json_file(path));
  if (cfg.data.root.empty()) cfg.data.root = default_data_root();
  if (seed_set) cfg.seed = seed_override;
  return cfg;
}

std::string train_log_ndjson(const TrainResult& result) {
  std::ostringstream out;
  for (const auto& e : result.log) {
    nlohmann::json j = {{"step", e.step},
                        {"loss", e.loss},
                        {"re", e.re},
                        {"ee", e.ee},
                        {"var", e.var}};
    out << j.dump() << "\n";
  }
  return out.str();
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              bool seed_set, uint64_t seed_override) {
  auto cfg = load_config(config_path, seed_set, seed_override);
  auto train_docs = load_documents(cfg.data, cfg.data.train_split);
  Trainer trainer(cfg, std::move(train_docs));
  auto result = trainer.train();
  fs::create_directories(out_dir);
  trainer.save((fs::path(out_dir) / "checkpoint.bin").string(), result);
  write_text_file(fs::path(out_dir) / "train_log.ndjson",
                  train_log_ndjson(result));
  std::cout << "trained " << cfg.steps << " steps; final loss "
            << result.log.back().loss << "; selection: "
            << result.selection_rule;
  if (result.best_step >= 0)
    std::cout << " (step " << result.best_step << ", holdout F1 "
              << result.best_holdout_f1 << ")";
  std::cout << "\n";
  return kExitOk;
}

int run_eval(RestoredModel& rm, const std::string& split,
             const std::string& out_dir) {
  auto docs = load_documents(rm.cfg.data, split);
  auto ev = evaluate_split(*rm.model, docs, rm.cfg, *rm.tokenizer,
                           rm.label_set, rm.tagset);
  nlohmann::json report = report_to_json(ev.report);
  report["config"] = to_json(rm.cfg);
  report["split"] = split;
  report["rsf"] = rm.cfg.rsf;
  report["tau"] = rm.cfg.tau;
  fs::create_directories(out_dir);
  write_text_file(fs::path(out_dir) / "report.json", report.dump(2));
  write_text_file(fs::path(out_dir) / "predictions.json",
                  predictions_to_json(ev.predictions).dump(2));
  std::cout << "split " << split << ": P " << ev.report.precision << " R "
            << ev.report.recall << " F1 " << ev.report.f1;
  if (ev.report.entity_f1 >= 0)
    std::cout << " entityF1 " << ev.report.entity_f1;
  std::cout << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relation extraction toolkit for visually-rich documents"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "parse a dataset split");
  std::string in_dataset, in_root = default_data_root(), in_split = "train";
  std::string in_out = "ingested", in_group_key = "group_id";
  int in_docs = 200;
  uint64_t in_seed = 7;
  ingest->add_option("--dataset", in_dataset, "funsd|cord|synthetic")
      ->required();
  ingest->add_option("--root", in_root, "dataset root directory");
  ingest->add_option("--split", in_split, "split name");
  ingest->add_option("--out", in_out, "output directory")->required();
  ingest->add_option("--group-key", in_group_key, "CORD group identity field");
  ingest->add_option("--docs", in_docs, "synthetic: number of documents");
  ingest->add_option("--seed", in_seed, "synthetic: generator seed");

  // train
  auto* train = app.add_subcommand("train", "train a model from a config");
  std::string tr_config, tr_out = "run";
  uint64_t tr_seed = 0;
  bool tr_seed_set = false;
  train->add_option("--config", tr_config, "experiment config JSON")
      ->required();
  train->add_option("--out", tr_out, "output directory");
  train->add_option("--seed", tr_seed, "override config seed")
      ->each([&](const std::string&) { tr_seed_set = true; });

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string ev_ckpt, ev_split, ev_out = "eval";
  double ev_tau = -1;
  bool ev_rsf = false;
  eval->add_option("--checkpoint", ev_ckpt, "checkpoint file")->required();
  eval->add_option("--split", ev_split, "split (default: config eval split)");
  eval->add_option("--out", ev_out, "output directory");
  eval->add_flag("--rsf", ev_rsf, "decode with RSF");
  eval->add_option("--tau", ev_tau, "RSF margin (requires --rsf)");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "run an ablation grid");
  std::string ab_grid, ab_out = "ablation";
  ablate->add_option("--grid", ab_grid, "grid JSON file")->required();
  ablate->add_option("--out", ab_out, "output directory");

  // sweep-tau
  auto* sweep = app.add_subcommand("sweep-tau", "F1 as a function of tau");
  std::string sw_ckpt, sw_split, sw_out = "tau_sweep.csv";
  std::vector<double> sw_taus;
  sweep->add_option("--checkpoint", sw_ckpt, "checkpoint file")->required();
  sweep->add_option("--taus", sw_taus, "tau values")->required();
  sweep->add_option("--split", sw_split, "split (default: config eval split)");
  sweep->add_option("--out", sw_out, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*ingest)
      return cmd_ingest(in_dataset, in_root, in_split, in_out, in_group_key,
                        in_docs, in_seed);
    if (*train) return cmd_train(tr_config, tr_out, tr_seed_set, tr_seed);
    if (*eval) {
      if (ev_tau >= 0 && !ev_rsf) {
        std::cerr << "error: --tau requires --rsf\n";
        return kExitUsage;
      }
      auto rm = restore_model(ev_ckpt);
      if (ev_rsf) rm.cfg.rsf = true;
      if (ev_tau >= 0) rm.cfg.tau = ev_tau;
      const std::string split =
          ev_split.empty() ? rm.cfg.data.eval_split : ev_split;
      return run_eval(rm, split, ev_out);
    }
    if (*ablate) {
      auto grid = ablation_grid_from_json(read_json_file(ab_grid));
      auto rows = run_ablation(grid);
      fs::create_directories(ab_out);
      write_text_file(fs::path(ab_out) / "results.csv", ablation_csv(rows));
      const std::string table = ablation_table(rows);
      write_text_file(fs::path(ab_out) / "results.txt", table);
      std::cout << table;
      return kExitOk;
    }
    if (*sweep) {
      auto rm = restore_model(sw_ckpt);
      const std::string split =
          sw_split.empty() ? rm.cfg.data.eval_split : sw_split;
      auto docs = load_documents(rm.cfg.data, split);
      std::ostringstream csv;
      csv << "tau,f1,precision,recall\n";
      for (double tau : sw_taus) {
        rm.cfg.rsf = true;
        rm.cfg.tau = tau;
        auto ev = evaluate_split(*rm.model, docs, rm.cfg, *rm.tokenizer,
                                 rm.label_set, rm.tagset);
        csv << tau << ',' << ev.report.f1 << ',' << ev.report.precision << ','
            << ev.report.recall << '\n';
      }
      write_text_file(sw_out, csv.str());
      std::cout << "wrote " << sw_out << "\n";
      return kExitOk;
    }
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
