#pragma once

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "vrdre/config.hpp"
#include "vrdre/metrics.hpp"
#include "vrdre/train.hpp"

namespace vrdre {

struct AblationRow {
  std::string name;
  bool failed = false;
  std::string error;
  MetricsReport report;
  double delta_f1 = 0;  // vs baseline row
};

struct AblationGrid {
  ExperimentConfig base;
  std::vector<std::pair<std::string, nlohmann::json>> rows;  // name, overrides
  std::string baseline;  // row name deltas are measured against
};

inline AblationGrid ablation_grid_from_json(const nlohmann::json& j) {
  AblationGrid grid;
  grid.base = experiment_config_from_json(j.at("base"));
  if (!j.contains("rows") || j.at("rows").empty())
    throw ConfigError("ablation grid has no rows");
  for (const auto& row : j.at("rows"))
    grid.rows.emplace_back(row.at("name").get<std::string>(),
                           row.value("overrides", nlohmann::json::object()));
  grid.baseline = j.value("baseline", grid.rows.front().first);
  return grid;
}

inline ExperimentConfig apply_overrides(const ExperimentConfig& base,
                                        const nlohmann::json& overrides) {
  nlohmann::json merged = to_json(base);
  merged.merge_patch(overrides);
  return experiment_config_from_json(merged);
}

// Trains and evaluates one configuration end to end.
inline MetricsReport run_experiment(const ExperimentConfig& cfg) {
  auto train_docs = load_documents(cfg.data, cfg.data.train_split);
  auto eval_docs = load_documents(cfg.data, cfg.data.eval_split);
  Trainer trainer(cfg, std::move(train_docs));
  auto result = trainer.train();
  auto ev = evaluate_split(trainer.model(), eval_docs, cfg,
                           trainer.tokenizer(), trainer.label_set(),
                           trainer.tagset());
  return ev.report;
}

// Runs every grid row; a failing row is marked FAILED and the grid
// continues.
inline std::vector<AblationRow> run_ablation(const AblationGrid& grid) {
  if (grid.rows.empty()) throw ConfigError("ablation grid has no rows");
  std::vector<AblationRow> out;
  for (const auto& [name, overrides] : grid.rows) {
    AblationRow row;
    row.name = name;
    try {
      row.report = run_experiment(apply_overrides(grid.base, overrides));
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    out.push_back(std::move(row));
  }
  double baseline_f1 = 0;
  for (const auto& r : out)
    if (r.name == grid.baseline && !r.failed) baseline_f1 = r.report.f1;
  for (auto& r : out) r.delta_f1 = r.failed ? 0 : r.report.f1 - baseline_f1;
  return out;
}

inline std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << "config,f1,precision,recall,delta_f1,entity_f1,cross_window_fn\n";
  out << std::fixed << std::setprecision(4);
  for (const auto& r : rows) {
    if (r.failed) {
      out << r.name << ",FAILED,,,,,\n";
      continue;
    }
    out << r.name << ',' << r.report.f1 << ',' << r.report.precision << ','
        << r.report.recall << ',' << r.delta_f1 << ',';
    if (r.report.entity_f1 >= 0) out << r.report.entity_f1;
    out << ',' << r.report.cross_window_fn << '\n';
  }
  return out.str();
}

inline std::string ablation_table(const std::vector<AblationRow>& rows) {
  size_t name_w = 6;
  for (const auto& r : rows) name_w = std::max(name_w, r.name.size());
  std::ostringstream out;
  out << std::left << std::setw(int(name_w) + 2) << "config"
      << std::right << std::setw(9) << "F1" << std::setw(11) << "Precision"
      << std::setw(9) << "Recall" << std::setw(10) << "dF1" << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& r : rows) {
    out << std::left << std::setw(int(name_w) + 2) << r.name << std::right;
    if (r.failed) {
      out << std::setw(9) << "FAILED" << '\n';
      continue;
    }
    out << std::setw(9) << r.report.f1 << std::setw(11) << r.report.precision
        << std::setw(9) << r.report.recall << std::setw(10)
        << std::showpos << r.delta_f1 << std::noshowpos << '\n';
  }
  return out.str();
}

}  // namespace vrdre
