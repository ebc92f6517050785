#pragma once

#include <array>
#include <charconv>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "msts/dataset.hpp"
#include "msts/merit.hpp"
#include "msts/selection.hpp"

namespace msts {

/// Shortest round-trip decimal form of a double ("0.25", "1e-12", ...).
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

/// Sorted zero-based id list, e.g. "[0,2]".
inline std::string subset_id_list(const FeatureSubset& subset) {
  std::string out = "[";
  bool first = true;
  for (std::size_t f : subset.features()) {
    if (!first) out += ',';
    out += std::to_string(f);
    first = false;
  }
  out += ']';
  return out;
}

/// One-based display label, e.g. "F1,F3" for features {0, 2}.
inline std::string subset_display_label(const FeatureSubset& subset) {
  std::string out;
  bool first = true;
  for (std::size_t f : subset.features()) {
    if (!first) out += ',';
    out += 'F';
    out += std::to_string(f + 1);
    first = false;
  }
  return out;
}

/// Durations excluded from strategy totals (matrices are prepared in
/// advance), recorded separately for transparency.
struct SetupTiming {
  double dtw_matrix_seconds = 0.0;
  double enumeration_seconds = 0.0;
  std::size_t matrices_loaded = 0;
  std::size_t matrices_computed = 0;
};

inline nlohmann::json dataset_summary_json(const Dataset& dataset,
                                           const std::string& name) {
  return nlohmann::json{{"name", name},
                        {"n_samples", dataset.size()},
                        {"n_classes", dataset.n_classes()},
                        {"n_features", dataset.n_features},
                        {"series_length", dataset.series_length},
                        {"class_labels", dataset.class_labels}};
}

inline nlohmann::json config_json(const SelectionConfig& config) {
  return nlohmann::json{{"n_folds", config.n_folds}, {"seed", config.seed},
                        {"max_k", config.max_k},     {"top_frac", config.top_frac},
                        {"band", config.band},       {"jobs", config.jobs}};
}

inline nlohmann::json setup_json(const SetupTiming& setup) {
  return nlohmann::json{{"dtw_matrix_seconds", setup.dtw_matrix_seconds},
                        {"enumeration_seconds", setup.enumeration_seconds},
                        {"matrices_loaded", setup.matrices_loaded},
                        {"matrices_computed", setup.matrices_computed}};
}

inline nlohmann::json evaluation_json(const SubsetEvaluation& row) {
  nlohmann::json j{{"subset", row.subset.features()},
                   {"label", subset_display_label(row.subset)},
                   {"k", row.subset.k()},
                   {"merit", nullptr},
                   {"accuracy", nullptr},
                   {"wall_seconds", row.wall_seconds}};
  if (row.merit) j["merit"] = *row.merit;
  if (row.accuracy) j["accuracy"] = *row.accuracy;
  return j;
}

inline nlohmann::json selection_result_json(const SelectionResult& result) {
  nlohmann::json evals = nlohmann::json::array();
  for (const SubsetEvaluation& row : result.evaluations)
    evals.push_back(evaluation_json(row));
  return nlohmann::json{{"strategy", result.strategy},
                        {"chosen", result.chosen.features()},
                        {"chosen_label", subset_display_label(result.chosen)},
                        {"chosen_accuracy", result.chosen_accuracy},
                        {"total_seconds", result.total_seconds},
                        {"evaluations", std::move(evals)}};
}

/// Full single-run report. Schema (documented in the README): keys dataset,
/// config, setup, result; every wall-clock duration lives in a key ending in
/// "_seconds" so reports can be compared modulo timing.
inline nlohmann::json make_report(const std::string& dataset_name,
                                  const Dataset& dataset,
                                  const SelectionConfig& config,
                                  const SetupTiming& setup,
                                  const SelectionResult& result) {
  return nlohmann::json{{"dataset", dataset_summary_json(dataset, dataset_name)},
                        {"config", config_json(config)},
                        {"setup", setup_json(setup)},
                        {"result", selection_result_json(result)}};
}

/// One scatter point: a subset with whichever of merit/accuracy is known.
struct ScatterRow {
  FeatureSubset subset;
  std::optional<double> merit;
  std::optional<double> accuracy;
};

/// Pairs every scored subset's merit with the exhaustive run's accuracy for
/// the same subset. Both inputs follow the canonical enumeration order.
inline std::vector<ScatterRow> merge_scatter_rows(
    const std::vector<MeritScore>& scores,
    const std::vector<SubsetEvaluation>& evaluations) {
  std::vector<ScatterRow> rows;
  rows.reserve(std::max(scores.size(), evaluations.size()));
  std::size_t si = 0, ei = 0;
  while (si < scores.size() || ei < evaluations.size()) {
    const bool take_score =
        ei >= evaluations.size() ||
        (si < scores.size() &&
         !subset_order_less(evaluations[ei].subset, scores[si].subset));
    const bool take_eval =
        si >= scores.size() ||
        (ei < evaluations.size() &&
         !subset_order_less(scores[si].subset, evaluations[ei].subset));
    ScatterRow row{take_score ? scores[si].subset : evaluations[ei].subset,
                   std::nullopt, std::nullopt};
    if (take_score) row.merit = scores[si++].value;
    if (take_eval) row.accuracy = evaluations[ei++].accuracy;
    rows.push_back(std::move(row));
  }
  return rows;
}

/// Emits the per-subset scatter data. Columns are exactly
/// dataset,subset,k,merit,accuracy; the subset field is the quoted id list
/// (it contains commas); unknown merit/accuracy cells are left empty.
inline void write_scatter_csv(std::ostream& out,
                              const std::string& dataset_name,
                              const std::vector<ScatterRow>& rows,
                              bool header = true) {
  if (header) out << "dataset,subset,k,merit,accuracy\n";
  for (const ScatterRow& row : rows) {
    out << dataset_name << ",\"" << subset_id_list(row.subset) << "\","
        << row.subset.k() << ',';
    if (row.merit) out << format_double(*row.merit);
    out << ',';
    if (row.accuracy) out << format_double(*row.accuracy);
    out << '\n';
  }
}

} // namespace msts
