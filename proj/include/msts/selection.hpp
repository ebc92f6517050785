#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "msts/dataset.hpp"
#include "msts/dtw.hpp"
#include "msts/error.hpp"
#include "msts/knn_cv.hpp"
#include "msts/merit.hpp"

namespace msts {

/// Runs fn and returns its result together with monotonic wall time in
/// seconds.
template <typename Fn>
auto timed(Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  auto result = fn();
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return std::pair<decltype(result), double>(std::move(result), seconds);
}

/// Shared configuration snapshot carried into every selection result.
struct SelectionConfig {
  std::size_t n_folds = 3;
  std::uint64_t seed = 0;
  std::size_t max_k = 4;
  double top_frac = 0.05;
  int band = -1;
  unsigned jobs = 1;

  bool operator==(const SelectionConfig&) const = default;
};

/// One subset's evaluation record: merit and/or cross-validated accuracy.
struct SubsetEvaluation {
  FeatureSubset subset;
  std::optional<double> merit;
  std::optional<double> accuracy;
  double wall_seconds = 0.0; // accuracy evaluation time; 0 for merit-only rows
};

/// Outcome of one selection strategy run. total_seconds covers the merit
/// phase (single-feature predictions, correlations, scores) plus the
/// strategy's own accuracy evaluations; distance-matrix construction and
/// subset enumeration happen beforehand and are excluded, reported
/// separately by callers.
struct SelectionResult {
  std::string strategy; // "merit" | "merit-wrapper" | "exhaustive"
  FeatureSubset chosen;
  double chosen_accuracy = 0.0;
  std::vector<SubsetEvaluation> evaluations;
  double total_seconds = 0.0;
  SelectionConfig config;
};

/// Everything a strategy needs to evaluate subset accuracies.
struct EvaluationContext {
  const Dataset& dataset;
  const std::vector<DistanceMatrix>& matrices;
  FoldAssignment folds;
  SelectionConfig config;

  /// Cross-validated accuracy of one subset, with its wall time.
  SubsetEvaluation evaluate(const FeatureSubset& subset) const {
    auto [acc, seconds] = timed([&] {
      const PredictionVector preds =
          cv_predict(dataset, subset.features(), matrices, folds, config.jobs);
      return accuracy(preds, dataset);
    });
    return SubsetEvaluation{subset, std::nullopt, acc, seconds};
  }
};

/// Merit-phase output: per-feature predictions, their correlation table, one
/// merit score per enumerated subset, and the wall time of all of it.
struct MeritPhase {
  std::vector<PredictionVector> single_feature_preds;
  CorrelationTable table;
  std::vector<MeritScore> scores;
  double seconds = 0.0;
};

/// Steps 3-5 of the scoring pipeline over precomputed distance matrices:
/// single-feature out-of-fold predictions, AMI correlations, merit for every
/// subset of sizes 1..max_k.
inline MeritPhase compute_merit_phase(const EvaluationContext& ctx) {
  MeritPhase phase;
  const auto start = std::chrono::steady_clock::now();
  phase.single_feature_preds.reserve(ctx.dataset.n_features);
  for (std::size_t f = 0; f < ctx.dataset.n_features; ++f) {
    const std::size_t subset[1] = {f};
    phase.single_feature_preds.push_back(
        cv_predict(ctx.dataset, subset, ctx.matrices, ctx.folds, ctx.config.jobs));
  }
  const std::vector<int> truth = ctx.dataset.label_codes();
  phase.table = build_correlations(phase.single_feature_preds, truth);
  phase.scores = score_all(phase.table, ctx.config.max_k);
  phase.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return phase;
}

/// How many subsets the wrapper strategy evaluates: ceil(top_frac * count),
/// at least 1 and at most count.
inline std::size_t wrapper_eval_count(std::size_t count, double top_frac) {
  if (!(top_frac > 0.0) || top_frac > 1.0)
    throw InvalidArgument("wrapper_eval_count: top_frac must be in (0, 1]");
  const std::size_t t = static_cast<std::size_t>(
      std::ceil(top_frac * static_cast<double>(count)));
  return std::clamp<std::size_t>(t, count > 0 ? 1 : 0, count);
}

namespace detail {

// Higher merit wins; ties (after rounding to 12 decimals) go to the smaller,
// lexicographically earlier subset.
inline bool merit_order_before(const MeritScore& a, const MeritScore& b) {
  const double ra = round12(a.value);
  const double rb = round12(b.value);
  if (ra != rb) return ra > rb;
  return subset_order_less(a.subset, b.subset);
}

inline bool accuracy_order_before(const SubsetEvaluation& a,
                                  const SubsetEvaluation& b) {
  if (*a.accuracy != *b.accuracy) return *a.accuracy > *b.accuracy;
  return subset_order_less(a.subset, b.subset);
}

} // namespace detail

/// Picks the single highest-merit subset and evaluates only that one.
inline SelectionResult select_by_merit(const MeritPhase& phase,
                                       const EvaluationContext& ctx) {
  if (phase.scores.empty())
    throw InvalidArgument("select_by_merit: no merit scores");

  const MeritScore* best = &phase.scores.front();
  for (const MeritScore& s : phase.scores)
    if (detail::merit_order_before(s, *best)) best = &s;

  const SubsetEvaluation chosen_eval = ctx.evaluate(best->subset);

  SelectionResult result;
  result.strategy = "merit";
  result.chosen = best->subset;
  result.chosen_accuracy = *chosen_eval.accuracy;
  result.config = ctx.config;
  result.total_seconds = phase.seconds + chosen_eval.wall_seconds;
  result.evaluations.reserve(phase.scores.size());
  for (const MeritScore& s : phase.scores) {
    SubsetEvaluation row{s.subset, s.value, std::nullopt, 0.0};
    if (s.subset == best->subset) {
      row.accuracy = chosen_eval.accuracy;
      row.wall_seconds = chosen_eval.wall_seconds;
    }
    result.evaluations.push_back(std::move(row));
  }
  return result;
}

/// Wrapper search over the top fraction of merit scores: the
/// ceil(top_frac * count) highest-merit subsets (at least one) get a full
/// accuracy evaluation and the most accurate wins.
inline SelectionResult select_by_merit_wrapper(const MeritPhase& phase,
                                               const EvaluationContext& ctx) {
  if (phase.scores.empty())
    throw InvalidArgument("select_by_merit_wrapper: no merit scores");

  std::vector<std::size_t> order(phase.scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detail::merit_order_before(phase.scores[a], phase.scores[b]);
  });

  const std::size_t count = phase.scores.size();
  const std::size_t t = wrapper_eval_count(count, ctx.config.top_frac);

  std::vector<std::optional<SubsetEvaluation>> evaluated(count);
  const auto [best_index, eval_seconds] = timed([&] {
    std::size_t best = order.front();
    for (std::size_t rank = 0; rank < t; ++rank) {
      const std::size_t idx = order[rank];
      evaluated[idx] = ctx.evaluate(phase.scores[idx].subset);
      if (rank > 0 &&
          detail::accuracy_order_before(*evaluated[idx], *evaluated[best]))
        best = idx;
    }
    return best;
  });

  SelectionResult result;
  result.strategy = "merit-wrapper";
  result.chosen = phase.scores[best_index].subset;
  result.chosen_accuracy = *evaluated[best_index]->accuracy;
  result.config = ctx.config;
  result.total_seconds = phase.seconds + eval_seconds;
  result.evaluations.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    SubsetEvaluation row{phase.scores[i].subset, phase.scores[i].value,
                         std::nullopt, 0.0};
    if (evaluated[i]) {
      row.accuracy = evaluated[i]->accuracy;
      row.wall_seconds = evaluated[i]->wall_seconds;
    }
    result.evaluations.push_back(std::move(row));
  }
  return result;
}

/// Evaluates the cross-validated accuracy of every enumerated subset and
/// picks the most accurate.
inline SelectionResult select_exhaustive(const std::vector<FeatureSubset>& subsets,
                                         const EvaluationContext& ctx) {
  if (subsets.empty())
    throw InvalidArgument("select_exhaustive: no subsets to evaluate");

  std::vector<SubsetEvaluation> evaluations;
  evaluations.reserve(subsets.size());
  const auto [best_index, eval_seconds] = timed([&] {
    std::size_t best = 0;
    for (std::size_t i = 0; i < subsets.size(); ++i) {
      evaluations.push_back(ctx.evaluate(subsets[i]));
      if (i > 0 &&
          detail::accuracy_order_before(evaluations[i], evaluations[best]))
        best = i;
    }
    return best;
  });

  SelectionResult result;
  result.strategy = "exhaustive";
  result.chosen = subsets[best_index];
  result.chosen_accuracy = *evaluations[best_index].accuracy;
  result.config = ctx.config;
  result.total_seconds = eval_seconds;
  result.evaluations = std::move(evaluations);
  return result;
}

} // namespace msts
