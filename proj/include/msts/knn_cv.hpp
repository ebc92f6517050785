#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "msts/dataset.hpp"
#include "msts/dtw.hpp"
#include "msts/error.hpp"
#include "msts/parallel.hpp"

namespace msts {

/// Stratified fold assignment: per class and overall, fold sizes differ by
/// at most one. A deterministic function of (labels, n_folds, seed).
struct FoldAssignment {
  std::size_t n_folds = 0;
  std::vector<std::size_t> fold_of; // per-sample fold id
  std::uint64_t seed = 0;

  bool operator==(const FoldAssignment&) const = default;
};

/// Out-of-fold predicted label codes for all samples, from a 1-NN classifier
/// over one feature subset. predicted[q] comes from a training pool that
/// excluded q's fold.
struct PredictionVector {
  std::vector<std::size_t> feature_set;
  std::vector<int> predicted; // label codes aligned to sample index
  FoldAssignment folds;
};

namespace detail {

// mt19937_64 output is fully specified by the standard; pairing it with an
// explicit rejection draw keeps fold assignments reproducible across
// standard libraries (std::shuffle's internals are not pinned down).
inline std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % bound;
  std::uint64_t r = rng();
  while (r >= limit) r = rng();
  return r % bound;
}

inline void fisher_yates(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[bounded_rand(rng, i)]);
}

} // namespace detail

/// Stratified k-fold assignment. Samples are grouped by class in label
/// declaration order, shuffled within each class, and dealt round-robin with
/// the fold counter carried across classes so overall fold sizes stay within
/// one of each other.
inline FoldAssignment make_folds(const Dataset& dataset, std::size_t n_folds,
                                 std::uint64_t seed) {
  if (n_folds < 2)
    throw InvalidArgument("make_folds: need at least 2 folds, got " +
                          std::to_string(n_folds));

  const std::vector<int> codes = dataset.label_codes();
  std::vector<std::vector<std::size_t>> by_class(dataset.n_classes());
  for (std::size_t i = 0; i < codes.size(); ++i)
    by_class[static_cast<std::size_t>(codes[i])].push_back(i);

  for (std::size_t c = 0; c < by_class.size(); ++c)
    if (by_class[c].size() < n_folds)
      throw InvalidArgument("make_folds: class '" + dataset.class_labels[c] +
                            "' has " + std::to_string(by_class[c].size()) +
                            " samples, fewer than " + std::to_string(n_folds) +
                            " folds");

  FoldAssignment folds;
  folds.n_folds = n_folds;
  folds.seed = seed;
  folds.fold_of.assign(dataset.size(), 0);

  std::mt19937_64 rng(seed);
  std::size_t next_fold = 0;
  for (auto& members : by_class) {
    detail::fisher_yates(members, rng);
    for (std::size_t idx : members) {
      folds.fold_of[idx] = next_fold;
      next_fold = (next_fold + 1) % n_folds;
    }
  }
  return folds;
}

/// Distance between samples i and j over a feature subset: the unweighted
/// sum of the per-feature DTW distances. Additive combination is what the
/// per-feature matrix cache supports.
inline double subset_distance(std::span<const std::size_t> subset, std::size_t i,
                              std::size_t j,
                              const std::vector<DistanceMatrix>& matrices) {
  double d = 0.0;
  for (std::size_t f : subset) {
    if (f >= matrices.size() || matrices[f].feature_index != f)
      throw InvalidArgument("subset_distance: no distance matrix for feature " +
                            std::to_string(f));
    d += matrices[f].at(i, j);
  }
  return d;
}

/// Out-of-fold 1-NN prediction for every sample. For each query, the nearest
/// training sample outside the query's fold wins; distance ties go to the
/// lowest sample index. Queries are independent, so the result does not
/// depend on the job count.
inline PredictionVector cv_predict(const Dataset& dataset,
                                   std::span<const std::size_t> subset,
                                   const std::vector<DistanceMatrix>& matrices,
                                   const FoldAssignment& folds,
                                   unsigned jobs = 1) {
  const std::size_t n = dataset.size();
  if (folds.fold_of.size() != n)
    throw InvalidArgument("cv_predict: fold assignment covers " +
                          std::to_string(folds.fold_of.size()) +
                          " samples, dataset has " + std::to_string(n));
  if (subset.empty()) throw InvalidArgument("cv_predict: empty feature subset");
  std::vector<const double*> rows(subset.size());
  for (std::size_t s = 0; s < subset.size(); ++s) {
    const std::size_t f = subset[s];
    if (f >= matrices.size() || matrices[f].feature_index != f)
      throw InvalidArgument("cv_predict: no distance matrix for feature " +
                            std::to_string(f));
    if (matrices[f].n != n)
      throw InvalidArgument("cv_predict: matrix for feature " + std::to_string(f) +
                            " is " + std::to_string(matrices[f].n) +
                            "x, dataset has " + std::to_string(n));
    rows[s] = matrices[f].values.data();
  }

  // every query needs at least one sample outside its own fold; checked here
  // because exceptions cannot cross the worker threads below
  std::vector<std::size_t> fold_sizes(folds.n_folds, 0);
  for (std::size_t f : folds.fold_of) {
    if (f >= folds.n_folds)
      throw InvalidArgument("cv_predict: fold id " + std::to_string(f) +
                            " out of range");
    ++fold_sizes[f];
  }
  for (std::size_t f = 0; f < fold_sizes.size(); ++f)
    if (fold_sizes[f] == n)
      throw InvalidArgument("cv_predict: all samples fall in fold " +
                            std::to_string(f) + "; no training pool exists");

  const std::vector<int> codes = dataset.label_codes();
  PredictionVector out;
  out.feature_set.assign(subset.begin(), subset.end());
  out.folds = folds;
  out.predicted.assign(n, -1);

  parallel_for(n, jobs, [&](std::size_t q) {
    const std::size_t q_fold = folds.fold_of[q];
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (folds.fold_of[j] == q_fold) continue;
      double d = 0.0;
      for (const double* row : rows) d += row[q * n + j];
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    out.predicted[q] = codes[best_j];
  });
  return out;
}

/// Pooled out-of-fold accuracy: the fraction of samples whose prediction
/// matches the true label.
inline double accuracy(const PredictionVector& preds, const Dataset& dataset) {
  if (preds.predicted.size() != dataset.size())
    throw InvalidArgument("accuracy: " + std::to_string(preds.predicted.size()) +
                          " predictions for " + std::to_string(dataset.size()) +
                          " samples");
  const std::vector<int> truth = dataset.label_codes();
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (preds.predicted[i] == truth[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

} // namespace msts
