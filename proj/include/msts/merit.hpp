#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msts/error.hpp"
#include "msts/infotheory.hpp"
#include "msts/knn_cv.hpp"

namespace msts {

/// A non-empty set of feature ids, kept sorted ascending with no duplicates.
class FeatureSubset {
public:
  FeatureSubset() = default;

  explicit FeatureSubset(std::vector<std::size_t> ids) : features_(std::move(ids)) {
    if (features_.empty()) throw InvalidArgument("feature subset is empty");
    std::sort(features_.begin(), features_.end());
    if (std::adjacent_find(features_.begin(), features_.end()) != features_.end())
      throw InvalidArgument("feature subset has duplicate ids");
  }

  const std::vector<std::size_t>& features() const { return features_; }
  std::size_t k() const { return features_.size(); }

  bool operator==(const FeatureSubset&) const = default;

private:
  std::vector<std::size_t> features_;
};

/// Deterministic subset order used everywhere ties must break: smaller
/// cardinality first, then lexicographically smaller feature tuple.
inline bool subset_order_less(const FeatureSubset& a, const FeatureSubset& b) {
  if (a.k() != b.k()) return a.k() < b.k();
  return std::lexicographical_compare(a.features().begin(), a.features().end(),
                                      b.features().begin(), b.features().end());
}

/// AMI correlations over single-feature prediction vectors: cf[f] against
/// the true labels, ff[f][g] between feature predictions. ff is symmetric
/// with unit diagonal.
struct CorrelationTable {
  std::size_t n_features = 0;
  std::vector<double> cf;
  std::vector<double> ff; // n_features x n_features, row-major

  double ff_at(std::size_t f, std::size_t g) const {
    return ff[f * n_features + g];
  }
};

/// A subset with its merit value.
struct MeritScore {
  FeatureSubset subset;
  double value = 0.0;
};

/// Merit values are compared for ties after rounding to 12 decimal places.
inline double round12(double v) { return std::round(v * 1e12) / 1e12; }

inline CorrelationTable build_correlations(
    const std::vector<PredictionVector>& preds, std::span<const int> truth) {
  if (preds.empty())
    throw InvalidArgument("build_correlations: no prediction vectors");
  for (const PredictionVector& p : preds) {
    if (p.predicted.size() != truth.size())
      throw InvalidArgument("build_correlations: prediction vector of length " +
                            std::to_string(p.predicted.size()) +
                            " does not align with " + std::to_string(truth.size()) +
                            " labels");
    if (!(p.folds == preds.front().folds))
      throw InvalidArgument(
          "build_correlations: prediction vectors use different fold assignments");
  }

  const std::size_t n = preds.size();
  CorrelationTable table;
  table.n_features = n;
  table.cf.resize(n);
  table.ff.assign(n * n, 0.0);
  for (std::size_t f = 0; f < n; ++f)
    table.cf[f] = ami(preds[f].predicted, truth);
  for (std::size_t f = 0; f < n; ++f) {
    table.ff[f * n + f] = ami(preds[f].predicted, preds[f].predicted);
    for (std::size_t g = f + 1; g < n; ++g) {
      const double v = ami(preds[f].predicted, preds[g].predicted);
      table.ff[f * n + g] = v;
      table.ff[g * n + f] = v;
    }
  }
  return table;
}

/// Merit of a feature subset:
///
///   value = k * mean(cf over subset)
///           / sqrt(k + k(k-1) * mean(ff over unordered pairs))
///
/// The pair mean excludes the diagonal and vanishes for k = 1. A
/// non-positive radicand (possible when the pair mean drops below
/// -1/(k-1)) raises MeritDomainError rather than being clamped.
inline MeritScore merit_score(const FeatureSubset& subset,
                              const CorrelationTable& table) {
  const std::size_t k = subset.k();
  for (std::size_t f : subset.features())
    if (f >= table.n_features)
      throw InvalidArgument("merit_score: feature " + std::to_string(f) +
                            " outside the correlation table (" +
                            std::to_string(table.n_features) + " features)");

  double cf_sum = 0.0;
  for (std::size_t f : subset.features()) cf_sum += table.cf[f];
  const double mean_cf = cf_sum / static_cast<double>(k);

  double mean_ff = 0.0;
  if (k > 1) {
    double ff_sum = 0.0;
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = a + 1; b < k; ++b)
        ff_sum += table.ff_at(subset.features()[a], subset.features()[b]);
    mean_ff = ff_sum / (static_cast<double>(k) * (k - 1) / 2.0);
  }

  const double kd = static_cast<double>(k);
  const double radicand = kd + kd * (kd - 1.0) * mean_ff;
  if (!(radicand > 0.0)) {
    std::string ids;
    for (std::size_t f : subset.features()) ids += (ids.empty() ? "" : ",") + std::to_string(f);
    throw MeritDomainError("merit radicand " + std::to_string(radicand) +
                           " is not positive for subset {" + ids +
                           "}; inter-feature correlations average below -1/(k-1)");
  }
  return MeritScore{subset, kd * mean_cf / std::sqrt(radicand)};
}

/// Number of subsets of sizes 1..max_k over n features.
inline std::uint64_t n_subsets(std::size_t n_features, std::size_t max_k) {
  std::uint64_t total = 0;
  std::uint64_t binom = 1;
  for (std::size_t j = 1; j <= max_k; ++j) {
    binom = binom * (n_features - j + 1) / j;
    total += binom;
  }
  return total;
}

/// All subsets of sizes 1..max_k, ordered by cardinality then
/// lexicographically by feature ids.
inline std::vector<FeatureSubset> enumerate_subsets(std::size_t n_features,
                                                    std::size_t max_k) {
  if (max_k < 1 || max_k > n_features)
    throw InvalidArgument("enumerate_subsets: max_k " + std::to_string(max_k) +
                          " out of range for " + std::to_string(n_features) +
                          " features");
  std::vector<FeatureSubset> out;
  out.reserve(n_subsets(n_features, max_k));
  for (std::size_t k = 1; k <= max_k; ++k) {
    std::vector<std::size_t> comb(k);
    for (std::size_t i = 0; i < k; ++i) comb[i] = i;
    while (true) {
      out.push_back(FeatureSubset(comb));
      // advance the rightmost position that still has room
      std::size_t i = k;
      while (i > 0 && comb[i - 1] == n_features - k + i - 1) --i;
      if (i == 0) break;
      ++comb[i - 1];
      for (std::size_t j = i; j < k; ++j) comb[j] = comb[j - 1] + 1;
    }
  }
  return out;
}

/// Merit for every enumerated subset, in enumeration order.
inline std::vector<MeritScore> score_all(const CorrelationTable& table,
                                         std::size_t max_k) {
  const std::vector<FeatureSubset> subsets =
      enumerate_subsets(table.n_features, max_k);
  std::vector<MeritScore> scores;
  scores.reserve(subsets.size());
  for (const FeatureSubset& s : subsets) scores.push_back(merit_score(s, table));
  return scores;
}

} // namespace msts
