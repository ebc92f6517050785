#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "msts/dataset.hpp"
#include "msts/error.hpp"
#include "msts/parallel.hpp"

namespace msts {

/// Knobs for the DTW kernel and distance-matrix construction.
struct DtwOptions {
  /// Sakoe-Chiba band half-width; negative means unconstrained (the default).
  /// When set, it is widened to at least |len(a) - len(b)| so an alignment
  /// always exists.
  int band = -1;
  /// Worker threads for build_distance_matrix. Output is bit-identical for
  /// any value.
  unsigned jobs = 1;

  /// Identifies the pointwise cost in cache manifests.
  static constexpr const char* kCostTag = "squared_diff_sum";
};

/// DTW distance between two sequences: the minimal cumulative pointwise cost
/// over all monotone, contiguous warping paths from (0,0) to the last cell.
/// Pointwise cost is the squared difference, and the total is the sum along
/// the optimal path (no final square root); 1-NN ordering is unaffected by
/// the monotone root. Symmetric in its arguments.
inline double dtw_distance(std::span<const double> a, std::span<const double> b,
                           int band = -1) {
  if (a.empty() || b.empty())
    throw InvalidArgument("dtw_distance: empty sequence");

  const std::size_t la = a.size();
  const std::size_t lb = b.size();
  const double inf = std::numeric_limits<double>::infinity();

  std::size_t width = std::max(la, lb);
  if (band >= 0) {
    const std::size_t diff = la > lb ? la - lb : lb - la;
    width = std::max<std::size_t>(static_cast<std::size_t>(band), diff);
  }

  // Two-row rolling dynamic program; only the final distance is needed.
  std::vector<double> prev(lb, inf), curr(lb, inf);
  for (std::size_t i = 0; i < la; ++i) {
    std::size_t j_lo = 0, j_hi = lb - 1;
    if (band >= 0) {
      j_lo = i > width ? i - width : 0;
      j_hi = std::min(lb - 1, i + width);
    }
    std::fill(curr.begin(), curr.end(), inf);
    for (std::size_t j = j_lo; j <= j_hi; ++j) {
      const double d = a[i] - b[j];
      const double cost = d * d;
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else if (i == 0) {
        best = curr[j - 1];
      } else if (j == 0) {
        best = prev[j];
      } else {
        best = std::min({prev[j], curr[j - 1], prev[j - 1]});
      }
      curr[j] = cost + best;
    }
    prev.swap(curr);
  }
  return prev[lb - 1];
}

/// Pairwise DTW distances between all samples of one feature.
struct DistanceMatrix {
  std::size_t feature_index = 0;
  std::size_t n = 0;
  std::vector<double> values; // n x n, row-major; symmetric, zero diagonal

  double at(std::size_t i, std::size_t j) const { return values[i * n + j]; }

  bool operator==(const DistanceMatrix&) const = default;
};

/// Computes the full pairwise matrix for one feature. Only the upper
/// triangle is evaluated; the lower is mirrored. Rows are distributed across
/// workers with each (i, j) computed exactly once, so the result is
/// bit-identical for any job count.
inline DistanceMatrix build_distance_matrix(const Dataset& dataset,
                                            std::size_t feature,
                                            const DtwOptions& options = {}) {
  if (feature >= dataset.n_features)
    throw InvalidArgument("build_distance_matrix: feature " +
                          std::to_string(feature) + " out of range (dataset has " +
                          std::to_string(dataset.n_features) + ")");
  const std::size_t n = dataset.size();
  DistanceMatrix m;
  m.feature_index = feature;
  m.n = n;
  m.values.assign(n * n, 0.0);

  parallel_for(n, options.jobs, [&](std::size_t i) {
    const std::span<const double> si = dataset.samples[i].series[feature];
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d =
          dtw_distance(si, dataset.samples[j].series[feature], options.band);
      m.values[i * n + j] = d;
      m.values[j * n + i] = d;
    }
  });
  return m;
}

} // namespace msts
