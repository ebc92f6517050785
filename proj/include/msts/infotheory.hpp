#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "msts/error.hpp"

namespace msts {

/// Cross-tabulation of two equally long label vectors. Rows index the
/// distinct labels of x in order of first appearance, columns those of y;
/// counts sum to N. All information measures here are discrete empirical
/// estimates over such tables, in nats.
struct ContingencyTable {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int64_t> counts;   // rows x cols, row-major
  std::vector<std::int64_t> row_sums; // a_i
  std::vector<std::int64_t> col_sums; // b_j
  std::int64_t total = 0;             // N

  std::int64_t at(std::size_t r, std::size_t c) const {
    return counts[r * cols + c];
  }
};

namespace detail {

// Maps arbitrary label codes to dense 0-based ids in order of first
// appearance. The measures below depend only on the partition structure, and
// first-appearance order keeps every accumulation sequence deterministic, so
// exact-equality identities (symmetry, ami(x,x) == 1) hold bitwise.
inline std::vector<int> densify(std::span<const int> labels,
                                std::size_t& n_distinct) {
  std::unordered_map<int, int> ids;
  ids.reserve(labels.size());
  std::vector<int> dense(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = ids.emplace(labels[i], static_cast<int>(ids.size()));
    dense[i] = it->second;
  }
  n_distinct = ids.size();
  return dense;
}

inline std::vector<std::int64_t> dense_counts(std::span<const int> dense,
                                              std::size_t n_distinct) {
  std::vector<std::int64_t> counts(n_distinct, 0);
  for (int id : dense) ++counts[static_cast<std::size_t>(id)];
  return counts;
}

// -sum p ln p over counts in index order, skipping zeros; 0 ln 0 counts as 0.
inline double entropy_from_counts(std::span<const std::int64_t> counts,
                                  std::int64_t total) {
  const double n = static_cast<double>(total);
  double h = 0.0;
  for (std::int64_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h < 0.0 ? 0.0 : h;
}

inline ContingencyTable contingency_from_dense(std::span<const int> xd,
                                               std::size_t xr,
                                               std::span<const int> yd,
                                               std::size_t yc) {
  ContingencyTable t;
  t.rows = xr;
  t.cols = yc;
  t.counts.assign(t.rows * t.cols, 0);
  t.row_sums.assign(t.rows, 0);
  t.col_sums.assign(t.cols, 0);
  t.total = static_cast<std::int64_t>(xd.size());
  for (std::size_t i = 0; i < xd.size(); ++i) {
    ++t.counts[static_cast<std::size_t>(xd[i]) * t.cols +
               static_cast<std::size_t>(yd[i])];
    ++t.row_sums[static_cast<std::size_t>(xd[i])];
    ++t.col_sums[static_cast<std::size_t>(yd[i])];
  }
  return t;
}

// Cumulative log-factorial table: lf[k] = ln(k!). Factorials themselves
// overflow doubles near k = 171, far below the sample counts seen here.
inline std::vector<double> log_factorials(std::int64_t n) {
  std::vector<double> lf(static_cast<std::size_t>(n) + 1, 0.0);
  for (std::int64_t k = 2; k <= n; ++k)
    lf[static_cast<std::size_t>(k)] =
        lf[static_cast<std::size_t>(k - 1)] + std::log(static_cast<double>(k));
  return lf;
}

} // namespace detail

inline ContingencyTable build_contingency(std::span<const int> x,
                                          std::span<const int> y) {
  if (x.size() != y.size())
    throw InvalidArgument("contingency table: label vectors have lengths " +
                          std::to_string(x.size()) + " and " +
                          std::to_string(y.size()));
  if (x.empty()) throw InvalidArgument("contingency table: empty label vectors");
  std::size_t xr = 0, yc = 0;
  const std::vector<int> xd = detail::densify(x, xr);
  const std::vector<int> yd = detail::densify(y, yc);
  return detail::contingency_from_dense(xd, xr, yd, yc);
}

/// Empirical Shannon entropy of a label vector, in nats.
inline double entropy(std::span<const int> labels) {
  if (labels.empty()) throw InvalidArgument("entropy: empty label vector");
  std::size_t n_distinct = 0;
  const std::vector<int> dense = detail::densify(labels, n_distinct);
  const std::vector<std::int64_t> counts =
      detail::dense_counts(dense, n_distinct);
  return detail::entropy_from_counts(counts,
                                     static_cast<std::int64_t>(labels.size()));
}

/// Empirical joint entropy H(X, Y). Symmetric bitwise: the pair is reduced
/// to a canonical orientation before accumulating.
inline double joint_entropy(std::span<const int> x, std::span<const int> y) {
  if (x.size() != y.size())
    throw InvalidArgument("joint_entropy: length mismatch");
  if (x.empty()) throw InvalidArgument("joint_entropy: empty label vectors");
  std::size_t xr = 0, yc = 0;
  std::vector<int> xd = detail::densify(x, xr);
  std::vector<int> yd = detail::densify(y, yc);
  if (std::lexicographical_compare(yd.begin(), yd.end(), xd.begin(), xd.end())) {
    xd.swap(yd);
    std::swap(xr, yc);
  }
  const ContingencyTable t = detail::contingency_from_dense(xd, xr, yd, yc);
  return detail::entropy_from_counts(t.counts, t.total);
}

/// MI(X;Y) = H(X) + H(Y) - H(X,Y). Analytically non-negative; tiny negative
/// rounding residue is clamped to 0.
inline double mutual_information(std::span<const int> x,
                                 std::span<const int> y) {
  if (x.size() != y.size())
    throw InvalidArgument("mutual_information: length mismatch");
  const double mi = entropy(x) + entropy(y) - joint_entropy(x, y);
  return mi < 0.0 ? 0.0 : mi;
}

/// Expected mutual information of a table's marginals under the permutation
/// (hypergeometric) model: the mean MI over all N! relabelings of one side
/// with both sets of marginal counts held fixed.
///
/// For each cell (i, j), feasible counts n_ij run from max(1, a_i + b_j - N)
/// to min(a_i, b_j); n_ij = 0 terms contribute nothing. Each term is
/// (n_ij / N) ln(N n_ij / (a_i b_j)) weighted by the hypergeometric
/// probability of n_ij, computed through log-factorials.
inline double expected_mi(const ContingencyTable& t) {
  const std::int64_t n = t.total;
  const std::vector<double> lf = detail::log_factorials(n);
  const double log_n = std::log(static_cast<double>(n));
  double emi = 0.0;
  for (std::size_t i = 0; i < t.rows; ++i) {
    const std::int64_t a = t.row_sums[i];
    const double log_a = std::log(static_cast<double>(a));
    for (std::size_t j = 0; j < t.cols; ++j) {
      const std::int64_t b = t.col_sums[j];
      const double log_b = std::log(static_cast<double>(b));
      const std::int64_t lo = std::max<std::int64_t>(1, a + b - n);
      const std::int64_t hi = std::min(a, b);
      for (std::int64_t nij = lo; nij <= hi; ++nij) {
        const double term = (static_cast<double>(nij) / static_cast<double>(n)) *
                            (log_n + std::log(static_cast<double>(nij)) -
                             log_a - log_b);
        const double log_weight =
            lf[static_cast<std::size_t>(a)] + lf[static_cast<std::size_t>(b)] +
            lf[static_cast<std::size_t>(n - a)] +
            lf[static_cast<std::size_t>(n - b)] -
            lf[static_cast<std::size_t>(n)] -
            lf[static_cast<std::size_t>(nij)] -
            lf[static_cast<std::size_t>(a - nij)] -
            lf[static_cast<std::size_t>(b - nij)] -
            lf[static_cast<std::size_t>(n - a - b + nij)];
        emi += term * std::exp(log_weight);
      }
    }
  }
  return emi;
}

/// Adjusted mutual information:
///   AMI = (MI - E[MI]) / (mean(H(X), H(Y)) - E[MI])
/// with the arithmetic mean. Degenerate cases: both vectors constant -> 1
/// (identical trivial partitions); exactly one constant -> 0; denominator
/// below 1e-12 in magnitude -> 0. Symmetric bitwise in its arguments and
/// invariant under bijective relabeling of either side.
inline double ami(std::span<const int> x, std::span<const int> y) {
  if (x.size() != y.size()) throw InvalidArgument("ami: length mismatch");
  if (x.empty()) throw InvalidArgument("ami: empty label vectors");

  std::size_t xr = 0, yc = 0;
  std::vector<int> xd = detail::densify(x, xr);
  std::vector<int> yd = detail::densify(y, yc);
  if (std::lexicographical_compare(yd.begin(), yd.end(), xd.begin(), xd.end())) {
    xd.swap(yd);
    std::swap(xr, yc);
  }
  if (xr == 1 && yc == 1) return 1.0;
  if (xr == 1 || yc == 1) return 0.0;

  const ContingencyTable t = detail::contingency_from_dense(xd, xr, yd, yc);
  const double hx = detail::entropy_from_counts(t.row_sums, t.total);
  const double hy = detail::entropy_from_counts(t.col_sums, t.total);
  const double hxy = detail::entropy_from_counts(t.counts, t.total);
  double mi = hx + hy - hxy;
  if (mi < 0.0) mi = 0.0;
  const double emi = expected_mi(t);
  const double denom = 0.5 * (hx + hy) - emi;
  if (std::abs(denom) < 1e-12) return 0.0;
  return (mi - emi) / denom;
}

} // namespace msts
