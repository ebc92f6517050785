// Acceptance gate for the feature-subset selection pipeline. Every numbered
// criterion below gets its own test suite (Criterion<N>_...), and a custom
// listener prints one "[criterion N] PASS/FAIL/SKIPPED" verdict line per
// number when the binary finishes.
//
// Criteria 5-8 check behaviour on standard public benchmark datasets, which
// are not bundled: point MSTS_UEA_DIR at a directory laid out as
//
//   <MSTS_UEA_DIR>/<Name>/<Name>_TRAIN.ts   (required)
//   <MSTS_UEA_DIR>/<Name>/<Name>_TEST.ts    (optional; merged in when present)
//
// Without it those suites skip (each still has an always-run synthetic
// analogue). Criterion 9 is a deliberately long benchmark and additionally
// requires MSTS_RUN_LONG_BENCHMARK=1.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "msts/dataset.hpp"
#include "msts/dtw.hpp"
#include "msts/infotheory.hpp"
#include "msts/knn_cv.hpp"
#include "msts/merit.hpp"
#include "msts/report.hpp"
#include "msts/selection.hpp"
#include "oracles.hpp"
#include "subprocess_util.hpp"
#include "test_util.hpp"

#ifndef MSTS_CLI_PATH
#error "MSTS_CLI_PATH must point at the command-line binary"
#endif

namespace {

namespace fs = std::filesystem;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

// ---------------------------------------------------------------------------
// Shared pipeline scaffolding.

struct Pipeline {
  msts::Dataset dataset;
  msts::SelectionConfig config;
  std::vector<msts::DistanceMatrix> matrices;
  msts::FoldAssignment folds;

  msts::EvaluationContext context() const {
    return msts::EvaluationContext{dataset, matrices, folds, config};
  }
};

Pipeline make_pipeline(msts::Dataset d, msts::SelectionConfig config) {
  Pipeline p{std::move(d), config, {}, {}};
  p.config.max_k = std::min<std::size_t>(p.config.max_k, p.dataset.n_features);
  msts::DtwOptions options;
  options.band = p.config.band;
  options.jobs = p.config.jobs;
  p.matrices.reserve(p.dataset.n_features);
  for (std::size_t f = 0; f < p.dataset.n_features; ++f)
    p.matrices.push_back(msts::build_distance_matrix(p.dataset, f, options));
  p.folds = msts::make_folds(p.dataset, p.config.n_folds, p.config.seed);
  return p;
}

struct StrategyRuns {
  msts::MeritPhase phase;
  msts::SelectionResult by_merit;
  msts::SelectionResult by_wrapper;
  msts::SelectionResult exhaustive;
};

StrategyRuns run_strategies(const Pipeline& p) {
  const msts::EvaluationContext ctx = p.context();
  StrategyRuns r;
  r.phase = msts::compute_merit_phase(ctx);
  r.by_merit = msts::select_by_merit(r.phase, ctx);
  r.by_wrapper = msts::select_by_merit_wrapper(r.phase, ctx);
  r.exhaustive = msts::select_exhaustive(
      msts::enumerate_subsets(p.dataset.n_features, p.config.max_k), ctx);
  return r;
}

// ---------------------------------------------------------------------------
// Real-dataset plumbing for the gated criteria.

const char* const kUeaLayoutHint =
    "needs real datasets: set MSTS_UEA_DIR to a directory containing "
    "<Name>/<Name>_TRAIN.ts (and optionally <Name>_TEST.ts, merged in when "
    "present) for the dataset named in this test";

std::optional<fs::path> uea_root() {
  const char* env = std::getenv("MSTS_UEA_DIR");
  if (env == nullptr || *env == '\0') return std::nullopt;
  return fs::path(env);
}

msts::Dataset load_uea(const fs::path& root, const std::string& name) {
  const fs::path train = root / name / (name + "_TRAIN.ts");
  if (!fs::exists(train))
    throw msts::InvalidArgument(
        "MSTS_UEA_DIR is set but " + train.string() +
        " is missing; expected layout <MSTS_UEA_DIR>/" + name + "/" + name +
        "_TRAIN.ts (optional " + name + "_TEST.ts alongside it)");
  msts::Dataset d = msts::load_ts(train);
  const fs::path test = root / name / (name + "_TEST.ts");
  if (fs::exists(test)) d = msts::merge(d, msts::load_ts(test));
  return d;
}

// Matrices for the real datasets are expensive; build each dataset once and
// share it across the criteria that use it.
const Pipeline& prepared_uea(const fs::path& root, const std::string& name) {
  static std::map<std::string, Pipeline> cache;
  const auto it = cache.find(name);
  if (it != cache.end()) return it->second;

  msts::SelectionConfig config;
  const unsigned hw = std::thread::hardware_concurrency();
  config.jobs = hw == 0 ? 1 : hw;
  auto [slot, inserted] =
      cache.emplace(name, make_pipeline(load_uea(root, name), config));
  (void)inserted;
  return slot->second;
}

// Median of three timing repetitions of strategy 2 and exhaustive search,
// with a single worker thread so the comparison is about work, not
// parallelism. Matrices are prebuilt; the measured spans are the selection
// phases themselves.
struct TimingMedians {
  double strategy2 = 0.0;
  double exhaustive = 0.0;
};

TimingMedians timing_medians(const Pipeline& base) {
  msts::SelectionConfig config = base.config;
  config.jobs = 1;
  const msts::EvaluationContext ctx{base.dataset, base.matrices, base.folds,
                                    config};
  const std::vector<msts::FeatureSubset> subsets =
      msts::enumerate_subsets(base.dataset.n_features, config.max_k);

  std::vector<double> s2_times, exh_times;
  for (int rep = 0; rep < 3; ++rep) {
    const msts::MeritPhase phase = msts::compute_merit_phase(ctx);
    s2_times.push_back(msts::select_by_merit_wrapper(phase, ctx).total_seconds);
    exh_times.push_back(msts::select_exhaustive(subsets, ctx).total_seconds);
  }
  std::sort(s2_times.begin(), s2_times.end());
  std::sort(exh_times.begin(), exh_times.end());
  return TimingMedians{s2_times[1], exh_times[1]};
}

// Merit scores and exhaustive accuracies in enumeration order, for rank
// correlation.
std::pair<std::vector<double>, std::vector<double>> merit_and_accuracy(
    const msts::MeritPhase& phase, const msts::SelectionResult& exhaustive) {
  std::vector<double> merits, accuracies;
  for (std::size_t i = 0; i < phase.scores.size(); ++i) {
    merits.push_back(phase.scores[i].value);
    accuracies.push_back(*exhaustive.evaluations[i].accuracy);
  }
  return {merits, accuracies};
}

// ===========================================================================
// Criterion 1: the banded-DP distance matches exhaustive alignment-path
// enumeration on 200 random short pairs, within 1e-9, in under 5 seconds.

TEST(Criterion1_DtwOracle, RandomShortPairsMatchPathEnumeration) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20260819);
  std::uniform_int_distribution<std::size_t> len(1, 5);
  std::normal_distribution<double> value(0.0, 2.0);

  for (int pair = 0; pair < 200; ++pair) {
    std::vector<double> a(len(rng)), b(len(rng));
    for (double& v : a) v = value(rng);
    for (double& v : b) v = value(rng);
    const double fast = msts::dtw_distance(a, b);
    const double slow = oracle::dtw_by_enumeration(a, b);
    ASSERT_NEAR(fast, slow, 1e-9)
        << "pair " << pair << " (lengths " << a.size() << "x" << b.size() << ")";
  }
  EXPECT_LT(seconds_since(start), 5.0);
}

// ===========================================================================
// Criterion 2: on a fixed suite of short label vectors (length <= 8, at most
// 3 distinct labels), the closed-form expected mutual information matches the
// literal average over all N! permutations, and the chance-adjusted score
// matches one composed from oracle parts — both within 1e-9, under 30 s.

std::vector<std::vector<int>> label_suite_for_length(std::size_t length,
                                                     std::mt19937_64& rng) {
  std::vector<std::vector<int>> suite;
  suite.emplace_back(length, 0); // constant vector
  std::uniform_int_distribution<int> binary(0, 1);
  std::uniform_int_distribution<int> ternary(0, 2);
  for (int i = 0; i < 2; ++i) {
    std::vector<int> v(length);
    for (int& x : v) x = binary(rng);
    suite.push_back(std::move(v));
  }
  for (int i = 0; i < 2; ++i) {
    std::vector<int> v(length);
    for (int& x : v) x = ternary(rng);
    suite.push_back(std::move(v));
  }
  return suite;
}

TEST(Criterion2_ChanceAdjustment, MatchesPermutationEnumeration) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20260820);

  std::size_t pairs = 0;
  for (std::size_t length = 1; length <= 8; ++length) {
    const std::vector<std::vector<int>> suite =
        label_suite_for_length(length, rng);
    for (std::size_t i = 0; i < suite.size(); ++i) {
      for (std::size_t j = i; j < suite.size(); ++j) {
        const std::vector<int>& x = suite[i];
        const std::vector<int>& y = suite[j];
        const double emi_fast =
            msts::expected_mi(msts::build_contingency(x, y));
        const double emi_slow = oracle::emi_by_permutation(x, y);
        ASSERT_NEAR(emi_fast, emi_slow, 1e-9)
            << "expected MI, length " << length << ", pair (" << i << "," << j
            << ")";
        ASSERT_NEAR(msts::ami(x, y), oracle::ami_composed(x, y), 1e-9)
            << "adjusted MI, length " << length << ", pair (" << i << "," << j
            << ")";
        // Pin the closed-form test oracle (used by criterion 3 at sizes where
        // the N! sweep is infeasible) to the permutation enumeration too.
        ASSERT_NEAR(oracle::emi_hypergeometric(x, y), emi_slow, 1e-9)
            << "closed-form oracle, length " << length << ", pair (" << i
            << "," << j << ")";
        ++pairs;
      }
    }
  }
  EXPECT_GE(pairs, 100u);
  EXPECT_LT(seconds_since(start), 30.0);
}

// ===========================================================================
// Criterion 3: on a 4-feature, 12-sample synthetic dataset, the pipeline's
// per-feature predictions match a from-scratch reimplementation exactly, its
// merit scores match the definitional formula within 1e-12, and every
// exhaustive accuracy matches the naive recomputation exactly — under 5 s.

TEST(Criterion3_EndToEndSmallInstance, MatchesNaiveReimplementation) {
  const auto start = std::chrono::steady_clock::now();

  const msts::Dataset d =
      testutil::make_synthetic(4, 3, {1.1, 0.7, 0.3, 0.0}, 8, 321);
  ASSERT_EQ(d.size(), 12u);
  ASSERT_EQ(d.n_features, 4u);

  const Pipeline p = make_pipeline(d, msts::SelectionConfig{});
  const msts::EvaluationContext ctx = p.context();
  const msts::MeritPhase phase = msts::compute_merit_phase(ctx);
  const std::vector<int> truth = d.label_codes();

  // Step 1: out-of-fold single-feature predictions, exact label agreement.
  std::vector<std::vector<int>> naive_preds;
  for (std::size_t f = 0; f < d.n_features; ++f) {
    naive_preds.push_back(oracle::naive_cv_predict(d, {f}, p.folds.fold_of));
    EXPECT_EQ(phase.single_feature_preds[f].predicted, naive_preds[f])
        << "feature " << f;
  }

  // Step 2: merit of every enumerated subset vs. the definitional formula
  // over an oracle-built correlation table. The table's entries come from
  // the lgamma-based closed-form oracle (the permutation sweep is infeasible
  // at 12 samples; criterion 2 pins this oracle to it at enumerable sizes).
  std::vector<double> cf;
  std::vector<std::vector<double>> ff(d.n_features,
                                      std::vector<double>(d.n_features));
  for (std::size_t f = 0; f < d.n_features; ++f) {
    cf.push_back(oracle::ami_hypergeometric(naive_preds[f], truth));
    for (std::size_t g = 0; g < d.n_features; ++g)
      ff[f][g] = oracle::ami_hypergeometric(naive_preds[f], naive_preds[g]);
  }
  const std::vector<msts::FeatureSubset> subsets =
      msts::enumerate_subsets(d.n_features, p.config.max_k);
  ASSERT_EQ(phase.scores.size(), subsets.size());
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    ASSERT_EQ(phase.scores[i].subset, subsets[i]);
    EXPECT_NEAR(phase.scores[i].value,
                oracle::naive_merit(subsets[i].features(), cf, ff), 1e-12)
        << "subset " << msts::subset_id_list(subsets[i]);
  }

  // Step 3: exhaustive accuracies, exact equality (identical label vectors
  // divided by the same count).
  const msts::SelectionResult exh = msts::select_exhaustive(subsets, ctx);
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    const double naive_acc = oracle::naive_accuracy(
        oracle::naive_cv_predict(d, subsets[i].features(), p.folds.fold_of), d);
    EXPECT_EQ(*exh.evaluations[i].accuracy, naive_acc)
        << "subset " << msts::subset_id_list(subsets[i]);
  }

  EXPECT_LT(seconds_since(start), 5.0);
}

// ===========================================================================
// Criterion 4: property suite over randomized inputs.

msts::CorrelationTable random_table(std::size_t n_features,
                                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> cf_value(0.05, 0.95);
  std::uniform_real_distribution<double> ff_value(0.0, 0.9);
  msts::CorrelationTable t;
  t.n_features = n_features;
  t.cf.resize(n_features);
  t.ff.assign(n_features * n_features, 0.0);
  for (std::size_t f = 0; f < n_features; ++f) {
    t.cf[f] = cf_value(rng);
    t.ff[f * n_features + f] = 1.0;
    for (std::size_t g = f + 1; g < n_features; ++g) {
      const double v = ff_value(rng);
      t.ff[f * n_features + g] = v;
      t.ff[g * n_features + f] = v;
    }
  }
  return t;
}

msts::FeatureSubset random_subset(std::size_t n_features, std::size_t min_k,
                                  std::mt19937_64& rng) {
  std::vector<std::size_t> ids(n_features);
  std::iota(ids.begin(), ids.end(), 0);
  std::shuffle(ids.begin(), ids.end(), rng);
  std::uniform_int_distribution<std::size_t> size(min_k, n_features);
  ids.resize(size(rng));
  return msts::FeatureSubset(ids);
}

TEST(Criterion4_Properties, MeritGrowsWithClassCorrelation) {
  std::mt19937_64 rng(41);
  for (int draw = 0; draw < 25; ++draw) {
    std::uniform_int_distribution<std::size_t> n_dist(2, 6);
    const std::size_t n = n_dist(rng);
    msts::CorrelationTable t = random_table(n, rng);
    const msts::FeatureSubset subset = random_subset(n, 1, rng);

    const double before = msts::merit_score(subset, t).value;
    std::uniform_int_distribution<std::size_t> pick(0, subset.k() - 1);
    t.cf[subset.features()[pick(rng)]] += 0.2;
    const double after = msts::merit_score(subset, t).value;
    EXPECT_GT(after, before) << "draw " << draw;
  }
}

TEST(Criterion4_Properties, MeritShrinksWithFeatureRedundancy) {
  std::mt19937_64 rng(42);
  for (int draw = 0; draw < 25; ++draw) {
    std::uniform_int_distribution<std::size_t> n_dist(2, 6);
    const std::size_t n = n_dist(rng);
    msts::CorrelationTable t = random_table(n, rng);
    const msts::FeatureSubset subset = random_subset(n, 2, rng);

    const double before = msts::merit_score(subset, t).value;
    std::uniform_int_distribution<std::size_t> pick(0, subset.k() - 1);
    std::size_t a = pick(rng), b = pick(rng);
    while (b == a) b = pick(rng);
    const std::size_t fa = subset.features()[a];
    const std::size_t fb = subset.features()[b];
    t.ff[fa * n + fb] += 0.2;
    t.ff[fb * n + fa] += 0.2;
    const double after = msts::merit_score(subset, t).value;
    EXPECT_LT(after, before) << "draw " << draw;
  }
}

TEST(Criterion4_Properties, SingleFeatureMeritEqualsClassCorrelation) {
  std::mt19937_64 rng(43);
  for (int draw = 0; draw < 10; ++draw) {
    const msts::CorrelationTable t = random_table(5, rng);
    for (std::size_t f = 0; f < 5; ++f)
      EXPECT_EQ(msts::merit_score(msts::FeatureSubset({f}), t).value, t.cf[f]);
  }
}

TEST(Criterion4_Properties, AmiIsSymmetricAndRelabelInvariant) {
  std::mt19937_64 rng(44);
  for (int draw = 0; draw < 30; ++draw) {
    std::uniform_int_distribution<std::size_t> len(3, 30);
    std::uniform_int_distribution<int> label(0, 3);
    const std::size_t n = len(rng);
    std::vector<int> x(n), y(n);
    for (int& v : x) v = label(rng);
    for (int& v : y) v = label(rng);

    EXPECT_EQ(msts::ami(x, y), msts::ami(y, x)) << "draw " << draw;

    std::vector<int> xr(n), yr(n);
    for (std::size_t i = 0; i < n; ++i) {
      xr[i] = 41 - 7 * x[i]; // injective relabelings must not change the score
      yr[i] = 3 * y[i] + 100;
    }
    EXPECT_EQ(msts::ami(x, y), msts::ami(xr, yr)) << "draw " << draw;
  }
}

TEST(Criterion4_Properties, FoldsAreStratifiedAndSeedDeterministic) {
  std::mt19937_64 rng(45);
  for (int draw = 0; draw < 20; ++draw) {
    std::uniform_int_distribution<std::size_t> classes(2, 4);
    std::uniform_int_distribution<std::size_t> folds_dist(2, 4);
    const std::size_t n_classes = classes(rng);
    const std::size_t n_folds = folds_dist(rng);

    std::vector<std::vector<std::vector<double>>> series;
    std::vector<std::string> labels;
    std::uniform_int_distribution<std::size_t> extra(0, 7);
    for (std::size_t c = 0; c < n_classes; ++c) {
      const std::size_t size = n_folds + extra(rng);
      for (std::size_t s = 0; s < size; ++s) {
        series.push_back({{static_cast<double>(s), static_cast<double>(c)}});
        labels.push_back("c" + std::to_string(c));
      }
    }
    const msts::Dataset d = testutil::make_dataset(series, labels);

    const std::uint64_t seed = rng();
    const msts::FoldAssignment fa = msts::make_folds(d, n_folds, seed);
    ASSERT_EQ(fa.fold_of.size(), d.size());

    // Per class, fold occupancy differs by at most one sample.
    for (std::size_t c = 0; c < n_classes; ++c) {
      std::vector<std::size_t> count(n_folds, 0);
      std::size_t class_size = 0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.samples[i].label != "c" + std::to_string(c)) continue;
        ASSERT_LT(fa.fold_of[i], n_folds);
        ++count[fa.fold_of[i]];
        ++class_size;
      }
      const auto [lo, hi] = std::minmax_element(count.begin(), count.end());
      EXPECT_LE(*hi - *lo, 1u)
          << "class " << c << " of size " << class_size << ", " << n_folds
          << " folds, draw " << draw;
    }

    EXPECT_EQ(msts::make_folds(d, n_folds, seed), fa) << "same-seed rerun";
  }
}

TEST(Criterion4_Properties, PredictionsComeFromOutsideTheQuerysFold) {
  std::mt19937_64 rng(46);
  for (int draw = 0; draw < 10; ++draw) {
    std::uniform_int_distribution<std::size_t> per_class(3, 5);
    const msts::Dataset d = testutil::make_synthetic(
        per_class(rng), 3, {1.0, 0.5, 0.1}, 6, rng());
    const Pipeline p = make_pipeline(d, msts::SelectionConfig{});
    const msts::FeatureSubset subset = random_subset(d.n_features, 1, rng);

    const msts::PredictionVector preds =
        msts::cv_predict(d, subset.features(), p.matrices, p.folds, 1);

    for (std::size_t q = 0; q < d.size(); ++q) {
      // Recompute the nearest out-of-fold sample; ties to the lowest index.
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_j = d.size();
      for (std::size_t j = 0; j < d.size(); ++j) {
        if (p.folds.fold_of[j] == p.folds.fold_of[q]) continue;
        const double dist =
            msts::subset_distance(subset.features(), q, j, p.matrices);
        if (dist < best) {
          best = dist;
          best_j = j;
        }
      }
      ASSERT_LT(best_j, d.size());
      EXPECT_EQ(preds.predicted[q], d.label_code(d.samples[best_j].label))
          << "query " << q << ", draw " << draw;
    }
  }
}

TEST(Criterion4_Properties, ExhaustiveDominatesWrapperDominatesMeritPick) {
  for (const std::uint64_t seed : {81, 82, 83, 84, 85, 86}) {
    const msts::Dataset d = testutil::make_synthetic(
        4, 3, {1.2, 0.8, 0.4, 0.1}, 8, seed);
    msts::SelectionConfig config;
    config.top_frac = 0.25;
    const Pipeline p = make_pipeline(d, config);
    const StrategyRuns r = run_strategies(p);

    EXPECT_GE(r.exhaustive.chosen_accuracy, r.by_wrapper.chosen_accuracy)
        << "seed " << seed;
    EXPECT_GE(r.by_wrapper.chosen_accuracy, r.by_merit.chosen_accuracy)
        << "seed " << seed;
  }
}

// ===========================================================================
// Criterion 5: on ERing, the single highest-merit subset is also the
// exhaustive optimum, found in under a minute.

TEST(Criterion5_ERing, MeritArgmaxIsTheExhaustiveOptimum) {
  const std::optional<fs::path> root = uea_root();
  if (!root) GTEST_SKIP() << kUeaLayoutHint;
  const auto start = std::chrono::steady_clock::now();

  const Pipeline& p = prepared_uea(*root, "ERing");
  const StrategyRuns r = run_strategies(p);

  EXPECT_EQ(r.by_merit.chosen, r.exhaustive.chosen)
      << "merit picked " << msts::subset_id_list(r.by_merit.chosen)
      << " but the exhaustive optimum is "
      << msts::subset_id_list(r.exhaustive.chosen);
  std::printf("criterion 5 ERing: merit pick %s (acc %.4f), exhaustive %s "
              "(acc %.4f)\n",
              msts::subset_id_list(r.by_merit.chosen).c_str(),
              r.by_merit.chosen_accuracy,
              msts::subset_id_list(r.exhaustive.chosen).c_str(),
              r.exhaustive.chosen_accuracy);
  EXPECT_LT(seconds_since(start), 60.0);
}

TEST(Criterion5_SyntheticAnalogue, MeritArgmaxIsTheExhaustiveOptimum) {
  // One strongly informative feature among near-noise: the merit ranking and
  // the exhaustive search must agree on the winner.
  const msts::Dataset d =
      testutil::make_synthetic(4, 3, {1.5, 0.05, 0.0, 0.0}, 12, 501);
  const Pipeline p = make_pipeline(d, msts::SelectionConfig{});
  const StrategyRuns r = run_strategies(p);
  EXPECT_EQ(r.by_merit.chosen, r.exhaustive.chosen)
      << "merit picked " << msts::subset_id_list(r.by_merit.chosen)
      << " but the exhaustive optimum is "
      << msts::subset_id_list(r.exhaustive.chosen);
}

// ===========================================================================
// Criterion 6: on RacketSports, the wrapper over the top merit fraction
// reaches the exhaustive optimum's accuracy (compared against this run's own
// exhaustive search), in under ten minutes.

TEST(Criterion6_RacketSports, WrapperReachesExhaustiveAccuracy) {
  const std::optional<fs::path> root = uea_root();
  if (!root) GTEST_SKIP() << kUeaLayoutHint;
  const auto start = std::chrono::steady_clock::now();

  const Pipeline& p = prepared_uea(*root, "RacketSports");
  const StrategyRuns r = run_strategies(p);

  EXPECT_EQ(r.by_wrapper.chosen_accuracy, r.exhaustive.chosen_accuracy)
      << "wrapper chose " << msts::subset_id_list(r.by_wrapper.chosen)
      << " while exhaustive chose "
      << msts::subset_id_list(r.exhaustive.chosen);
  std::printf("criterion 6 RacketSports: wrapper %s (acc %.4f), exhaustive %s "
              "(acc %.4f)\n",
              msts::subset_id_list(r.by_wrapper.chosen).c_str(),
              r.by_wrapper.chosen_accuracy,
              msts::subset_id_list(r.exhaustive.chosen).c_str(),
              r.exhaustive.chosen_accuracy);
  EXPECT_LT(seconds_since(start), 600.0);
}

TEST(Criterion6_SyntheticAnalogue, WrapperReachesExhaustiveAccuracy) {
  const msts::Dataset d =
      testutil::make_synthetic(5, 3, {1.2, 0.9, 0.1, 0.0}, 10, 601);
  msts::SelectionConfig config;
  config.top_frac = 0.25; // 15 subsets -> the wrapper fully evaluates 4
  const Pipeline p = make_pipeline(d, config);
  const StrategyRuns r = run_strategies(p);
  EXPECT_EQ(r.by_wrapper.chosen_accuracy, r.exhaustive.chosen_accuracy)
      << "wrapper chose " << msts::subset_id_list(r.by_wrapper.chosen)
      << " while exhaustive chose "
      << msts::subset_id_list(r.exhaustive.chosen);
}

// ===========================================================================
// Criterion 7: merit is a useful guide — its Spearman rank correlation with
// exhaustive accuracy exceeds 0.3 on both real datasets. The measured value
// is reported either way.

void expect_rank_correlation(const Pipeline& p, const std::string& name) {
  const msts::EvaluationContext ctx = p.context();
  const msts::MeritPhase phase = msts::compute_merit_phase(ctx);
  const msts::SelectionResult exh = msts::select_exhaustive(
      msts::enumerate_subsets(p.dataset.n_features, p.config.max_k), ctx);
  const auto [merits, accuracies] = merit_and_accuracy(phase, exh);
  const double rho = oracle::spearman(merits, accuracies);
  std::printf("criterion 7 %s: spearman rho = %.4f over %zu subsets\n",
              name.c_str(), rho, merits.size());
  EXPECT_GT(rho, 0.3) << name << ": measured spearman rho = " << rho;
}

TEST(Criterion7_MeritAccuracyCorrelation, ERingAboveThreshold) {
  const std::optional<fs::path> root = uea_root();
  if (!root) GTEST_SKIP() << kUeaLayoutHint;
  expect_rank_correlation(prepared_uea(*root, "ERing"), "ERing");
}

TEST(Criterion7_MeritAccuracyCorrelation, RacketSportsAboveThreshold) {
  const std::optional<fs::path> root = uea_root();
  if (!root) GTEST_SKIP() << kUeaLayoutHint;
  expect_rank_correlation(prepared_uea(*root, "RacketSports"), "RacketSports");
}

TEST(Criterion7_SyntheticAnalogue, SpearmanAboveThreshold) {
  const msts::Dataset d =
      testutil::make_synthetic(6, 3, {1.4, 1.0, 0.7, 0.4, 0.1}, 10, 701);
  expect_rank_correlation(make_pipeline(d, msts::SelectionConfig{}),
                          "synthetic analogue");
}

// ===========================================================================
// Criterion 8: timing directions with one worker, median of three reps —
// the wrapper strategy beats exhaustive search on RacketSports, while tiny
// ERing is the family's known reversal (the merit phase costs more than the
// fifteen cheap evaluations it saves).

TEST(Criterion8_Timing, WrapperBeatsExhaustiveOnRacketSports) {
  const std::optional<fs::path> root = uea_root();
  if (!root) GTEST_SKIP() << kUeaLayoutHint;
  const TimingMedians m = timing_medians(prepared_uea(*root, "RacketSports"));
  std::printf("criterion 8 RacketSports: strategy-2 median %.4fs, exhaustive "
              "median %.4fs\n",
              m.strategy2, m.exhaustive);
  EXPECT_LT(m.strategy2, m.exhaustive)
      << "strategy-2 median " << m.strategy2 << "s vs exhaustive median "
      << m.exhaustive << "s";
}

TEST(Criterion8_Timing, ExhaustiveBeatsMeritPipelineOnERing) {
  const std::optional<fs::path> root = uea_root();
  if (!root) GTEST_SKIP() << kUeaLayoutHint;
  const TimingMedians m = timing_medians(prepared_uea(*root, "ERing"));
  std::printf("criterion 8 ERing: strategy-2 median %.4fs, exhaustive median "
              "%.4fs\n",
              m.strategy2, m.exhaustive);
  EXPECT_LT(m.exhaustive, m.strategy2)
      << "exhaustive median " << m.exhaustive << "s vs strategy-2 median "
      << m.strategy2 << "s";
}

TEST(Criterion8_SyntheticAnalogue, WrapperBeatsExhaustiveOnSixFeatures) {
  // Six features / 56 subsets: the wrapper evaluates three of them plus the
  // merit phase, which is far less work than 56 full evaluations.
  const msts::Dataset six = testutil::make_synthetic(
      50, 3, {1.2, 1.0, 0.8, 0.6, 0.4, 0.2}, 30, 801);
  msts::SelectionConfig config;
  config.jobs = 1;
  const TimingMedians m = timing_medians(make_pipeline(six, config));
  std::printf("criterion 8 analogue (6 features): strategy-2 median %.4fs, "
              "exhaustive median %.4fs\n",
              m.strategy2, m.exhaustive);
  EXPECT_LT(m.strategy2, m.exhaustive)
      << "strategy-2 median " << m.strategy2 << "s vs exhaustive median "
      << m.exhaustive << "s";

  // Small-search-space direction, reported for context but not asserted: with
  // only 15 subsets the merit phase may or may not pay for itself.
  const msts::Dataset four =
      testutil::make_synthetic(50, 3, {1.2, 0.8, 0.4, 0.2}, 30, 802);
  const TimingMedians m4 = timing_medians(make_pipeline(four, config));
  std::printf("criterion 8 analogue (4 features, informational): strategy-2 "
              "median %.4fs, exhaustive median %.4fs\n",
              m4.strategy2, m4.exhaustive);
}

// ===========================================================================
// Criterion 9: optional long benchmark over six real datasets. Gated twice:
// it needs MSTS_UEA_DIR and MSTS_RUN_LONG_BENCHMARK=1 (the longest dataset
// alone takes hours of DTW time).

TEST(Criterion9_LongBenchmark, SixDatasetSweepWithNatopsGap) {
  const std::optional<fs::path> root = uea_root();
  if (!root) GTEST_SKIP() << kUeaLayoutHint;
  const char* flag = std::getenv("MSTS_RUN_LONG_BENCHMARK");
  if (flag == nullptr || std::string(flag) != "1")
    GTEST_SKIP() << "multi-hour run; set MSTS_RUN_LONG_BENCHMARK=1 to enable "
                    "(the longest dataset's pairwise alignment distances "
                    "dominate the runtime)";

  const std::vector<std::string> names = {
      "ArticularyWordRecognition", "JapaneseVowels", "Cricket",
      "ERing",                     "NATOPS",         "RacketSports"};

  for (const std::string& name : names) {
    try {
      const auto start = std::chrono::steady_clock::now();
      const Pipeline& p = prepared_uea(*root, name);
      const StrategyRuns r = run_strategies(p);
      std::printf("criterion 9 %-26s wrapper %s acc %.4f | exhaustive %s acc "
                  "%.4f | wall %.1fs\n",
                  name.c_str(),
                  msts::subset_id_list(r.by_wrapper.chosen).c_str(),
                  r.by_wrapper.chosen_accuracy,
                  msts::subset_id_list(r.exhaustive.chosen).c_str(),
                  r.exhaustive.chosen_accuracy, seconds_since(start));
      std::fflush(stdout);

      if (name == "NATOPS") {
        EXPECT_LE(r.exhaustive.chosen_accuracy - r.by_wrapper.chosen_accuracy,
                  0.06)
            << "NATOPS wrapper accuracy " << r.by_wrapper.chosen_accuracy
            << " vs exhaustive " << r.exhaustive.chosen_accuracy;
      }
    } catch (const std::exception& e) {
      ADD_FAILURE() << name << ": " << e.what();
    }
  }
}

// ===========================================================================
// Criterion 10: two CLI selection runs with the same configuration and seed
// produce byte-identical reports once wall-clock fields are dropped, at every
// worker count; and the worker count itself changes nothing but the config
// echo.

TEST(Criterion10_Determinism, ReportsIdenticalModuloTimingAtAnyWorkerCount) {
  const fs::path dir = testutil::fresh_dir("determinism");
  const msts::Dataset d =
      testutil::make_synthetic(4, 3, {1.0, 0.6, 0.2}, 6, 1001);
  const fs::path ts = dir / "Demo_TRAIN.ts";
  msts::save_ts(d, ts);

  std::vector<nlohmann::json> stripped;
  for (const std::string& jobs : {"1", "2", "7"}) {
    for (int run = 0; run < 2; ++run) {
      const std::string tag = "j" + jobs + "_r" + std::to_string(run);
      const fs::path cache = dir / ("cache_" + tag);
      const fs::path report = dir / ("report_" + tag + ".json");
      const testutil::RunResult r = testutil::run_process(
          MSTS_CLI_PATH,
          {"select", "--dataset", ts.string(), "--cache-dir", cache.string(),
           "--strategy", "merit-wrapper", "--jobs", jobs, "--seed", "0",
           "--out", report.string()},
          dir);
      ASSERT_EQ(r.exit_code, 0) << r.err;
      stripped.push_back(testutil::strip_seconds(
          nlohmann::json::parse(testutil::slurp(report))));
    }
  }

  ASSERT_EQ(stripped.size(), 6u);
  for (std::size_t i = 0; i + 1 < stripped.size(); i += 2)
    EXPECT_EQ(stripped[i], stripped[i + 1])
        << "repeat run differed at worker-count index " << i / 2;

  for (nlohmann::json& j : stripped) j["config"].erase("jobs");
  for (std::size_t i = 1; i < stripped.size(); ++i)
    EXPECT_EQ(stripped[0], stripped[i])
        << "worker count changed the report beyond the config echo";
}

// ===========================================================================
// Verdict printer: one "[criterion N] ..." line per criterion number, rolled
// up across that criterion's tests (FAIL if any failed, else SKIPPED if any
// skipped, else PASS).

class CriterionListener : public ::testing::EmptyTestEventListener {
 public:
  void OnTestEnd(const ::testing::TestInfo& info) override {
    const std::string suite = info.test_suite_name();
    const std::string prefix = "Criterion";
    if (suite.rfind(prefix, 0) != 0) return;
    std::size_t pos = prefix.size();
    std::size_t number = 0;
    bool any_digit = false;
    while (pos < suite.size() &&
           std::isdigit(static_cast<unsigned char>(suite[pos]))) {
      number = number * 10 + static_cast<std::size_t>(suite[pos] - '0');
      ++pos;
      any_digit = true;
    }
    if (!any_digit) return;
    Tally& t = tallies_[number];
    if (info.result()->Failed())
      ++t.failed;
    else if (info.result()->Skipped())
      ++t.skipped;
    else
      ++t.passed;
  }

  void OnTestProgramEnd(const ::testing::UnitTest&) override {
    std::printf("\nacceptance verdicts:\n");
    for (const auto& [number, t] : tallies_) {
      const char* verdict =
          t.failed > 0 ? "FAIL" : t.skipped > 0 ? "SKIPPED" : "PASS";
      std::printf("[criterion %zu] %s (%zu passed, %zu failed, %zu skipped)\n",
                  number, verdict, t.passed, t.failed, t.skipped);
    }
    std::fflush(stdout);
  }

 private:
  struct Tally {
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::size_t skipped = 0;
  };
  std::map<std::size_t, Tally> tallies_;
};

} // namespace

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  ::testing::UnitTest::GetInstance()->listeners().Append(
      new CriterionListener); // gtest takes ownership
  return RUN_ALL_TESTS();
}
