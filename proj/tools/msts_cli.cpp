// msts command-line tool: dataset inspection, distance-matrix
// precomputation, merit-based subset selection, and multi-dataset
// benchmarks with scatter/plot-data export.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msts/msts.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::vector<std::string> datasets;
  std::string cache_dir;
  std::size_t folds = 3;
  std::uint64_t seed = 0;
  std::size_t max_k = 4;
  bool max_k_explicit = false; // default 4 is clamped to n_features, explicit values are not
  double top_frac = 0.05;
  std::string strategy = "merit";
  unsigned jobs = 1;
  std::string out;
  std::string scatter_csv;
  int band = -1;
  bool csv_wide = false;
};

// "data/ERing_TRAIN.ts" -> "ERing"
std::string dataset_display_name(const std::string& first_path) {
  std::string stem = fs::path(first_path).stem().string();
  for (const char* suffix : {"_TRAIN", "_TEST", "_train", "_test"}) {
    if (stem.size() > std::strlen(suffix) && stem.ends_with(suffix)) {
      stem.resize(stem.size() - std::strlen(suffix));
      break;
    }
  }
  return stem;
}

msts::Dataset load_one(const std::string& path, bool csv_wide) {
  const std::string ext = fs::path(path).extension().string();
  if (ext == ".csv") {
    msts::CsvSchema schema;
    schema.layout = csv_wide ? msts::CsvLayout::kWide : msts::CsvLayout::kLong;
    return msts::load_csv(path, schema);
  }
  return msts::load_ts(path);
}

// All paths merge into one dataset (train and test archives are pooled
// before every experiment).
msts::Dataset load_merged(const std::vector<std::string>& paths, bool csv_wide) {
  if (paths.empty()) throw msts::InvalidArgument("no dataset given");
  msts::Dataset merged = load_one(paths.front(), csv_wide);
  for (std::size_t i = 1; i < paths.size(); ++i)
    merged = msts::merge(merged, load_one(paths[i], csv_wide));
  return merged;
}

msts::SelectionConfig selection_config(const Options& opt) {
  msts::SelectionConfig config;
  config.n_folds = opt.folds;
  config.seed = opt.seed;
  config.max_k = opt.max_k;
  config.top_frac = opt.top_frac;
  config.band = opt.band;
  config.jobs = opt.jobs;
  return config;
}

void print_matrix_progress(std::size_t feature, std::size_t total, bool cached) {
  std::fprintf(stderr, "feature %zu/%zu: %s\n", feature + 1, total,
               cached ? "cached" : "computed");
}

struct PreparedRun {
  msts::Dataset dataset;
  std::string name;
  std::vector<msts::DistanceMatrix> matrices;
  msts::SetupTiming setup;
  msts::FoldAssignment folds;
  std::vector<msts::FeatureSubset> subsets;
  msts::SelectionConfig config;
};

// Loads (and merges) the dataset, fills the distance cache, builds folds,
// and enumerates candidate subsets -- everything the strategies treat as
// precomputed input.
PreparedRun prepare_run(const std::vector<std::string>& paths,
                        const fs::path& cache_dir, const Options& opt,
                        bool progress) {
  PreparedRun run{load_merged(paths, opt.csv_wide),
                  dataset_display_name(paths.front()),
                  {}, {}, {}, {}, selection_config(opt)};
  if (!opt.max_k_explicit)
    run.config.max_k = std::min(opt.max_k, run.dataset.n_features);

  msts::DtwOptions dtw;
  dtw.band = opt.band;
  dtw.jobs = opt.jobs;
  msts::CacheFillStats stats;
  const std::size_t total_features = run.dataset.n_features;
  auto [matrices, matrix_seconds] = msts::timed([&] {
    return msts::ensure_distance_matrices(
        run.dataset, cache_dir, dtw, &stats, true,
        progress ? std::function<void(std::size_t, bool)>(
                       [total_features](std::size_t f, bool cached) {
                         print_matrix_progress(f, total_features, cached);
                       })
                 : std::function<void(std::size_t, bool)>{});
  });
  run.matrices = std::move(matrices);
  run.setup.dtw_matrix_seconds = matrix_seconds;
  run.setup.matrices_loaded = stats.loaded;
  run.setup.matrices_computed = stats.computed;

  run.folds = msts::make_folds(run.dataset, opt.folds, opt.seed);

  auto [subsets, enum_seconds] = msts::timed([&] {
    return msts::enumerate_subsets(run.dataset.n_features, run.config.max_k);
  });
  run.subsets = std::move(subsets);
  run.setup.enumeration_seconds = enum_seconds;
  return run;
}

void write_text_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw msts::Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw msts::Error("failed writing '" + path + "'");
}

int cmd_info(const Options& opt) {
  const msts::Dataset dataset = load_merged(opt.datasets, opt.csv_wide);
  std::printf("%zu samples, %zu classes, %zu features, length %zu\n",
              dataset.size(), dataset.n_classes(), dataset.n_features,
              dataset.series_length);
  return 0;
}

int cmd_distances(const Options& opt) {
  const msts::Dataset dataset = load_merged(opt.datasets, opt.csv_wide);
  msts::DtwOptions dtw;
  dtw.band = opt.band;
  dtw.jobs = opt.jobs;
  msts::CacheFillStats stats;
  const std::size_t total = dataset.n_features;
  msts::ensure_distance_matrices(dataset, opt.cache_dir, dtw, &stats, true,
                                 [total](std::size_t f, bool cached) {
                                   print_matrix_progress(f, total, cached);
                                 });
  std::printf("%zu matrices ready (%zu computed, %zu cached) in %.3fs\n",
              stats.loaded + stats.computed, stats.computed, stats.loaded,
              stats.compute_seconds);
  return 0;
}

msts::SelectionResult run_strategy(const std::string& strategy,
                                   const PreparedRun& run,
                                   const msts::EvaluationContext& ctx) {
  if (strategy == "exhaustive") return msts::select_exhaustive(run.subsets, ctx);
  const msts::MeritPhase phase = msts::compute_merit_phase(ctx);
  if (strategy == "merit") return msts::select_by_merit(phase, ctx);
  if (strategy == "merit-wrapper") return msts::select_by_merit_wrapper(phase, ctx);
  throw msts::InvalidArgument("unknown strategy '" + strategy + "'");
}

std::vector<msts::ScatterRow> scatter_from_result(
    const msts::SelectionResult& result) {
  std::vector<msts::ScatterRow> rows;
  rows.reserve(result.evaluations.size());
  for (const msts::SubsetEvaluation& e : result.evaluations)
    rows.push_back({e.subset, e.merit, e.accuracy});
  return rows;
}

int cmd_select(const Options& opt) {
  const PreparedRun run = prepare_run(opt.datasets, opt.cache_dir, opt, true);
  const msts::EvaluationContext ctx{run.dataset, run.matrices, run.folds,
                                    run.config};

  const msts::SelectionResult result = run_strategy(opt.strategy, run, ctx);

  const nlohmann::json report =
      msts::make_report(run.name, run.dataset, run.config, run.setup, result);
  write_text_output(opt.out, report.dump(2) + "\n");

  if (!opt.scatter_csv.empty()) {
    std::ofstream csv(opt.scatter_csv, std::ios::trunc);
    if (!csv) throw msts::Error("cannot write '" + opt.scatter_csv + "'");
    msts::write_scatter_csv(csv, run.name, scatter_from_result(result));
    if (!csv) throw msts::Error("failed writing '" + opt.scatter_csv + "'");
  }
  return 0;
}

int cmd_benchmark(const Options& opt) {
  const msts::SelectionConfig config = selection_config(opt);
  nlohmann::json datasets_json = nlohmann::json::array();
  nlohmann::json table = nlohmann::json::array();
  std::optional<std::ofstream> csv;
  if (!opt.scatter_csv.empty()) {
    csv.emplace(opt.scatter_csv, std::ios::trunc);
    if (!*csv) throw msts::Error("cannot write '" + opt.scatter_csv + "'");
    *csv << "dataset,subset,k,merit,accuracy\n";
  }

  bool all_ok = true;
  std::fprintf(stderr, "%-16s %-14s %10s %12s\n", "dataset", "strategy",
               "accuracy", "seconds");
  for (const std::string& spec : opt.datasets) {
    // Each --dataset value is one benchmark entry; comma-separated paths
    // within it are merged (train + test archives).
    std::vector<std::string> paths;
    std::string::size_type pos = 0;
    while (pos <= spec.size()) {
      const auto comma = spec.find(',', pos);
      paths.push_back(spec.substr(
          pos, comma == std::string::npos ? std::string::npos : comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    const std::string name = dataset_display_name(paths.front());
    try {
      const PreparedRun run =
          prepare_run(paths, fs::path(opt.cache_dir) / name, opt, false);
      const msts::EvaluationContext ctx{run.dataset, run.matrices, run.folds,
                                        run.config};

      const msts::MeritPhase phase = msts::compute_merit_phase(ctx);
      const std::vector<msts::SelectionResult> results = {
          msts::select_by_merit(phase, ctx),
          msts::select_by_merit_wrapper(phase, ctx),
          msts::select_exhaustive(run.subsets, ctx)};

      nlohmann::json strategies = nlohmann::json::array();
      for (const msts::SelectionResult& r : results) {
        strategies.push_back(msts::selection_result_json(r));
        table.push_back({{"dataset", run.name},
                         {"strategy", r.strategy},
                         {"accuracy", r.chosen_accuracy},
                         {"total_seconds", r.total_seconds}});
        std::fprintf(stderr, "%-16s %-14s %10.4f %12.3f\n", run.name.c_str(),
                     r.strategy.c_str(), r.chosen_accuracy, r.total_seconds);
      }
      datasets_json.push_back(
          {{"summary", msts::dataset_summary_json(run.dataset, run.name)},
           {"config", msts::config_json(run.config)},
           {"setup", msts::setup_json(run.setup)},
           {"strategies", std::move(strategies)}});

      if (csv) {
        const auto rows =
            msts::merge_scatter_rows(phase.scores, results.back().evaluations);
        msts::write_scatter_csv(*csv, run.name, rows, /*header=*/false);
      }
    } catch (const std::exception& e) {
      all_ok = false;
      std::fprintf(stderr, "%-16s failed: %s\n", name.c_str(), e.what());
      datasets_json.push_back({{"summary", {{"name", name}}}, {"error", e.what()}});
    }
  }

  const nlohmann::json report = {{"config", msts::config_json(config)},
                                 {"datasets", std::move(datasets_json)},
                                 {"table", std::move(table)}};
  write_text_output(opt.out, report.dump(2) + "\n");
  if (csv && !*csv) throw msts::Error("failed writing '" + opt.scatter_csv + "'");
  return all_ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Merit-score feature-subset selection for multivariate "
               "time-series classification"};
  app.require_subcommand(1);
  Options opt;

  auto add_dataset = [&](CLI::App* cmd, bool required = true) {
    auto* o = cmd->add_option("--dataset", opt.datasets,
                              ".ts or .csv file; repeat to merge splits");
    if (required) o->required();
    cmd->add_flag("--csv-wide", opt.csv_wide,
                  "treat CSV input as wide layout (one row per sample/feature)");
  };
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--folds", opt.folds, "cross-validation folds (default 3)");
    cmd->add_option("--seed", opt.seed, "fold-shuffle seed (default 0)");
    cmd->add_option("--jobs", opt.jobs, "worker threads (default 1)");
    cmd->add_option("--band", opt.band,
                    "Sakoe-Chiba band width; negative = unconstrained");
  };

  CLI::App* info = app.add_subcommand("info", "print a dataset summary");
  add_dataset(info);

  CLI::App* distances =
      app.add_subcommand("distances", "precompute per-feature distance matrices");
  add_dataset(distances);
  distances->add_option("--cache-dir", opt.cache_dir, "matrix cache directory")
      ->required();
  add_common(distances);

  CLI::App* select =
      app.add_subcommand("select", "run one selection strategy end-to-end");
  add_dataset(select);
  select->add_option("--cache-dir", opt.cache_dir, "matrix cache directory")
      ->required();
  add_common(select);
  select->add_option("--max-k", opt.max_k, "largest subset size (default 4)")
      ->each([&opt](const std::string&) { opt.max_k_explicit = true; });
  select->add_option("--top-frac", opt.top_frac,
                     "fraction of subsets the wrapper evaluates (default 0.05)");
  select
      ->add_option("--strategy", opt.strategy,
                   "merit | merit-wrapper | exhaustive")
      ->check(CLI::IsMember({"merit", "merit-wrapper", "exhaustive"}));
  select->add_option("--out", opt.out, "report JSON path (default stdout)");
  select->add_option("--scatter-csv", opt.scatter_csv,
                     "write per-subset merit/accuracy CSV here");

  CLI::App* benchmark = app.add_subcommand(
      "benchmark", "run all three strategies over each dataset");
  benchmark
      ->add_option("--dataset", opt.datasets,
                   "one dataset per flag; comma-join paths to merge splits")
      ->required();
  benchmark->add_flag("--csv-wide", opt.csv_wide,
                      "treat CSV input as wide layout");
  benchmark->add_option("--cache-dir", opt.cache_dir,
                        "cache root (per-dataset subdirectories)")
      ->required();
  add_common(benchmark);
  benchmark->add_option("--max-k", opt.max_k, "largest subset size (default 4)")
      ->each([&opt](const std::string&) { opt.max_k_explicit = true; });
  benchmark->add_option("--top-frac", opt.top_frac,
                        "fraction of subsets the wrapper evaluates");
  benchmark->add_option("--out", opt.out, "report JSON path (default stdout)");
  benchmark->add_option("--scatter-csv", opt.scatter_csv,
                        "combined per-subset merit/accuracy CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (info->parsed()) return cmd_info(opt);
    if (distances->parsed()) return cmd_distances(opt);
    if (select->parsed()) return cmd_select(opt);
    return cmd_benchmark(opt);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
