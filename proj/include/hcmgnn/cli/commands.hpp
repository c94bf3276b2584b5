#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hcmgnn/eval/metrics.hpp"
#include "hcmgnn/hetgraph/io.hpp"
#include "hcmgnn/hetgraph/sampling.hpp"
#include "hcmgnn/hetgraph/synthetic.hpp"
#include "hcmgnn/model/config.hpp"
#include "hcmgnn/training/training.hpp"

namespace hcmgnn {

/// Resolved run configuration. Exactly one of `synthetic` and `dataset` is set.
struct RunConfig {
  std::uint64_t seed = 7;
  std::optional<SyntheticOptions> synthetic;
  std::optional<DatasetPaths> dataset;
  std::optional<std::filesystem::path> split_file;
  ModelConfig model;
  TrainConfig train;
  double test_fraction = 0.1;
  std::size_t folds = 5;
  std::optional<std::vector<double>> strata_thresholds;
  std::filesystem::path output = "run";
  std::size_t threads = 1;
};

// Relative paths resolve against `base_dir`. Throws std::invalid_argument
// for unknown top-level keys or when not exactly one data source is given.
RunConfig run_config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

// Worker count: the configured value capped by HCMGNN_THREADS when set.
std::size_t effective_threads(const RunConfig& c);

// Sub-seeds derived from the top-level seed.
std::uint64_t split_seed(const RunConfig& c);
std::uint64_t cv_seed(const RunConfig& c);
std::uint64_t test_seed(const RunConfig& c);

struct PreparedData {
  LoadedGraph loaded;
  std::vector<LabeledTriplet> positives;
  SplitPlan plan;
  std::string split_hash;
};

PreparedData prepare_data(const RunConfig& c);

// Writes the dataset files and manifest.json under <output>/data.
nlohmann::json cmd_synth(const RunConfig& c);
// Trains all folds; writes metrics/cv_<variant>.json and checkpoints.
nlohmann::json cmd_cv(const RunConfig& c);
// Ranks the test split with `checkpoint` (default: the best CV fold's).
nlohmann::json cmd_test(const RunConfig& c, std::optional<std::filesystem::path> checkpoint = {});
// cv + test for every variant under the same split; writes metrics/ablation.*.
nlohmann::json cmd_ablate(const RunConfig& c);
std::vector<StratumReport> cmd_stratify(const RunConfig& c,
                                        std::optional<std::filesystem::path> checkpoint = {});

std::filesystem::path best_checkpoint_path(const RunConfig& c, Variant v);
std::filesystem::path cv_metrics_path(const RunConfig& c, Variant v);

}  // namespace hcmgnn
