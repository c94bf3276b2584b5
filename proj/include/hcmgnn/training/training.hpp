#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hcmgnn/eval/metrics.hpp"
#include "hcmgnn/hetgraph/sampling.hpp"
#include "hcmgnn/model/checkpoint.hpp"
#include "hcmgnn/model/model.hpp"

namespace hcmgnn {

struct TrainConfig {
  double gamma = 0.7;
  double learning_rate = 0.005;
  std::size_t max_epochs = 1000;
  std::size_t patience = 50;
  std::string validation_metric = "mrr";
  std::size_t negatives_per_positive = 30;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

// (1 - gamma) * sum_{y=1} (y - s)^2 + gamma * sum_{y=0} (y - s)^2 over an n x 1
// score column.
num::Var balanced_loss(num::Var scores, std::span<const double> labels, double gamma);
double balanced_loss_value(std::span<const double> scores, std::span<const double> labels,
                           double gamma);

// Named field of RankMetrics ("hit1", ..., "mrr").
double metric_value(const RankMetrics& m, const std::string& name);

/// Stops after `patience` consecutive epochs without strict improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);
  // Returns true when `value` is a new best.
  bool update(std::size_t epoch, double value);
  bool should_stop() const { return stale_ >= patience_; }
  double best() const { return best_; }
  std::size_t best_epoch() const { return best_epoch_; }

 private:
  std::size_t patience_;
  std::size_t stale_ = 0;
  double best_ = -std::numeric_limits<double>::infinity();
  std::size_t best_epoch_ = 0;
};

/// Positives each ranked against a fixed list of sampled negatives. The
/// candidate list of case i is shuffled; the positive sits at positive[i].
struct EvalSet {
  std::vector<Triplet> positives;
  std::vector<std::vector<Triplet>> candidates;
  std::vector<std::size_t> positive_index;

  std::size_t size() const { return positives.size(); }
};

EvalSet make_eval_set(std::span<const Triplet> positives, const TripletSet& known,
                      UniverseSize universe, std::size_t negatives, std::uint64_t seed);

std::vector<RankedCase> rank_eval_set(const EvalSet& set, const HetGraph& g,
                                      const GraphCache& cache, const ModelInputs& inputs,
                                      ModelParams& params, const ModelConfig& config);

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> validation;  // validation metric per epoch
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;      // 1-based
  double best_validation = 0;
  ModelParams best_params;
  double seconds = 0;
};

// Full-batch Adam on `samples`; validation after every epoch; returns the
// parameters of the best validation epoch. Throws on an empty training set
// and on a non-finite loss (naming the epoch).
TrainReport train(const HetGraph& g, const GraphCache& cache, const ModelInputs& inputs,
                  const ModelConfig& model, const TrainConfig& cfg,
                  std::span<const LabeledTriplet> samples, const EvalSet& validation,
                  std::uint64_t seed);

struct FoldData {
  std::vector<LabeledTriplet> train;  // positives then negatives
  EvalSet validation;
  std::size_t train_positives = 0;
  std::size_t train_negatives = 0;
};

FoldData make_fold(const HetGraph& g, const SplitPlan& plan, std::size_t fold,
                   const TripletSet& known, std::size_t negatives, std::uint64_t seed);

struct LeakageAudit {
  std::size_t checked = 0;
  std::size_t leaks = 0;
  std::vector<std::string> leaked_ids;
  bool clean() const { return leaks == 0; }
};

// Counts test-positive ids among the given training samples.
LeakageAudit audit_leakage(const HetGraph& g, const SplitPlan& plan,
                           std::span<const std::vector<LabeledTriplet>> training_sets);

struct FoldResult {
  std::size_t fold = 0;
  RankMetrics metrics;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  std::size_t train_positives = 0;
  std::size_t train_negatives = 0;
  std::vector<std::size_t> candidates_per_case;
  TrainReport report;
};

struct CvResult {
  std::vector<FoldResult> folds;
  RankMetrics mean;
  std::size_t best_fold = 0;  // highest validation metric at its best epoch
  LeakageAudit audit;
};

// Folds run on up to `threads` workers; results do not depend on the count.
CvResult run_cv(const HetGraph& g, const SplitPlan& plan, const ModelConfig& model,
                const TrainConfig& cfg, std::uint64_t seed, std::size_t threads = 1);

struct TestResult {
  RankMetrics metrics;
  std::vector<RankedCase> cases;
  std::vector<double> degrees;  // avg node degree of each test positive
  EvalSet set;
};

// Ranks each test positive against freshly sampled negatives (seeded).
// Rejects a checkpoint whose config or shapes do not fit the graph.
TestResult run_test(const HetGraph& g, const SplitPlan& plan, Checkpoint& checkpoint,
                    std::uint64_t seed, std::size_t negatives = 30);

// {"folds": [{fold, hit1, ..., mrr, epochs, best_epoch}], "mean": {...}}.
nlohmann::json cv_metrics_json(const CvResult& r);

// Sub-seed labels shared by the CLI and tests.
std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold, const char* purpose);

}  // namespace hcmgnn
