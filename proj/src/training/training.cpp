#include "hcmgnn/training/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "hcmgnn/random.hpp"

namespace hcmgnn {

void TrainConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("train config: gamma must lie in [0, 1]");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train config: learning rate must be positive");
  if (patience == 0) throw std::invalid_argument("train config: patience must be at least 1");
  if (max_epochs == 0) throw std::invalid_argument("train config: max_epochs must be at least 1");
  if (negatives_per_positive == 0) throw std::invalid_argument("train config: need at least one negative");
  metric_value(RankMetrics{}, validation_metric);
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"gamma", c.gamma},
          {"learning_rate", c.learning_rate},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"validation_metric", c.validation_metric},
          {"negatives_per_positive", c.negatives_per_positive}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.gamma = j.value("gamma", c.gamma);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.validation_metric = j.value("validation_metric", c.validation_metric);
  c.negatives_per_positive = j.value("negatives_per_positive", c.negatives_per_positive);
  c.validate();
  return c;
}

num::Var balanced_loss(num::Var scores, std::span<const double> labels, double gamma) {
  if (scores.cols() != 1 || scores.rows() != labels.size()) {
    throw std::invalid_argument("balanced_loss: " + std::to_string(labels.size()) +
                                " labels for scores " + scores.value().shape_string());
  }
  num::Tape& tape = *scores.tape;
  num::Tensor y(labels.size(), 1);
  num::Tensor w(labels.size(), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    y[i] = labels[i];
    w[i] = labels[i] == 1.0 ? 1.0 - gamma : gamma;
  }
  num::Var diff = num::sub(scores, tape.constant(std::move(y)));
  return num::sum(num::scale_rows(num::hadamard(diff, diff), tape.constant(std::move(w))));
}

double balanced_loss_value(std::span<const double> scores, std::span<const double> labels,
                           double gamma) {
  if (scores.size() != labels.size()) throw std::invalid_argument("balanced_loss_value: length mismatch");
  double pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double d = labels[i] - scores[i];
    (labels[i] == 1.0 ? pos : neg) += d * d;
  }
  return (1.0 - gamma) * pos + gamma * neg;
}

double metric_value(const RankMetrics& m, const std::string& name) {
  if (name == "mrr") return m.mrr;
  if (name == "hit1") return m.hit1;
  if (name == "hit3") return m.hit3;
  if (name == "hit5") return m.hit5;
  if (name == "ndcg1") return m.ndcg1;
  if (name == "ndcg3") return m.ndcg3;
  if (name == "ndcg5") return m.ndcg5;
  throw std::invalid_argument("unknown metric '" + name + "'");
}

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
  if (patience == 0) throw std::invalid_argument("EarlyStopping: patience must be at least 1");
}

bool EarlyStopping::update(std::size_t epoch, double value) {
  if (value > best_) {
    best_ = value;
    best_epoch_ = epoch;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold, const char* purpose) {
  return derive_seed(seed, "fold/" + std::to_string(fold) + "/" + purpose);
}

EvalSet make_eval_set(std::span<const Triplet> positives, const TripletSet& known,
                      UniverseSize universe, std::size_t negatives, std::uint64_t seed) {
  const auto sampled =
      sample_negatives(positives, known, universe, negatives, derive_seed(seed, "negatives"));
  Rng rng(derive_seed(seed, "candidate-order"));
  EvalSet set;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    std::vector<std::size_t> order(negatives + 1);
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    rng.shuffle(order);
    std::vector<Triplet> cands(order.size());
    std::size_t pos = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (order[k] == 0) {
        cands[k] = positives[i];
        pos = k;
      } else {
        cands[k] = sampled[i * negatives + order[k] - 1].triplet;
      }
    }
    set.positives.push_back(positives[i]);
    set.candidates.push_back(std::move(cands));
    set.positive_index.push_back(pos);
  }
  return set;
}

std::vector<RankedCase> rank_eval_set(const EvalSet& set, const HetGraph& g,
                                      const GraphCache& cache, const ModelInputs& inputs,
                                      ModelParams& params, const ModelConfig& config) {
  std::vector<Triplet> flat;
  for (const auto& c : set.candidates) flat.insert(flat.end(), c.begin(), c.end());
  const auto scores = score_triplets(cache, inputs, params, config, flat);
  std::vector<RankedCase> out;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const std::size_t n = set.candidates[i].size();
    std::vector<double> s(scores.begin() + static_cast<std::ptrdiff_t>(offset),
                          scores.begin() + static_cast<std::ptrdiff_t>(offset + n));
    out.push_back(make_case(g.triplet_id(set.positives[i]), std::move(s), set.positive_index[i]));
    offset += n;
  }
  return out;
}

TrainReport train(const HetGraph& g, const GraphCache& cache, const ModelInputs& inputs,
                  const ModelConfig& model, const TrainConfig& cfg,
                  std::span<const LabeledTriplet> samples, const EvalSet& validation,
                  std::uint64_t seed) {
  cfg.validate();
  if (samples.empty()) throw std::invalid_argument("train: empty training set");
  if (validation.size() == 0) throw std::invalid_argument("train: empty validation set");
  const auto start = std::chrono::steady_clock::now();

  ModelParams params = ModelParams::init(model, inputs.dims(), cache.metapaths(), seed);
  auto named = params.named();
  num::Adam adam(num::AdamOptions{cfg.learning_rate});
  std::vector<Triplet> triplets;
  std::vector<double> labels;
  for (const auto& s : samples) {
    triplets.push_back(s.triplet);
    labels.push_back(static_cast<double>(s.label));
  }

  TrainReport report;
  EarlyStopping stopper(cfg.patience);
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    params.zero_grad();
    num::Tape tape;
    const auto out = forward(tape, cache, inputs, params, model, triplets);
    num::Var loss = balanced_loss(out.scores, labels, cfg.gamma);
    const double value = loss.value().item();
    if (!std::isfinite(value)) {
      throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch));
    }
    tape.backward(loss);
    adam.step(named);
    report.train_loss.push_back(value);

    const auto cases = rank_eval_set(validation, g, cache, inputs, params, model);
    const double metric = metric_value(rank_metrics(cases), cfg.validation_metric);
    report.validation.push_back(metric);
    report.epochs = epoch;
    if (stopper.update(epoch, metric)) report.best_params = params;
    if (stopper.should_stop()) break;
  }
  report.best_epoch = stopper.best_epoch();
  report.best_validation = stopper.best();
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

FoldData make_fold(const HetGraph& g, const SplitPlan& plan, std::size_t fold,
                   const TripletSet& known, std::size_t negatives, std::uint64_t seed) {
  const UniverseSize universe = UniverseSize::of(g);
  FoldData data;
  const auto positives = plan.train_positives(fold);
  for (const Triplet& t : positives) data.train.push_back(LabeledTriplet::positive(t));
  const auto sampled =
      sample_training_negatives(positives, known, universe, fold_seed(seed, fold, "train-negatives"));
  data.train.insert(data.train.end(), sampled.begin(), sampled.end());
  data.train_positives = positives.size();
  data.train_negatives = sampled.size();
  data.validation = make_eval_set(plan.validation_positives(fold), known, universe, negatives,
                                  fold_seed(seed, fold, "validation"));
  return data;
}

LeakageAudit audit_leakage(const HetGraph& g, const SplitPlan& plan,
                           std::span<const std::vector<LabeledTriplet>> training_sets) {
  const TripletSet test(plan.test);
  LeakageAudit audit;
  for (const auto& set : training_sets) {
    for (const auto& s : set) {
      ++audit.checked;
      if (test.contains(s.triplet)) {
        ++audit.leaks;
        audit.leaked_ids.push_back(g.triplet_id(s.triplet));
      }
    }
  }
  return audit;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

TripletSet all_positives(const HetGraph& g) {
  return TripletSet(triplets_of(derive_positive_triplets(g)));
}

}  // namespace

CvResult run_cv(const HetGraph& g, const SplitPlan& plan, const ModelConfig& model,
                const TrainConfig& cfg, std::uint64_t seed, std::size_t threads) {
  model.validate();
  cfg.validate();
  const TripletSet known = all_positives(g);
  const GraphCache cache(g, model.variant);
  const ModelInputs inputs = ModelInputs::from_graph(g, model.variant);

  std::vector<FoldData> data;
  for (std::size_t k = 0; k < plan.fold_count(); ++k) {
    data.push_back(make_fold(g, plan, k, known, cfg.negatives_per_positive, seed));
  }
  std::vector<std::vector<LabeledTriplet>> train_sets;
  for (const auto& d : data) train_sets.push_back(d.train);
  CvResult result;
  result.audit = audit_leakage(g, plan, train_sets);
  if (!result.audit.clean()) {
    throw std::logic_error("leakage audit: " + std::to_string(result.audit.leaks) +
                           " test triplets found in training data, first " +
                           result.audit.leaked_ids.front());
  }

  result.folds.resize(plan.fold_count());
  parallel_for(plan.fold_count(), threads, [&](std::size_t k) {
    FoldResult& f = result.folds[k];
    f.fold = k;
    f.report = train(g, cache, inputs, model, cfg, data[k].train, data[k].validation,
                     fold_seed(seed, k, "init"));
    const auto cases = rank_eval_set(data[k].validation, g, cache, inputs, f.report.best_params, model);
    f.metrics = rank_metrics(cases);
    f.epochs = f.report.epochs;
    f.best_epoch = f.report.best_epoch;
    f.train_positives = data[k].train_positives;
    f.train_negatives = data[k].train_negatives;
    for (const auto& c : data[k].validation.candidates) f.candidates_per_case.push_back(c.size());
  });

  std::vector<RankMetrics> per_fold;
  for (const auto& f : result.folds) per_fold.push_back(f.metrics);
  result.mean = mean_metrics(per_fold);
  for (std::size_t k = 1; k < result.folds.size(); ++k) {
    if (result.folds[k].report.best_validation > result.folds[result.best_fold].report.best_validation) {
      result.best_fold = k;
    }
  }
  return result;
}

TestResult run_test(const HetGraph& g, const SplitPlan& plan, Checkpoint& checkpoint,
                    std::uint64_t seed, std::size_t negatives) {
  if (plan.test.empty()) throw std::invalid_argument("run_test: the split has no test positives");
  const GraphCache cache(g, checkpoint.config.variant);
  const ModelInputs inputs = ModelInputs::from_graph(g, checkpoint.config.variant);
  TestResult result;
  result.set = make_eval_set(plan.test, all_positives(g), UniverseSize::of(g), negatives,
                             derive_seed(seed, "test"));
  try {
    result.cases = rank_eval_set(result.set, g, cache, inputs, checkpoint.params, checkpoint.config);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("checkpoint does not fit this dataset: ") + e.what());
  }
  result.metrics = rank_metrics(result.cases);
  for (const Triplet& t : plan.test) result.degrees.push_back(avg_node_degree(g, t));
  return result;
}

nlohmann::json cv_metrics_json(const CvResult& r) {
  nlohmann::json doc;
  doc["folds"] = nlohmann::json::array();
  for (const auto& f : r.folds) {
    nlohmann::json j = to_json(f.metrics);
    j["fold"] = f.fold;
    j["epochs"] = f.epochs;
    j["best_epoch"] = f.best_epoch;
    j["train_positives"] = f.train_positives;
    j["train_negatives"] = f.train_negatives;
    doc["folds"].push_back(std::move(j));
  }
  doc["mean"] = to_json(r.mean);
  doc["best_fold"] = r.best_fold;
  doc["leakage"] = {{"checked", r.audit.checked}, {"leaks", r.audit.leaks}};
  return doc;
}

}  // namespace hcmgnn
