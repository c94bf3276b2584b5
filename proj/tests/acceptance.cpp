// Acceptance suite: one PASS/FAIL/SKIP line per criterion.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "hcmgnn/cli/commands.hpp"
#include "hcmgnn/numerics/grad_check.hpp"
#include "hcmgnn/random.hpp"
#include "support.hpp"

using namespace hcmgnn;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  enum Status { kPass, kFail, kSkip } status = kFail;
  std::string detail;
};

Outcome pass_if(bool ok, std::string detail) {
  return {ok ? Outcome::kPass : Outcome::kFail, std::move(detail)};
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream ss;
  ss.precision(precision);
  ss << v;
  return ss.str();
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path work_dir() {
  fs::path dir = fs::temp_directory_path() / "hcmgnn_acceptance";
  return dir;
}

// 1 ------------------------------------------------------------------------
Outcome gradient_oracle() {
  const auto t0 = Clock::now();
  // Two nodes per type; g0-m0-d0 and g1-m1-d1 are triangles, plus cross edges.
  HetGraph g = testing::graph_from_pairs({{"g0", "m0"}, {"g1", "m1"}, {"g0", "m1"}},
                                         {{"g0", "d0"}, {"g1", "d1"}, {"g1", "d0"}},
                                         {{"m0", "d0"}, {"m1", "d1"}, {"m1", "d0"}});
  std::vector<Triplet> samples = {{0, 0, 0}, {1, 1, 1}, {0, 1, 1}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  const std::vector<double> labels = {1, 1, 0, 0, 1, 0};
  double worst = 0;
  std::size_t coords = 0, failures = 0;
  std::map<std::string, double> per_group;
  std::size_t kinks = 0;
  // Toy widths; every coordinate of every group, for each variant.
  for (Variant v : kVariants) {
    ModelConfig c;
    c.projected_dim = 6;
    c.heads = 2;
    c.fusion_dim = 8;
    c.mlp_hidden = 8;
    c.variant = v;
    GraphCache cache(g, v);
    ModelInputs inputs = ModelInputs::from_graph(g, v);
    ModelParams p = ModelParams::init(c, inputs.dims(), cache.metapaths(), 3);
    auto report = num::grad_check(
        [&](num::Tape& tape) {
          auto out = forward(tape, cache, inputs, p, c, samples);
          return balanced_loss(out.scores, labels, 0.7);
        },
        p.named());
    worst = std::max(worst, report.max_rel_error);
    coords += report.checked;
    kinks += report.kinks;
    failures += report.passed() ? 0 : 1;
    for (const auto& cc : report.coords) {
      if (cc.status != num::CoordStatus::kOk) continue;
      const std::string group = cc.param.substr(0, cc.param.find('.'));
      per_group[group] = std::max(per_group[group], cc.rel_error);
    }
  }
  const double secs = seconds_since(t0);
  std::string groups;
  for (const auto& [k, e] : per_group) groups += " " + k + "=" + fmt(e, 2);
  return pass_if(failures == 0 && worst <= 1e-4 && per_group.size() == 5 && secs < 60,
                 "7 variants, " + std::to_string(coords) + " coordinates (" + std::to_string(kinks) + " kinks skipped), max rel err " + fmt(worst, 3) +
                     " (" + groups.substr(1) + "), " + fmt(secs, 3) + " s");
}

// 2 ------------------------------------------------------------------------
Outcome enumeration_oracle() {
  const auto t0 = Clock::now();
  std::size_t mismatches = 0, instances = 0;
  for (std::uint32_t seed = 0; seed < 20; ++seed) {
    std::mt19937 rng(seed);
    const std::size_t ng = 10 + rng() % 41, nm = 10 + rng() % 41, nd = 10 + rng() % 41;
    HetGraph g = testing::random_graph(1000 + seed, ng, nm, nd, 0.05 + 0.01 * (seed % 10));
    std::vector<std::vector<std::array<std::uint32_t, 3>>> rows;
    for (const Metapath& p : causal_metapaths()) {
      auto got = testing::rows_of(enumerate_instances(extract_subgraph(g, p)));
      mismatches += got != testing::brute_force_instances(g, p);
      instances += got.size();
      rows.push_back(std::move(got));
    }
    for (auto [a, b] : {std::pair{0, 2}, {1, 4}, {3, 5}}) {
      auto rev = rows[a];
      for (auto& r : rev) std::swap(r[0], r[2]);
      std::sort(rev.begin(), rev.end());
      mismatches += rev != rows[b];
    }
  }
  const double secs = seconds_since(t0);
  return pass_if(mismatches == 0 && secs < 30,
                 "20 graphs, " + std::to_string(instances) + " instances, " + std::to_string(mismatches) +
                     " mismatches, " + fmt(secs, 3) + " s");
}

// 3 ------------------------------------------------------------------------
Outcome normalization_suite() {
  double worst = 0;
  std::size_t rows = 0;
  for (std::uint32_t seed = 0; seed < 100; ++seed) {
    HetGraph g = testing::random_graph(seed, 8, 7, 6, 0.35);
    for (Variant v : kVariants) {
      ModelConfig c;
      c.projected_dim = 6;
      c.heads = 3;
      c.fusion_dim = 8;
      c.mlp_hidden = 8;
      c.variant = v;
      GraphCache cache(g, v);
      ModelInputs inputs = ModelInputs::from_graph(g, v);
      ModelParams p = ModelParams::init(c, inputs.dims(), cache.metapaths(), seed);
      num::Tape tape(false);
      std::vector<Triplet> one = {{0, 0, 0}};
      auto out = forward(tape, cache, inputs, p, c, one);
      for (std::size_t view = 0; view < cache.views().size(); ++view) {
        for (EntityType t : kEntityTypes) {
          const Delivery& d = cache.views()[view].deliveries[index_of(t)];
          const num::Tensor& alpha = out.alpha[view][index_of(t)].value();
          std::map<std::uint32_t, std::vector<double>> sums;
          for (std::size_t i = 0; i < d.size(); ++i) {
            auto& s = sums[d.node[i]];
            s.resize(alpha.cols());
            for (std::size_t k = 0; k < alpha.cols(); ++k) s[k] += alpha(i, k);
          }
          for (const auto& [node, s] : sums) {
            for (double x : s) {
              worst = std::max(worst, std::abs(x - 1.0));
              ++rows;
            }
          }
        }
      }
      for (EntityType t : kEntityTypes) {
        double s = 0;
        for (double b : out.beta[index_of(t)].value().data()) s += b;
        worst = std::max(worst, std::abs(s - 1.0));
        ++rows;
      }
    }
  }
  return pass_if(worst <= 1e-9, "100 seeds x 7 variants, " + std::to_string(rows) + " sums, max |sum - 1| " +
                                    fmt(worst, 3));
}

// 4 ------------------------------------------------------------------------
Outcome metric_identities() {
  Rng rng(2024);
  bool identical = true;
  for (int set = 0; set < 1000; ++set) {
    std::vector<std::size_t> ranks(1 + rng.uniform_index(50));
    for (auto& r : ranks) r = 1 + rng.uniform_index(31);
    const RankMetrics m = rank_metrics(ranks);
    identical = identical && m.ndcg1 == m.hit1;
  }
  const int trials = 20000;
  std::vector<std::size_t> ranks;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> s(31);
    for (double& v : s) v = rng.uniform01();
    ranks.push_back(resolve_rank(s, rng.uniform_index(31)));
  }
  const RankMetrics m = rank_metrics(ranks);
  const bool ok = identical && std::abs(m.hit1 - 0.0323) <= 0.01 && std::abs(m.mrr - 0.1299) <= 0.01;
  return pass_if(ok, std::string("NDCG@1 == Hit@1 on 1000 sets: ") + (identical ? "yes" : "no") +
                         "; random scorer over " + std::to_string(trials) + " trials: Hit@1 " + fmt(m.hit1) +
                         ", MRR " + fmt(m.mrr));
}

// 5-7 share the synthetic pipeline runs.
struct PipelineRun {
  nlohmann::json cv;
  nlohmann::json test;
  double seconds = 0;
};

PipelineRun run_pipeline(const RunConfig& base, Variant v, const fs::path& out) {
  RunConfig c = base;
  c.model.variant = v;
  c.output = out;
  const auto t0 = Clock::now();
  PipelineRun r;
  r.cv = cmd_cv(c);
  r.test = cmd_test(c);
  r.seconds = seconds_since(t0);
  return r;
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {Outcome::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = o.status == Outcome::kPass ? "PASS" : o.status == Outcome::kSkip ? "SKIP" : "FAIL";
    failed += o.status == Outcome::kFail;
    std::cout << tag << " " << id << " " << name << ": " << o.detail << std::endl;
  };

  report(1, "gradient oracle", gradient_oracle);
  report(2, "enumeration oracle", enumeration_oracle);
  report(3, "normalization", normalization_suite);
  report(4, "metric identities", metric_identities);

  const fs::path dir = work_dir();
  fs::remove_all(dir);
  RunConfig synthetic;
  PipelineRun full, wotm;
  std::string setup_error;
  try {
    synthetic = load_run_config(fs::path(HCMGNN_SOURCE_DIR) / "configs" / "synthetic.json");
    full = run_pipeline(synthetic, Variant::kFull, dir / "run_a");
    wotm = run_pipeline(synthetic, Variant::kWoTM, dir / "run_a");
  } catch (const std::exception& e) {
    setup_error = e.what();
  }

  report(5, "learnability", [&]() -> Outcome {
    if (!setup_error.empty()) throw std::runtime_error(setup_error);
    const double mrr = full.test["metrics"]["mrr"].get<double>();
    const double base = wotm.test["metrics"]["mrr"].get<double>();
    const double hit1 = full.test["metrics"]["hit1"].get<double>();
    return pass_if(mrr >= 0.39 && mrr > base && full.seconds < 600,
                   "test MRR full " + fmt(mrr) + " (Hit@1 " + fmt(hit1) + ") vs woTM " + fmt(base) +
                       "; CV mean MRR full " + fmt(full.cv["mean"]["mrr"].get<double>()) + ", woTM " +
                       fmt(wotm.cv["mean"]["mrr"].get<double>()) + "; full pipeline " + fmt(full.seconds, 3) +
                       " s");
  });

  report(6, "protocol fidelity", [&]() -> Outcome {
    if (!setup_error.empty()) throw std::runtime_error(setup_error);
    RunConfig c = synthetic;
    const PreparedData data = prepare_data(c);
    const TripletSet known(triplets_of(data.positives));
    bool ok = full.cv["folds"].size() == 5 && data.plan.fold_count() == 5;
    std::size_t validation_cases = 0, bad_candidates = 0;
    std::vector<std::vector<LabeledTriplet>> train_sets;
    for (std::size_t k = 0; k < data.plan.fold_count(); ++k) {
      const auto& f = full.cv["folds"][k];
      ok = ok && f["train_negatives"] == f["train_positives"] &&
           f["train_positives"].get<std::size_t>() == data.plan.train_positives(k).size();
      FoldData fd = make_fold(data.loaded.graph, data.plan, k, known, 30, cv_seed(c));
      for (const auto& cands : fd.validation.candidates) {
        ++validation_cases;
        bad_candidates += cands.size() != 31;
      }
      train_sets.push_back(fd.train);
    }
    std::size_t test_cases = 0;
    for (const auto& cs : full.test["cases"]) {
      ++test_cases;
      bad_candidates += cs["candidates"].get<std::size_t>() != 31;
    }
    const LeakageAudit audit = audit_leakage(data.loaded.graph, data.plan, train_sets);
    ok = ok && bad_candidates == 0 && audit.clean() && full.cv["leakage"]["leaks"] == 0 &&
         test_cases == data.plan.test.size();
    return pass_if(ok, "5 folds, negatives == positives in every fold, " + std::to_string(validation_cases) +
                           " validation + " + std::to_string(test_cases) + " test cases with 31 candidates (" +
                           std::to_string(bad_candidates) + " wrong), leakage " + std::to_string(audit.leaks) +
                           " of " + std::to_string(audit.checked));
  });

  report(7, "determinism", [&]() -> Outcome {
    if (!setup_error.empty()) throw std::runtime_error(setup_error);
    RunConfig c = synthetic;
    c.output = dir / "run_b";
    cmd_cv(c);
    RunConfig a = synthetic;
    a.output = dir / "run_a";
    const std::string first = read_text(cv_metrics_path(a, Variant::kFull));
    const std::string second = read_text(cv_metrics_path(c, Variant::kFull));
    return pass_if(!first.empty() && first == second,
                   "cv_full.json " + std::to_string(first.size()) + " bytes, " +
                       (first == second ? "identical" : "different") + " across two runs");
  });

  report(8, "published dataset counts", [&]() -> Outcome {
    const char* cfg = std::getenv("HCMGNN_DATASET_CONFIG");
    if (cfg == nullptr || *cfg == '\0') {
      return {Outcome::kSkip, "set HCMGNN_DATASET_CONFIG to a run config with a 'dataset' block"};
    }
    RunConfig c = load_run_config(cfg);
    if (!c.dataset) throw std::runtime_error("config has no dataset block");
    LoadedGraph lg = load_edges(*c.dataset);
    const std::size_t ng = lg.graph.node_count(EntityType::kGene);
    const std::size_t nm = lg.graph.node_count(EntityType::kMicrobe);
    const std::size_t nd = lg.graph.node_count(EntityType::kDisease);
    const std::size_t nt = derive_positive_triplets(lg.graph).size();
    return pass_if(ng == 301 && nm == 176 && nd == 153 && nt == 3431,
                   std::to_string(ng) + " genes, " + std::to_string(nm) + " microbes, " + std::to_string(nd) +
                       " diseases, " + std::to_string(nt) + " positive triplets");
  });

  fs::remove_all(dir);
  return failed == 0 ? 0 : 1;
}
