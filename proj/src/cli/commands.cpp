#include "hcmgnn/cli/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hcmgnn/random.hpp"

namespace hcmgnn {
namespace fs = std::filesystem;

namespace {

const std::set<std::string> kTopLevelKeys = {"seed",     "synthetic", "dataset", "model",
                                             "train",    "protocol",  "output",  "threads",
                                             "stratify"};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return hex64(fnv1a64(ss.str()));
}

void log(const std::string& msg) { std::cerr << "[hcmgnn] " << msg << '\n'; }

std::string variant_tag(Variant v) { return std::string(variant_name(v)); }

nlohmann::json synthetic_json(const SyntheticOptions& o) {
  return {{"n_genes", o.n_genes},           {"n_microbes", o.n_microbes},
          {"n_diseases", o.n_diseases},     {"latent_dim", o.latent_dim},
          {"density", o.density},           {"seed", o.seed},
          {"affinity", o.affinity},         {"separation", o.separation},
          {"component_std", o.component_std}, {"feature_noise", o.feature_noise}};
}

RawDataset raw_dataset(const RunConfig& c) {
  if (c.synthetic) return generate_synthetic(*c.synthetic).raw;
  return read_dataset(*c.dataset);
}

nlohmann::json graph_summary(const PreparedData& d) {
  const HetGraph& g = d.loaded.graph;
  nlohmann::json j;
  j["genes"] = g.node_count(EntityType::kGene);
  j["microbes"] = g.node_count(EntityType::kMicrobe);
  j["diseases"] = g.node_count(EntityType::kDisease);
  j["edges"] = g.edges(Relation::kGeneMicrobe).size() + g.edges(Relation::kGeneDisease).size() +
               g.edges(Relation::kMicrobeDisease).size();
  j["positive_triplets"] = d.positives.size();
  j["test_positives"] = d.plan.test.size();
  j["split_hash"] = d.split_hash;
  j["warnings"] = d.loaded.report.warnings;
  return j;
}

struct CvOutcome {
  CvResult result;
  nlohmann::json metrics;
};

CvOutcome run_cv_for(const RunConfig& c, const PreparedData& data, Variant variant) {
  RunConfig rc = c;
  rc.model.variant = variant;
  log("cv " + variant_tag(variant) + ": " + std::to_string(data.plan.fold_count()) + " folds, " +
      std::to_string(data.positives.size()) + " positives");
  CvResult r = run_cv(data.loaded.graph, data.plan, rc.model, rc.train, cv_seed(c),
                      effective_threads(c));
  for (const auto& f : r.folds) {
    save_checkpoint(c.output / "checkpoints" / variant_tag(variant) /
                        ("fold" + std::to_string(f.fold) + ".json"),
                    rc.model, f.report.best_params);
    log("  fold " + std::to_string(f.fold) + ": mrr " + std::to_string(f.metrics.mrr) + " after " +
        std::to_string(f.epochs) + " epochs (best " + std::to_string(f.best_epoch) + ")");
  }
  save_checkpoint(best_checkpoint_path(c, variant), rc.model,
                  r.folds[r.best_fold].report.best_params);
  nlohmann::json doc = cv_metrics_json(r);
  doc["variant"] = variant_tag(variant);
  doc["split_hash"] = data.split_hash;
  write_json(cv_metrics_path(c, variant), doc);
  return {std::move(r), std::move(doc)};
}

nlohmann::json run_test_for(const RunConfig& c, const PreparedData& data, Checkpoint& ck,
                            const std::string& checkpoint_name) {
  const HetGraph& g = data.loaded.graph;
  TestResult r = run_test(g, data.plan, ck, test_seed(c), c.train.negatives_per_positive);
  const Variant v = ck.config.variant;

  EmbeddingTable table;
  std::vector<Triplet> samples;
  for (std::size_t i = 0; i < r.set.size(); ++i) {
    for (std::size_t k = 0; k < r.set.candidates[i].size(); ++k) {
      samples.push_back(r.set.candidates[i][k]);
      table.ids.push_back(g.triplet_id(r.set.candidates[i][k]));
      table.labels.push_back(k == r.set.positive_index[i] ? 1 : 0);
    }
  }
  const GraphCache cache(g, v);
  table.vectors = triplet_embeddings(cache, ModelInputs::from_graph(g, v), ck.params, ck.config, samples);
  export_embeddings(c.output / "exports" / ("embeddings_" + variant_tag(v) + ".tsv"), table);
  const SilhouetteResult sil = silhouette(table.vectors, table.labels);
  for (const auto& w : sil.warnings) log("silhouette: " + w);

  nlohmann::json doc;
  doc["variant"] = variant_tag(v);
  doc["checkpoint"] = checkpoint_name;
  doc["split_hash"] = data.split_hash;
  doc["metrics"] = to_json(r.metrics);
  doc["silhouette"] = sil.score;
  doc["cases"] = nlohmann::json::array();
  for (std::size_t i = 0; i < r.cases.size(); ++i) {
    doc["cases"].push_back({{"id", r.cases[i].positive_id},
                            {"rank", r.cases[i].rank},
                            {"candidates", r.cases[i].scores.size()},
                            {"avg_degree", r.degrees[i]}});
  }
  write_json(c.output / "metrics" / ("test_" + variant_tag(v) + ".json"), doc);
  log("test " + variant_tag(v) + ": mrr " + std::to_string(r.metrics.mrr) + ", hit@1 " +
      std::to_string(r.metrics.hit1));
  return doc;
}

Checkpoint open_checkpoint(const RunConfig& c, const std::optional<fs::path>& checkpoint,
                           std::string& name) {
  const fs::path path = checkpoint ? *checkpoint : best_checkpoint_path(c, c.model.variant);
  name = checkpoint ? path.string() : fs::relative(path, c.output).generic_string();
  return load_checkpoint(path);
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw std::invalid_argument("run config must be a JSON object");
  for (const auto& [key, _] : doc.items()) {
    if (!kTopLevelKeys.contains(key)) throw std::invalid_argument("run config: unknown key '" + key + "'");
  }
  if (doc.contains("synthetic") == doc.contains("dataset")) {
    throw std::invalid_argument("run config: exactly one of 'synthetic' and 'dataset' is required");
  }
  RunConfig c;
  c.seed = doc.value("seed", c.seed);
  if (doc.contains("synthetic")) {
    const auto& s = doc.at("synthetic");
    SyntheticOptions o;
    o.n_genes = s.value("n_genes", o.n_genes);
    o.n_microbes = s.value("n_microbes", o.n_microbes);
    o.n_diseases = s.value("n_diseases", o.n_diseases);
    o.latent_dim = s.value("latent_dim", o.latent_dim);
    o.density = s.value("density", o.density);
    o.seed = s.value("seed", c.seed);
    o.affinity = s.value("affinity", o.affinity);
    o.separation = s.value("separation", o.separation);
    o.component_std = s.value("component_std", o.component_std);
    o.feature_noise = s.value("feature_noise", o.feature_noise);
    c.synthetic = o;
  } else {
    const auto& d = doc.at("dataset");
    DatasetPaths p;
    p.gene_microbe = resolve(base_dir, d.at("gene_microbe").get<std::string>());
    p.gene_disease = resolve(base_dir, d.at("gene_disease").get<std::string>());
    p.microbe_disease = resolve(base_dir, d.at("microbe_disease").get<std::string>());
    for (EntityType t : kEntityTypes) {
      const std::string key = std::string(type_name(t)) + "_features";
      if (d.contains(key)) p.features[index_of(t)] = resolve(base_dir, d.at(key).get<std::string>());
    }
    for (const fs::path& f : {p.gene_microbe, p.gene_disease, p.microbe_disease}) {
      if (!fs::exists(f)) throw std::invalid_argument("run config: missing dataset file " + f.string());
    }
    if (d.contains("split")) c.split_file = resolve(base_dir, d.at("split").get<std::string>());
    c.dataset = p;
  }
  if (doc.contains("model")) c.model = model_config_from_json(doc.at("model"));
  if (doc.contains("train")) c.train = train_config_from_json(doc.at("train"));
  if (doc.contains("protocol")) {
    c.test_fraction = doc.at("protocol").value("test_fraction", c.test_fraction);
    c.folds = doc.at("protocol").value("folds", c.folds);
  }
  if (doc.contains("stratify") && doc.at("stratify").contains("thresholds")) {
    c.strata_thresholds = doc.at("stratify").at("thresholds").get<std::vector<double>>();
  }
  c.output = resolve(base_dir, doc.value("output", std::string("run")));
  c.threads = doc.value("threads", static_cast<std::size_t>(
                                       std::max(1u, std::thread::hardware_concurrency())));
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed config " + path.string() + ": " + e.what());
  }
  return run_config_from_json(doc, path.parent_path());
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  if (c.synthetic) j["synthetic"] = synthetic_json(*c.synthetic);
  if (c.dataset) {
    nlohmann::json d = {{"gene_microbe", c.dataset->gene_microbe.generic_string()},
                        {"gene_disease", c.dataset->gene_disease.generic_string()},
                        {"microbe_disease", c.dataset->microbe_disease.generic_string()}};
    for (EntityType t : kEntityTypes) {
      if (const auto& f = c.dataset->features[index_of(t)]) {
        d[std::string(type_name(t)) + "_features"] = f->generic_string();
      }
    }
    if (c.split_file) d["split"] = c.split_file->generic_string();
    j["dataset"] = d;
  }
  j["model"] = to_json(c.model);
  j["train"] = to_json(c.train);
  j["protocol"] = {{"test_fraction", c.test_fraction}, {"folds", c.folds}};
  if (c.strata_thresholds) j["stratify"] = {{"thresholds", *c.strata_thresholds}};
  return j;
}

std::size_t effective_threads(const RunConfig& c) {
  std::size_t n = std::max<std::size_t>(c.threads, 1);
  if (const char* env = std::getenv("HCMGNN_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min(n, static_cast<std::size_t>(cap));
    } catch (const std::exception&) {
      log("ignoring invalid HCMGNN_THREADS value '" + std::string(env) + "'");
    }
  }
  return n;
}

std::uint64_t split_seed(const RunConfig& c) { return derive_seed(c.seed, "split"); }
std::uint64_t cv_seed(const RunConfig& c) { return derive_seed(c.seed, "cv"); }
std::uint64_t test_seed(const RunConfig& c) { return derive_seed(c.seed, "test"); }

fs::path best_checkpoint_path(const RunConfig& c, Variant v) {
  return c.output / "checkpoints" / variant_tag(v) / "best.json";
}

fs::path cv_metrics_path(const RunConfig& c, Variant v) {
  return c.output / "metrics" / ("cv_" + variant_tag(v) + ".json");
}

PreparedData prepare_data(const RunConfig& c) {
  PreparedData d{build_graph(raw_dataset(c)), {}, {}, {}};
  for (const auto& w : d.loaded.report.warnings) log(w);
  d.positives = derive_positive_triplets(d.loaded.graph);
  if (c.split_file) {
    std::ifstream in(*c.split_file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open split file " + c.split_file->string());
    d.plan = split_from_json(nlohmann::json::parse(in), d.loaded.graph);
  } else {
    d.plan = make_split(triplets_of(d.positives), c.test_fraction, c.folds, split_seed(c));
  }
  d.split_hash = split_hash(d.plan, d.loaded.graph);
  return d;
}

nlohmann::json cmd_synth(const RunConfig& c) {
  if (!c.synthetic) throw std::invalid_argument("synth: the config has no 'synthetic' block");
  const SyntheticDataset ds = generate_synthetic(*c.synthetic);
  const fs::path dir = c.output / "data";
  fs::create_directories(dir);
  const DatasetPaths paths = write_dataset(ds.raw, dir);
  const LoadedGraph reloaded = load_edges(paths);
  nlohmann::json manifest;
  manifest["options"] = synthetic_json(*c.synthetic);
  manifest["realized_density"] = ds.realized_density;
  manifest["bias"] = ds.bias;
  manifest["edge_count"] = ds.edge_count;
  manifest["triangle_count"] = derive_positive_triplets(reloaded.graph).size();
  manifest["nodes"] = {{"genes", reloaded.graph.node_count(EntityType::kGene)},
                       {"microbes", reloaded.graph.node_count(EntityType::kMicrobe)},
                       {"diseases", reloaded.graph.node_count(EntityType::kDisease)}};
  nlohmann::json files = nlohmann::json::object();
  std::vector<fs::path> all = {paths.gene_microbe, paths.gene_disease, paths.microbe_disease};
  for (const auto& f : paths.features) {
    if (f) all.push_back(*f);
  }
  for (const auto& f : all) files[f.filename().string()] = file_hash(f);
  manifest["files"] = files;
  write_json(dir / "manifest.json", manifest);
  log("synth: " + std::to_string(ds.edge_count) + " edges, " +
      std::to_string(manifest["triangle_count"].get<std::size_t>()) + " triangles, density " +
      std::to_string(ds.realized_density));
  return manifest;
}

nlohmann::json cmd_cv(const RunConfig& c) {
  const PreparedData data = prepare_data(c);
  nlohmann::json run = to_json(c);
  run["data"] = graph_summary(data);
  write_json(c.output / "run.json", run);
  write_json(c.output / "split.json", split_to_json(data.plan, data.loaded.graph));
  return run_cv_for(c, data, c.model.variant).metrics;
}

nlohmann::json cmd_test(const RunConfig& c, std::optional<fs::path> checkpoint) {
  const PreparedData data = prepare_data(c);
  std::string name;
  Checkpoint ck = open_checkpoint(c, checkpoint, name);
  return run_test_for(c, data, ck, name);
}

nlohmann::json cmd_ablate(const RunConfig& c) {
  const PreparedData data = prepare_data(c);
  nlohmann::json run = to_json(c);
  run["data"] = graph_summary(data);
  write_json(c.output / "run.json", run);
  nlohmann::json rows = nlohmann::json::array();
  std::ostringstream tsv;
  tsv << "variant\tsplit_hash\tcv_mrr\ttest_hit1\ttest_hit3\ttest_hit5\ttest_ndcg3\ttest_ndcg5\ttest_mrr\n";
  for (Variant v : kVariants) {
    nlohmann::json row = {{"variant", variant_tag(v)}, {"split_hash", data.split_hash}};
    try {
      CvOutcome cv = run_cv_for(c, data, v);
      Checkpoint ck = load_checkpoint(best_checkpoint_path(c, v));
      const auto test = run_test_for(c, data, ck, fs::relative(best_checkpoint_path(c, v), c.output).generic_string());
      row["cv"] = cv.metrics["mean"];
      row["test"] = test["metrics"];
      const auto& m = test["metrics"];
      tsv << variant_tag(v) << '\t' << data.split_hash << '\t' << cv.metrics["mean"]["mrr"].dump()
          << '\t' << m["hit1"].dump() << '\t' << m["hit3"].dump() << '\t' << m["hit5"].dump()
          << '\t' << m["ndcg3"].dump() << '\t' << m["ndcg5"].dump() << '\t' << m["mrr"].dump()
          << '\n';
    } catch (const std::exception& e) {
      log("ablate " + variant_tag(v) + " failed: " + e.what());
      row["error"] = e.what();
      tsv << variant_tag(v) << '\t' << data.split_hash << "\terror\t\t\t\t\t\t\n";
    }
    rows.push_back(std::move(row));
  }
  nlohmann::json doc = {{"split_hash", data.split_hash}, {"rows", rows}};
  write_json(c.output / "metrics" / "ablation.json", doc);
  std::ofstream out(c.output / "metrics" / "ablation.tsv", std::ios::binary);
  out << tsv.str();
  if (!out) throw std::runtime_error("write failed for ablation.tsv");
  return doc;
}

std::vector<StratumReport> cmd_stratify(const RunConfig& c, std::optional<fs::path> checkpoint) {
  const PreparedData data = prepare_data(c);
  std::string name;
  Checkpoint ck = open_checkpoint(c, checkpoint, name);
  const TestResult r = run_test(data.loaded.graph, data.plan, ck, test_seed(c),
                                c.train.negatives_per_positive);
  std::vector<std::size_t> ranks;
  for (const auto& cs : r.cases) ranks.push_back(cs.rank);
  const std::vector<double> thresholds =
      c.strata_thresholds ? *c.strata_thresholds : default_thresholds(r.degrees);
  auto strata = stratify_by_degree(r.degrees, ranks, thresholds);
  const fs::path out = c.output / "exports" / ("strata_" + variant_tag(ck.config.variant) + ".tsv");
  fs::create_directories(out.parent_path());
  write_strata_tsv(out, strata);
  log("stratify: " + std::to_string(strata.size()) + " strata written to " + out.string());
  return strata;
}

}  // namespace hcmgnn
