#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hcmgnn/cli/commands.hpp"
#include "hcmgnn/random.hpp"

using namespace hcmgnn;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("hcmgnn_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json small_doc(const std::string& output) {
  return {{"seed", 5},
          {"synthetic",
           {{"n_genes", 24}, {"n_microbes", 20}, {"n_diseases", 20}, {"latent_dim", 4}, {"density", 0.2}}},
          {"model", {{"projected_dim", 4}, {"heads", 2}, {"fusion_dim", 4}, {"mlp_hidden", 6}}},
          {"train", {{"max_epochs", 3}}},
          {"protocol", {{"test_fraction", 0.1}, {"folds", 5}}},
          {"output", output},
          {"threads", 1}};
}

}  // namespace

TEST_CASE("run config parsing") {
  fs::path base = "/configs";
  RunConfig c = run_config_from_json(small_doc("out"), base);
  CHECK(c.seed == 5);
  REQUIRE(c.synthetic.has_value());
  CHECK(c.synthetic->seed == 5);
  CHECK(c.synthetic->n_genes == 24);
  CHECK(c.model.heads == 2);
  CHECK(c.train.max_epochs == 3);
  CHECK(c.train.patience == 50);
  CHECK(c.folds == 5);
  CHECK(c.output == fs::path("/configs/out"));
  CHECK(run_config_from_json(small_doc("/abs/out"), base).output == fs::path("/abs/out"));

  json d = small_doc("out");
  d["synthetic"]["seed"] = 99;
  CHECK(run_config_from_json(d, base).synthetic->seed == 99);

  d = small_doc("out");
  d["stratify"] = {{"thresholds", {1.0, 2.0}}};
  CHECK(run_config_from_json(d, base).strata_thresholds == std::vector<double>{1.0, 2.0});

  SUBCASE("errors") {
    json bad = small_doc("out");
    bad["typo"] = 1;
    CHECK_THROWS_WITH_AS(run_config_from_json(bad, base), doctest::Contains("typo"), std::invalid_argument);
    bad = small_doc("out");
    bad.erase("synthetic");
    CHECK_THROWS_AS(run_config_from_json(bad, base), std::invalid_argument);
    bad = small_doc("out");
    bad["dataset"] = {{"gene_microbe", "a"}, {"gene_disease", "b"}, {"microbe_disease", "c"}};
    CHECK_THROWS_AS(run_config_from_json(bad, base), std::invalid_argument);
    bad = small_doc("out");
    bad.erase("synthetic");
    bad["dataset"] = {{"gene_microbe", "nope.tsv"}, {"gene_disease", "b"}, {"microbe_disease", "c"}};
    CHECK_THROWS_WITH_AS(run_config_from_json(bad, base), doctest::Contains("nope.tsv"),
                         std::invalid_argument);
    bad = small_doc("out");
    bad["model"]["variant"] = "nope";
    CHECK_THROWS_AS(run_config_from_json(bad, base), std::invalid_argument);
    CHECK_THROWS_AS(run_config_from_json(json::array(), base), std::invalid_argument);
  }

  SUBCASE("config files") {
    fs::path dir = scratch("config");
    std::ofstream(dir / "c.json") << small_doc("run").dump();
    RunConfig f = load_run_config(dir / "c.json");
    CHECK(f.output == dir / "run");
    std::ofstream(dir / "broken.json") << "{ not json";
    CHECK_THROWS_WITH_AS(load_run_config(dir / "broken.json"), doctest::Contains("broken.json"),
                         std::runtime_error);
    CHECK_THROWS_AS(load_run_config(dir / "missing.json"), std::runtime_error);
    fs::remove_all(dir);
  }
}

TEST_CASE("seeds fan out from the top-level seed") {
  RunConfig a = run_config_from_json(small_doc("o"), "/");
  RunConfig b = a;
  b.seed = 6;
  CHECK(split_seed(a) != cv_seed(a));
  CHECK(cv_seed(a) != test_seed(a));
  CHECK(split_seed(a) != split_seed(b));
  CHECK(split_seed(a) == derive_seed(5, "split"));
}

TEST_CASE("thread cap from the environment") {
  RunConfig c = run_config_from_json(small_doc("o"), "/");
  c.threads = 8;
  ::setenv("HCMGNN_THREADS", "2", 1);
  CHECK(effective_threads(c) == 2);
  ::setenv("HCMGNN_THREADS", "junk", 1);
  CHECK(effective_threads(c) == 8);
  ::unsetenv("HCMGNN_THREADS");
  c.threads = 0;
  CHECK(effective_threads(c) == 1);
}

TEST_CASE("synth writes a reproducible dataset with a manifest") {
  fs::path dir = scratch("synth");
  RunConfig c = run_config_from_json(small_doc("a"), dir);
  json m1 = cmd_synth(c);
  for (const char* f : {"gene_microbe.tsv", "gene_disease.tsv", "microbe_disease.tsv", "gene_features.csv",
                        "microbe_features.csv", "disease_features.csv", "manifest.json"}) {
    CHECK(fs::exists(dir / "a" / "data" / f));
  }
  CHECK(m1["files"].size() == 6);
  CHECK(m1["triangle_count"].get<std::size_t>() > 0);

  c.output = dir / "b";
  json m2 = cmd_synth(c);
  CHECK(m1["files"] == m2["files"]);
  CHECK(read_text(dir / "a" / "data" / "manifest.json") == read_text(dir / "b" / "data" / "manifest.json"));

  // The manifest's triangle count is that of the written files.
  json ds = small_doc("c");
  ds.erase("synthetic");
  ds["dataset"] = {{"gene_microbe", "a/data/gene_microbe.tsv"},
                   {"gene_disease", "a/data/gene_disease.tsv"},
                   {"microbe_disease", "a/data/microbe_disease.tsv"},
                   {"gene_features", "a/data/gene_features.csv"}};
  RunConfig from_files = run_config_from_json(ds, dir);
  PreparedData data = prepare_data(from_files);
  CHECK(data.positives.size() == m1["triangle_count"].get<std::size_t>());
  CHECK_FALSE(data.loaded.report.one_hot_fallback[0]);
  CHECK(data.loaded.report.one_hot_fallback[1]);

  RunConfig no_synth = from_files;
  CHECK_THROWS_AS(cmd_synth(no_synth), std::invalid_argument);
  fs::remove_all(dir);
}

TEST_CASE("cv, test and stratify produce reproducible artifacts") {
  fs::path dir = scratch("cv");
  RunConfig c = run_config_from_json(small_doc("r1"), dir);
  json cv = cmd_cv(c);
  REQUIRE(cv["folds"].size() == 5);
  for (const auto& f : cv["folds"]) {
    CHECK(f["train_negatives"] == f["train_positives"]);
    CHECK(f["epochs"] == 3);
  }
  CHECK(cv["mean"].contains("mrr"));
  CHECK(cv["leakage"]["leaks"] == 0);
  CHECK(fs::exists(c.output / "run.json"));
  CHECK(fs::exists(c.output / "split.json"));
  for (int k = 0; k < 5; ++k) {
    CHECK(fs::exists(c.output / "checkpoints" / "full" / ("fold" + std::to_string(k) + ".json")));
  }
  CHECK(fs::exists(best_checkpoint_path(c, Variant::kFull)));

  RunConfig again = c;
  again.output = dir / "r2";
  cmd_cv(again);
  CHECK(read_text(cv_metrics_path(c, Variant::kFull)) == read_text(cv_metrics_path(again, Variant::kFull)));
  CHECK(read_text(best_checkpoint_path(c, Variant::kFull)) ==
        read_text(best_checkpoint_path(again, Variant::kFull)));

  json test = cmd_test(c);
  CHECK(test["variant"] == "full");
  CHECK(test["checkpoint"] == "checkpoints/full/best.json");
  CHECK(test["split_hash"] == cv["split_hash"]);
  REQUIRE(test["cases"].size() > 0);
  for (const auto& cs : test["cases"]) CHECK(cs["candidates"] == 31);
  CHECK(fs::exists(c.output / "exports" / "embeddings_full.tsv"));
  const auto emb = load_embeddings(c.output / "exports" / "embeddings_full.tsv");
  CHECK(emb.ids.size() == 31 * test["cases"].size());
  CHECK(emb.vectors.cols() == 3 * 2 * 4);

  // An explicit checkpoint path is accepted and named as given.
  json explicit_ck = cmd_test(c, c.output / "checkpoints" / "full" / "fold0.json");
  CHECK(explicit_ck["metrics"].is_object());
  CHECK(explicit_ck["checkpoint"].get<std::string>().find("fold0.json") != std::string::npos);

  auto strata = cmd_stratify(c);
  CHECK(strata.size() == 12);
  CHECK(strata.back().count == test["cases"].size());
  CHECK(*strata.back().hit1 == doctest::Approx(test["metrics"]["hit1"].get<double>()));
  CHECK(fs::exists(c.output / "exports" / "strata_full.tsv"));

  // No woTM checkpoint has been trained in this output directory.
  RunConfig tm = c;
  tm.model.variant = Variant::kWoTM;
  CHECK_THROWS(cmd_test(tm));

  // Reusing the stored split reproduces the split hash.
  json ds = small_doc("r3");
  ds["dataset"] = json::object();
  ds.erase("synthetic");
  fs::create_directories(dir / "data");
  DatasetPaths paths = write_dataset(generate_synthetic(*c.synthetic).raw, dir / "data");
  ds["dataset"] = {{"gene_microbe", paths.gene_microbe.string()},
                   {"gene_disease", paths.gene_disease.string()},
                   {"microbe_disease", paths.microbe_disease.string()},
                   {"split", (c.output / "split.json").string()}};
  PreparedData pd = prepare_data(run_config_from_json(ds, dir));
  CHECK(pd.split_hash == cv["split_hash"].get<std::string>());
  fs::remove_all(dir);
}

#ifdef HCMGNN_CLI_PATH
TEST_CASE("command-line entry point") {
  fs::path dir = scratch("binary");
  std::ofstream(dir / "c.json") << small_doc("out").dump();
  const std::string exe = HCMGNN_CLI_PATH;
  const std::string quiet = " > " + (dir / "log.txt").string() + " 2>&1";
  CHECK(std::system((exe + " synth --config " + (dir / "c.json").string() + quiet).c_str()) == 0);
  CHECK(fs::exists(dir / "out" / "data" / "manifest.json"));
  CHECK(std::system((exe + " synth --config " + (dir / "c.json").string() + " --out " +
                     (dir / "alt").string() + quiet).c_str()) == 0);
  CHECK(fs::exists(dir / "alt" / "data" / "manifest.json"));
  CHECK(std::system((exe + " cv --config " + (dir / "c.json").string() + " --variant bogus" + quiet).c_str()) != 0);
  CHECK(std::system((exe + " test --config " + (dir / "missing.json").string() + quiet).c_str()) != 0);
  CHECK(std::system((exe + quiet).c_str()) != 0);
  fs::remove_all(dir);
}
#endif
