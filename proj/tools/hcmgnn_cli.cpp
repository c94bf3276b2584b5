#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hcmgnn/cli/commands.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<std::string> checkpoint;
};

hcmgnn::RunConfig resolve(const Overrides& o) {
  hcmgnn::RunConfig c = hcmgnn::load_run_config(o.config);
  if (o.out) c.output = *o.out;
  if (o.seed) {
    const bool follow = c.synthetic && c.synthetic->seed == c.seed;
    c.seed = *o.seed;
    if (follow) c.synthetic->seed = *o.seed;
  }
  if (o.variant) {
    auto v = hcmgnn::parse_variant(*o.variant);
    if (!v) throw std::invalid_argument("unknown variant '" + *o.variant + "'");
    c.model.variant = *v;
  }
  return c;
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "Output directory (overrides the config)");
  cmd->add_option("--seed", o.seed, "Top-level seed (overrides the config)");
  cmd->add_option("--variant", o.variant,
                  "full, woMP-i, woMP-ii, woMP-iii, woTM, woAF or woBF");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Causal-metapath heterogeneous GNN for gene-microbe-disease triplets"};
  app.require_subcommand(1);
  Overrides o;
  auto* synth = app.add_subcommand("synth", "Generate the planted synthetic dataset");
  auto* cv = app.add_subcommand("cv", "Five-fold cross-validation on the CV set");
  auto* test = app.add_subcommand("test", "Evaluate a checkpoint on the independent test set");
  auto* ablate = app.add_subcommand("ablate", "Cross-validate and test every model variant");
  auto* stratify = app.add_subcommand("stratify", "Degree-stratified Hit@1 on the test set");
  for (auto* cmd : {synth, cv, test, ablate, stratify}) add_common(cmd, o);
  for (auto* cmd : {test, stratify}) {
    cmd->add_option("--checkpoint", o.checkpoint, "Checkpoint (default: best CV fold)");
  }
  CLI11_PARSE(app, argc, argv);

  try {
    const hcmgnn::RunConfig c = resolve(o);
    std::optional<std::filesystem::path> ck;
    if (o.checkpoint) ck = *o.checkpoint;
    if (synth->parsed()) {
      std::cout << hcmgnn::cmd_synth(c).dump(2) << '\n';
    } else if (cv->parsed()) {
      std::cout << hcmgnn::cmd_cv(c)["mean"].dump(2) << '\n';
    } else if (test->parsed()) {
      std::cout << hcmgnn::cmd_test(c, ck)["metrics"].dump(2) << '\n';
    } else if (ablate->parsed()) {
      const auto doc = hcmgnn::cmd_ablate(c);
      for (const auto& row : doc["rows"]) {
        std::cout << row["variant"].get<std::string>() << '\t'
                  << (row.contains("test") ? row["test"]["mrr"].dump() : "error") << '\n';
      }
      int failed = 0;
      for (const auto& row : doc["rows"]) failed += row.contains("error");
      return failed == 0 ? 0 : 1;
    } else if (stratify->parsed()) {
      for (const auto& s : hcmgnn::cmd_stratify(c, ck)) {
        std::cout << s.threshold << '\t' << s.count << '\t'
                  << (s.hit1 ? std::to_string(*s.hit1) : "null") << '\n';
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
