#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "hcmgnn/hetgraph/hetgraph.hpp"
#include "hcmgnn/metapath/metapath.hpp"
#include "hcmgnn/model/config.hpp"
#include "hcmgnn/model/params.hpp"
#include "hcmgnn/numerics/ops.hpp"

namespace hcmgnn {

/// Message routing for one node type in one view: message row message[i] is
/// delivered to node node[i]. The segment of node v is S_p(v).
struct Delivery {
  std::vector<std::uint32_t> message;
  std::vector<std::uint32_t> node;
  std::size_t size() const { return node.size(); }
};

/// Everything one view (metapath) needs at forward time. When `encode` is
/// set, messages are instance encodings over `columns` (one node column per
/// metapath position); otherwise `columns` holds a single column of tail
/// nodes whose projected embeddings are the messages.
struct ViewPlan {
  Metapath path;
  bool encode = true;
  std::vector<std::vector<std::uint32_t>> columns;
  std::array<Delivery, 3> deliveries;
  std::size_t message_count() const { return columns.empty() ? 0 : columns.front().size(); }
};

/// Instance tables and routing for one (graph, variant), built once and
/// reused across epochs.
class GraphCache {
 public:
  GraphCache(const HetGraph& graph, Variant variant,
             std::size_t limit = kMaxInstancesPerSubgraph);

  Variant variant() const { return variant_; }
  MetapathKind family() const { return family_of(variant_); }
  const std::vector<ViewPlan>& views() const { return views_; }
  std::vector<Metapath> metapaths() const;
  std::array<std::size_t, 3> node_counts() const { return counts_; }
  std::size_t instance_count(std::size_t view) const { return instance_counts_[view]; }

 private:
  Variant variant_;
  std::array<std::size_t, 3> counts_;
  std::vector<ViewPlan> views_;
  std::vector<std::size_t> instance_counts_;
};

/// Per-type input matrices: the graph's features, or one-hot identities for
/// the woBF variant.
struct ModelInputs {
  std::array<num::Tensor, 3> features;

  static ModelInputs from_graph(const HetGraph& g, Variant variant);
  std::array<std::size_t, 3> dims() const;
};

// h = W x for every row of X (X is n x F, W is F' x F).
num::Var feature_transform(num::Var x, num::Var w);

// Left fold ((h_1 (.) r_1 + h_2) (.) r_2 + ... + h_L) / L over per-position
// embedding rows. positions.size() == relations.size() + 1.
num::Var encode_instances(std::span<const num::Var> positions, std::span<const num::Var> relations);

struct AttentionOutput {
  num::Var view;   // n x K F' (zero rows for nodes without messages)
  num::Var alpha;  // |deliveries| x K, softmax within each node's segment
};

// Per head k: logit = LeakyReLU(h_v . a_node[:,k] + m . a_msg[:,k]),
// alpha = softmax over S_p(v), output ELU(sum alpha m); heads concatenated.
AttentionOutput instance_attention(num::Var nodes, num::Var messages, const Delivery& route,
                                   num::Var a_node, num::Var a_msg, double slope);

struct FusionOutput {
  num::Var z;     // n x K F'
  num::Var beta;  // 1 x P
};

// e_p = mean_v q^T tanh(W' h_v^p + b); beta = softmax_p(e); z = sum_p beta_p h^p.
FusionOutput fuse_subgraphs(std::span<const num::Var> views, num::Var query, num::Var weight,
                            num::Var bias);
// Unweighted mean over views (woAF).
FusionOutput average_subgraphs(std::span<const num::Var> views);

struct MlpVars {
  num::Var w1, b1, w2, b2;
};
// sigmoid(linear(ELU(linear([z_n || z_m || z_d])))), one row per sample.
num::Var predict(num::Var zn, num::Var zm, num::Var zd, const MlpVars& mlp);
// Same scores for samples given by node index: the first layer is applied
// per node (W1 split into gene/microbe/disease row blocks) and gathered.
num::Var predict_indexed(const std::array<num::Var, 3>& z,
                         const std::array<std::vector<std::uint32_t>, 3>& index, const MlpVars& mlp);

struct ForwardResult {
  std::array<num::Var, 3> z;
  std::vector<std::array<num::Var, 3>> views;  // [view][type]
  std::vector<std::array<num::Var, 3>> alpha;  // [view][type]
  std::array<num::Var, 3> beta;
  num::Var scores;  // samples x 1
};

// Records the variant pipeline on `tape` and scores `samples`. Rejects
// samples referencing unknown nodes and params/cache/config mismatches.
ForwardResult forward(num::Tape& tape, const GraphCache& cache, const ModelInputs& inputs,
                      ModelParams& params, const ModelConfig& config,
                      std::span<const Triplet> samples);

// Gradient-free scoring.
std::vector<double> score_triplets(const GraphCache& cache, const ModelInputs& inputs,
                                   ModelParams& params, const ModelConfig& config,
                                   std::span<const Triplet> samples);

// Concatenated triplet embeddings [z_n || z_m || z_d], one row per sample.
num::Tensor triplet_embeddings(const GraphCache& cache, const ModelInputs& inputs,
                               ModelParams& params, const ModelConfig& config,
                               std::span<const Triplet> samples);

}  // namespace hcmgnn
