#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hcmgnn/hetgraph/types.hpp"
#include "hcmgnn/model/config.hpp"
#include "hcmgnn/numerics/adam.hpp"
#include "hcmgnn/numerics/tensor.hpp"

namespace hcmgnn {

/// Every learnable tensor of the model. Shapes:
///   projection[t]      F' x F_t   (h = W x)
///   relation[r]        1 x F'     shared by all metapaths and heads
///   attention_node[p]  F' x K     per-head weights on h_v
///   attention_msg[p]   F' x K     per-head weights on the message
///   fusion_query[t]    d_a x 1
///   fusion_weight[t]   d_a x K F'
///   fusion_bias[t]     1 x d_a
///   mlp_w1 3KF' x H, mlp_b1 1 x H, mlp_w2 H x 1, mlp_b2 1 x 1
struct ModelParams {
  std::array<num::Tensor, 3> projection;
  std::array<num::Tensor, 6> relation;
  std::vector<std::string> metapath_names;
  std::vector<num::Tensor> attention_node;
  std::vector<num::Tensor> attention_msg;
  std::array<num::Tensor, 3> fusion_query;
  std::array<num::Tensor, 3> fusion_weight;
  std::array<num::Tensor, 3> fusion_bias;
  num::Tensor mlp_w1, mlp_b1, mlp_w2, mlp_b2;

  // Xavier-uniform weights, zero biases, relation embeddings 1 + U(-0.1, 0.1).
  static ModelParams init(const ModelConfig& config, std::array<std::size_t, 3> input_dims,
                          const std::vector<Metapath>& metapaths, std::uint64_t seed);

  std::array<std::size_t, 3> input_dims() const;
  // Stable names ("projection.G", "relation.G->M", "attention.G-M-D.node",
  // "fusion.G.query", "mlp.w1", ...) in a fixed order.
  std::vector<num::NamedParam> named();
  std::vector<std::pair<std::string, const num::Tensor*>> named() const;
  void zero_grad();
};

std::string relation_name(Relation r);

}  // namespace hcmgnn
