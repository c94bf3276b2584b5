#include "hcmgnn/model/model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hcmgnn {
namespace {

using num::Tape;
using num::Tensor;
using num::Var;

// Variants that share the causal routing (messages to all three positions).
bool shares_full_routing(Variant v) {
  return v == Variant::kFull || v == Variant::kWoAF || v == Variant::kWoBF;
}

bool same_routing(Variant a, Variant b) {
  return a == b || (shares_full_routing(a) && shares_full_routing(b));
}

void deliver(ViewPlan& plan, std::size_t pos) {
  const EntityType t = plan.path.types()[pos];
  Delivery& d = plan.deliveries[index_of(t)];
  const auto& column = plan.columns[pos];
  for (std::size_t i = 0; i < column.size(); ++i) {
    d.message.push_back(static_cast<std::uint32_t>(i));
    d.node.push_back(column[i]);
  }
}

// woMP-i: head nodes attend over their distinct metapath-induced tail
// neighbours; the message is the tail's projected embedding.
ViewPlan neighbour_plan(const InstanceTable& table) {
  ViewPlan plan{table.metapath(), false, {}, {}};
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  pairs.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    pairs.emplace_back(table.node(i, 0), table.node(i, table.length() - 1));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  plan.columns.assign(1, {});
  Delivery& d = plan.deliveries[index_of(table.metapath().head_type())];
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    plan.columns[0].push_back(pairs[i].second);
    d.message.push_back(static_cast<std::uint32_t>(i));
    d.node.push_back(pairs[i].first);
  }
  return plan;
}

Var zeros(Tape& tape, std::size_t rows, std::size_t cols) {
  return tape.constant(Tensor(rows, cols));
}

}  // namespace

GraphCache::GraphCache(const HetGraph& graph, Variant variant, std::size_t limit)
    : variant_(variant),
      counts_{graph.node_count(EntityType::kGene), graph.node_count(EntityType::kMicrobe),
              graph.node_count(EntityType::kDisease)} {
  for (const InstanceTable& table : enumerate_family(graph, family_of(variant), limit)) {
    instance_counts_.push_back(table.size());
    if (variant == Variant::kWoMP1) {
      views_.push_back(neighbour_plan(table));
      continue;
    }
    ViewPlan plan{table.metapath(), true, {}, {}};
    for (std::size_t pos = 0; pos < table.length(); ++pos) {
      plan.columns.push_back(table.position_column(pos));
    }
    if (shares_full_routing(variant)) {
      for (std::size_t pos = 0; pos < table.length(); ++pos) deliver(plan, pos);
    } else {
      deliver(plan, 0);
      deliver(plan, table.length() - 1);
    }
    views_.push_back(std::move(plan));
  }
}

std::vector<Metapath> GraphCache::metapaths() const {
  std::vector<Metapath> out;
  for (const auto& v : views_) out.push_back(v.path);
  return out;
}

ModelInputs ModelInputs::from_graph(const HetGraph& g, Variant variant) {
  ModelInputs in;
  for (EntityType t : kEntityTypes) {
    in.features[index_of(t)] = variant == Variant::kWoBF ? Tensor::identity(g.node_count(t))
                                                         : g.features(t);
  }
  return in;
}

std::array<std::size_t, 3> ModelInputs::dims() const {
  return {features[0].cols(), features[1].cols(), features[2].cols()};
}

Var feature_transform(Var x, Var w) {
  if (x.cols() != w.cols()) {
    throw std::invalid_argument("feature_transform: features " + x.value().shape_string() +
                                " do not match projection " + w.value().shape_string());
  }
  return num::matmul(x, num::transpose(w));
}

Var encode_instances(std::span<const Var> positions, std::span<const Var> relations) {
  if (positions.empty() || relations.size() + 1 != positions.size()) {
    throw std::invalid_argument("encode_instances: need one relation between consecutive positions");
  }
  Var acc = positions[0];
  for (std::size_t i = 0; i < relations.size(); ++i) {
    acc = num::add(num::mul_row(acc, relations[i]), positions[i + 1]);
  }
  return num::scale(acc, 1.0 / static_cast<double>(positions.size()));
}

AttentionOutput instance_attention(Var nodes, Var messages, const Delivery& route, Var a_node,
                                   Var a_msg, double slope) {
  Tape& tape = *nodes.tape;
  const std::size_t n = nodes.rows();
  const std::size_t f = nodes.cols();
  const std::size_t heads = a_node.cols();
  if (messages.cols() != f || a_node.rows() != f || a_msg.rows() != f || a_msg.cols() != heads) {
    throw std::invalid_argument("instance_attention: inconsistent dimensions");
  }
  if (route.size() == 0) {
    return {zeros(tape, n, heads * f), zeros(tape, 0, heads)};
  }
  // gather(H) a == gather(H a): score nodes and messages once, then route.
  Var node_logit = num::gather_rows(num::matmul(nodes, a_node), route.node);
  Var msg_logit = num::gather_rows(num::matmul(messages, a_msg), route.message);
  Var alpha = num::segment_softmax(num::leaky_relu(num::add(node_logit, msg_logit), slope),
                                   route.node, n);
  Var view = num::elu(num::weighted_segment_sum(alpha, messages, route.message, route.node, n));
  return {view, alpha};
}

FusionOutput fuse_subgraphs(std::span<const Var> views, Var query, Var weight, Var bias) {
  if (views.empty()) throw std::invalid_argument("fuse_subgraphs: no views");
  std::vector<Var> scores;
  scores.reserve(views.size());
  Var wt = num::transpose(weight);
  for (Var v : views) {
    Var s = num::mean_rows(num::tanh(num::add_row(num::matmul(v, wt), bias)));
    scores.push_back(num::matmul(s, query));
  }
  Var beta = num::row_softmax(num::concat_cols(scores));
  Var z = num::scale(views[0], num::slice_cols(beta, 0, 1));
  for (std::size_t p = 1; p < views.size(); ++p) {
    z = num::add(z, num::scale(views[p], num::slice_cols(beta, p, p + 1)));
  }
  return {z, beta};
}

FusionOutput average_subgraphs(std::span<const Var> views) {
  if (views.empty()) throw std::invalid_argument("average_subgraphs: no views");
  Tape& tape = *views[0].tape;
  const double w = 1.0 / static_cast<double>(views.size());
  Var z = views[0];
  for (std::size_t p = 1; p < views.size(); ++p) z = num::add(z, views[p]);
  return {num::scale(z, w), tape.constant(Tensor(1, views.size(), w))};
}

Var predict(Var zn, Var zm, Var zd, const MlpVars& mlp) {
  const std::array<Var, 3> parts = {zn, zm, zd};
  Var hidden = num::elu(num::add_row(num::matmul(num::concat_cols(parts), mlp.w1), mlp.b1));
  return num::sigmoid(num::add_row(num::matmul(hidden, mlp.w2), mlp.b2));
}

Var predict_indexed(const std::array<Var, 3>& z,
                    const std::array<std::vector<std::uint32_t>, 3>& index, const MlpVars& mlp) {
  const std::size_t d = z[0].cols();
  if (mlp.w1.rows() != 3 * d) {
    throw std::invalid_argument("predict: MLP input " + mlp.w1.value().shape_string() +
                                " does not fit embeddings of width " + std::to_string(d));
  }
  Var w1t = num::transpose(mlp.w1);
  Var pre;
  for (std::size_t t = 0; t < 3; ++t) {
    Var block = num::transpose(num::slice_cols(w1t, t * d, (t + 1) * d));
    Var part = num::gather_rows(num::matmul(z[t], block), index[t]);
    pre = t == 0 ? part : num::add(pre, part);
  }
  Var hidden = num::elu(num::add_row(pre, mlp.b1));
  return num::sigmoid(num::add_row(num::matmul(hidden, mlp.w2), mlp.b2));
}

ForwardResult forward(Tape& tape, const GraphCache& cache, const ModelInputs& inputs,
                      ModelParams& params, const ModelConfig& config,
                      std::span<const Triplet> samples) {
  if (!same_routing(cache.variant(), config.variant)) {
    throw std::invalid_argument("forward: instance cache built for " +
                                std::string(variant_name(cache.variant())) + " but config is " +
                                std::string(variant_name(config.variant)));
  }
  const auto& plans = cache.views();
  std::vector<std::string> names;
  for (const auto& p : plans) names.push_back(p.path.name());
  if (names != params.metapath_names) {
    throw std::invalid_argument("forward: parameters were built for a different metapath family");
  }
  if (params.input_dims() != inputs.dims()) {
    throw std::invalid_argument("forward: input feature dimensions do not match the parameters");
  }
  if (params.projection[0].rows() != config.projected_dim ||
      params.attention_node.front().cols() != config.heads) {
    throw std::invalid_argument("forward: parameters do not match the model config");
  }
  const auto counts = cache.node_counts();
  for (EntityType t : kEntityTypes) {
    if (inputs.features[index_of(t)].rows() != counts[index_of(t)]) {
      throw std::invalid_argument("forward: input rows do not match the graph");
    }
  }
  for (const Triplet& s : samples) {
    if (s.gene >= counts[0] || s.microbe >= counts[1] || s.disease >= counts[2]) {
      throw std::out_of_range("forward: sample references a node outside the graph");
    }
  }

  std::array<Var, 3> h;
  for (EntityType t : kEntityTypes) {
    const std::size_t i = index_of(t);
    h[i] = feature_transform(tape.constant(inputs.features[i]), tape.param(params.projection[i]));
  }
  std::array<Var, kRelationCount> rel;
  for (Relation r : kRelations) rel[index_of(r)] = tape.param(params.relation[index_of(r)]);

  ForwardResult out;
  for (std::size_t p = 0; p < plans.size(); ++p) {
    const ViewPlan& plan = plans[p];
    const auto& types = plan.path.types();
    Var messages;
    if (plan.encode) {
      std::vector<Var> positions;
      std::vector<Var> relations;
      for (std::size_t pos = 0; pos < types.size(); ++pos) {
        positions.push_back(num::gather_rows(h[index_of(types[pos])], plan.columns[pos]));
      }
      for (Relation r : plan.path.relations()) relations.push_back(rel[index_of(r)]);
      messages = encode_instances(positions, relations);
    } else {
      messages = num::gather_rows(h[index_of(plan.path.tail_type())], plan.columns[0]);
    }
    Var a_node = tape.param(params.attention_node[p]);
    Var a_msg = tape.param(params.attention_msg[p]);
    std::array<Var, 3> views;
    std::array<Var, 3> alphas;
    for (EntityType t : kEntityTypes) {
      const std::size_t i = index_of(t);
      auto att = instance_attention(h[i], messages, plan.deliveries[i], a_node, a_msg,
                                    config.leaky_slope);
      views[i] = att.view;
      alphas[i] = att.alpha;
    }
    out.views.push_back(views);
    out.alpha.push_back(alphas);
  }

  for (EntityType t : kEntityTypes) {
    const std::size_t i = index_of(t);
    std::vector<Var> views;
    for (const auto& v : out.views) views.push_back(v[i]);
    FusionOutput fused =
        config.variant == Variant::kWoAF
            ? average_subgraphs(views)
            : fuse_subgraphs(views, tape.param(params.fusion_query[i]),
                             tape.param(params.fusion_weight[i]), tape.param(params.fusion_bias[i]));
    out.z[i] = fused.z;
    out.beta[i] = fused.beta;
  }

  std::array<std::vector<std::uint32_t>, 3> index;
  for (const Triplet& s : samples) {
    index[0].push_back(s.gene);
    index[1].push_back(s.microbe);
    index[2].push_back(s.disease);
  }
  MlpVars mlp{tape.param(params.mlp_w1), tape.param(params.mlp_b1), tape.param(params.mlp_w2),
              tape.param(params.mlp_b2)};
  out.scores = predict_indexed(out.z, index, mlp);
  return out;
}

std::vector<double> score_triplets(const GraphCache& cache, const ModelInputs& inputs,
                                   ModelParams& params, const ModelConfig& config,
                                   std::span<const Triplet> samples) {
  Tape tape(false);
  const auto result = forward(tape, cache, inputs, params, config, samples);
  const auto data = result.scores.value().data();
  return {data.begin(), data.end()};
}

Tensor triplet_embeddings(const GraphCache& cache, const ModelInputs& inputs, ModelParams& params,
                          const ModelConfig& config, std::span<const Triplet> samples) {
  Tape tape(false);
  const auto result = forward(tape, cache, inputs, params, config, samples);
  std::array<std::vector<std::uint32_t>, 3> index;
  for (const Triplet& s : samples) {
    index[0].push_back(s.gene);
    index[1].push_back(s.microbe);
    index[2].push_back(s.disease);
  }
  const std::array<Var, 3> parts = {num::gather_rows(result.z[0], index[0]),
                                    num::gather_rows(result.z[1], index[1]),
                                    num::gather_rows(result.z[2], index[2])};
  return num::concat_cols(parts).value();
}

}  // namespace hcmgnn
