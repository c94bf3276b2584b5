#include "hcmgnn/model/params.hpp"

#include <cmath>

#include "hcmgnn/random.hpp"

namespace hcmgnn {
namespace {

num::Tensor xavier(std::size_t rows, std::size_t cols, std::size_t fan_in, std::size_t fan_out,
                   Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  num::Tensor t(rows, cols);
  for (double& v : t.data()) v = rng.uniform(-limit, limit);
  t.set_requires_grad(true);
  return t;
}

num::Tensor zeros(std::size_t rows, std::size_t cols) {
  num::Tensor t(rows, cols);
  t.set_requires_grad(true);
  return t;
}

template <typename Self, typename Out>
void collect(Self& p, Out&& emit) {
  for (EntityType t : kEntityTypes) {
    emit("projection." + std::string(type_letter(t)), p.projection[index_of(t)]);
  }
  for (Relation r : kRelations) {
    emit("relation." + relation_name(r), p.relation[static_cast<std::size_t>(r)]);
  }
  for (std::size_t i = 0; i < p.metapath_names.size(); ++i) {
    emit("attention." + p.metapath_names[i] + ".node", p.attention_node[i]);
    emit("attention." + p.metapath_names[i] + ".msg", p.attention_msg[i]);
  }
  for (EntityType t : kEntityTypes) {
    const std::string l(type_letter(t));
    emit("fusion." + l + ".query", p.fusion_query[index_of(t)]);
    emit("fusion." + l + ".weight", p.fusion_weight[index_of(t)]);
    emit("fusion." + l + ".bias", p.fusion_bias[index_of(t)]);
  }
  emit("mlp.w1", p.mlp_w1);
  emit("mlp.b1", p.mlp_b1);
  emit("mlp.w2", p.mlp_w2);
  emit("mlp.b2", p.mlp_b2);
}

}  // namespace

std::string relation_name(Relation r) {
  return std::string(type_letter(source_type(r))) + "->" + std::string(type_letter(target_type(r)));
}

ModelParams ModelParams::init(const ModelConfig& c, std::array<std::size_t, 3> input_dims,
                              const std::vector<Metapath>& metapaths, std::uint64_t seed) {
  c.validate();
  Rng rng(derive_seed(seed, "model/init"));
  const std::size_t f = c.projected_dim;
  const std::size_t kf = c.embedding_dim();
  ModelParams p;
  for (EntityType t : kEntityTypes) {
    const std::size_t in = input_dims[index_of(t)];
    p.projection[index_of(t)] = xavier(f, in, in, f, rng);
  }
  for (Relation r : kRelations) {
    num::Tensor e(1, f);
    for (double& v : e.data()) v = 1.0 + rng.uniform(-0.1, 0.1);
    e.set_requires_grad(true);
    p.relation[static_cast<std::size_t>(r)] = std::move(e);
  }
  for (const Metapath& m : metapaths) {
    p.metapath_names.push_back(m.name());
    // Fan-in of the attention logit is the concatenation [h_v || m].
    p.attention_node.push_back(xavier(f, c.heads, 2 * f, 1, rng));
    p.attention_msg.push_back(xavier(f, c.heads, 2 * f, 1, rng));
  }
  for (EntityType t : kEntityTypes) {
    const std::size_t i = index_of(t);
    p.fusion_query[i] = xavier(c.fusion_dim, 1, c.fusion_dim, 1, rng);
    p.fusion_weight[i] = xavier(c.fusion_dim, kf, kf, c.fusion_dim, rng);
    p.fusion_bias[i] = zeros(1, c.fusion_dim);
  }
  p.mlp_w1 = xavier(3 * kf, c.mlp_hidden, 3 * kf, c.mlp_hidden, rng);
  p.mlp_b1 = zeros(1, c.mlp_hidden);
  p.mlp_w2 = xavier(c.mlp_hidden, 1, c.mlp_hidden, 1, rng);
  p.mlp_b2 = zeros(1, 1);
  return p;
}

std::array<std::size_t, 3> ModelParams::input_dims() const {
  return {projection[0].cols(), projection[1].cols(), projection[2].cols()};
}

std::vector<num::NamedParam> ModelParams::named() {
  std::vector<num::NamedParam> out;
  collect(*this, [&](std::string name, num::Tensor& t) { out.push_back({std::move(name), &t}); });
  return out;
}

std::vector<std::pair<std::string, const num::Tensor*>> ModelParams::named() const {
  std::vector<std::pair<std::string, const num::Tensor*>> out;
  collect(*this, [&](std::string name, const num::Tensor& t) { out.emplace_back(std::move(name), &t); });
  return out;
}

void ModelParams::zero_grad() {
  for (auto& p : named()) p.tensor->clear_grad();
}

}  // namespace hcmgnn
