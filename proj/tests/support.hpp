#pragma once

#include <array>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "hcmgnn/hetgraph/hetgraph.hpp"
#include "hcmgnn/hetgraph/io.hpp"
#include "hcmgnn/metapath/metapath.hpp"

namespace testing {

using hcmgnn::EntityType;
using hcmgnn::HetGraph;
using hcmgnn::Triplet;

inline constexpr EntityType G = EntityType::kGene;
inline constexpr EntityType M = EntityType::kMicrobe;
inline constexpr EntityType D = EntityType::kDisease;

inline HetGraph graph_from_pairs(std::vector<hcmgnn::IdPair> gm, std::vector<hcmgnn::IdPair> gd,
                                 std::vector<hcmgnn::IdPair> md) {
  hcmgnn::RawDataset raw;
  raw.gene_microbe = std::move(gm);
  raw.gene_disease = std::move(gd);
  raw.microbe_disease = std::move(md);
  return hcmgnn::build_graph(raw).graph;
}

// Every node registered up front (isolated ones included), random features.
inline HetGraph random_graph(std::uint32_t seed, std::size_t ng, std::size_t nm, std::size_t nd,
                             double p, std::size_t feature_dim = 4) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::array<hcmgnn::NodeRegistry, 3> reg;
  const std::array<std::size_t, 3> n = {ng, nm, nd};
  const char* prefix = "gmd";
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t i = 0; i < n[t]; ++i) reg[t].intern(std::string(1, prefix[t]) + std::to_string(i));
  }
  std::vector<HetGraph::Association> edges;
  const std::array<std::pair<EntityType, EntityType>, 3> pairs = {{{G, M}, {G, D}, {M, D}}};
  for (auto [a, b] : pairs) {
    for (std::uint32_t i = 0; i < n[hcmgnn::index_of(a)]; ++i) {
      for (std::uint32_t j = 0; j < n[hcmgnn::index_of(b)]; ++j) {
        if (u(rng) < p) edges.push_back({a, i, b, j});
      }
    }
  }
  std::array<hcmgnn::num::Tensor, 3> features;
  for (std::size_t t = 0; t < 3; ++t) {
    features[t] = hcmgnn::num::Tensor(n[t], feature_dim);
    for (double& v : features[t].data()) v = u(rng) * 2.0 - 1.0;
  }
  return HetGraph(std::move(reg), edges, std::move(features));
}

inline std::vector<Triplet> brute_force_triangles(const HetGraph& g) {
  using hcmgnn::Relation;
  std::vector<Triplet> out;
  for (std::uint32_t a = 0; a < g.node_count(G); ++a) {
    for (std::uint32_t b = 0; b < g.node_count(M); ++b) {
      for (std::uint32_t c = 0; c < g.node_count(D); ++c) {
        if (g.has_edge(Relation::kGeneMicrobe, a, b) && g.has_edge(Relation::kGeneDisease, a, c) &&
            g.has_edge(Relation::kMicrobeDisease, b, c)) {
          out.push_back({a, b, c});
        }
      }
    }
  }
  return out;
}

// All (h, e, t) over the full node sets with both edges present.
inline std::vector<std::array<std::uint32_t, 3>> brute_force_instances(const HetGraph& g,
                                                                       const hcmgnn::Metapath& p) {
  const auto& ty = p.types();
  const auto& rel = p.relations();
  std::vector<std::array<std::uint32_t, 3>> out;
  for (std::uint32_t h = 0; h < g.node_count(ty[0]); ++h) {
    for (std::uint32_t e = 0; e < g.node_count(ty[1]); ++e) {
      for (std::uint32_t t = 0; t < g.node_count(ty[2]); ++t) {
        if (g.has_edge(rel[0], h, e) && g.has_edge(rel[1], e, t)) out.push_back({h, e, t});
      }
    }
  }
  return out;
}

inline std::vector<std::array<std::uint32_t, 3>> rows_of(const hcmgnn::InstanceTable& table) {
  std::vector<std::array<std::uint32_t, 3>> out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    out.push_back({table.node(i, 0), table.node(i, 1), table.node(i, 2)});
  }
  return out;
}

}  // namespace testing
