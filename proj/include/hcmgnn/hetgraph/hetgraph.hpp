#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hcmgnn/hetgraph/types.hpp"
#include "hcmgnn/numerics/tensor.hpp"

namespace hcmgnn {

/// External string id <-> dense index for one entity type.
class NodeRegistry {
 public:
  // Returns the existing index or appends a new node.
  std::uint32_t intern(std::string_view id);
  std::optional<std::uint32_t> find(std::string_view id) const;
  const std::string& id(std::uint32_t index) const { return ids_.at(index); }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

/// Directed edges of one relation in CSR form. Edges are sorted by
/// (source, target) and unique.
class EdgeSet {
 public:
  EdgeSet() = default;
  EdgeSet(std::size_t source_count, std::vector<std::pair<std::uint32_t, std::uint32_t>> edges);

  std::size_t size() const { return targets_.size(); }
  bool empty() const { return targets_.empty(); }
  std::size_t source_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::span<const std::uint32_t> neighbors(std::uint32_t source) const;
  bool contains(std::uint32_t source, std::uint32_t target) const;
  // All (source, target) pairs in sorted order.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs() const;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> targets_;
};

/// Gene / microbe / disease graph. Every undirected association is stored in
/// both directions, so E_{A->B} and E_{B->A} are exact transposes. Immutable
/// after construction.
class HetGraph {
 public:
  struct Association {
    EntityType a;
    std::uint32_t ia;
    EntityType b;
    std::uint32_t ib;
  };

  // Associations must connect distinct types; duplicates are collapsed.
  // features[t] must have registries[t].size() rows.
  HetGraph(std::array<NodeRegistry, 3> registries, std::span<const Association> associations,
           std::array<num::Tensor, 3> features);

  const NodeRegistry& nodes(EntityType t) const { return registries_[index_of(t)]; }
  std::size_t node_count(EntityType t) const { return registries_[index_of(t)].size(); }
  const EdgeSet& edges(Relation r) const { return edges_[index_of(r)]; }
  bool has_edge(Relation r, std::uint32_t source, std::uint32_t target) const {
    return edges_[index_of(r)].contains(source, target);
  }
  const num::Tensor& features(EntityType t) const { return features_[index_of(t)]; }

  // Number of distinct undirected neighbors across both other types.
  std::size_t degree(EntityType t, std::uint32_t node) const;

  std::string triplet_id(const Triplet& t) const;
  std::optional<Triplet> parse_triplet_id(std::string_view id) const;

 private:
  std::array<NodeRegistry, 3> registries_;
  std::array<EdgeSet, kRelationCount> edges_;
  std::array<num::Tensor, 3> features_;
};

}  // namespace hcmgnn
