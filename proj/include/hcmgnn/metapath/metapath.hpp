#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hcmgnn/hetgraph/hetgraph.hpp"

namespace hcmgnn {

enum class MetapathKind : std::uint8_t { kCausal3, kPairwise2, kSymmetric5 };

std::string_view kind_name(MetapathKind k);

/// Ordered entity-type sequence with its induced relation sequence.
class Metapath {
 public:
  // Validates the invariants of `kind` (distinct types for causal-3,
  // palindrome for symmetric-5, consecutive types distinct).
  Metapath(std::vector<EntityType> types, MetapathKind kind);

  const std::vector<EntityType>& types() const { return types_; }
  const std::vector<Relation>& relations() const { return relations_; }
  MetapathKind kind() const { return kind_; }
  std::size_t length() const { return types_.size(); }
  EntityType head_type() const { return types_.front(); }
  EntityType tail_type() const { return types_.back(); }
  // "G-M-D"
  std::string name() const;
  // Same types read tail to head. Kind is preserved.
  Metapath reversed() const;

  friend bool operator==(const Metapath& a, const Metapath& b) {
    return a.types_ == b.types_ && a.kind_ == b.kind_;
  }

 private:
  std::vector<EntityType> types_;
  std::vector<Relation> relations_;
  MetapathKind kind_;
};

// G-M-D, G-D-M, D-M-G, D-G-M, M-D-G, M-G-D.
std::vector<Metapath> causal_metapaths();
// symmetric-5: the six palindromes; pairwise-2: the six ordered type pairs.
std::vector<Metapath> ablation_metapaths(MetapathKind kind);
std::vector<Metapath> metapath_family(MetapathKind kind);

/// Directed subgraph of one causal metapath: exactly its two relation edge
/// sets over the full node set.
class CausalSubgraph {
 public:
  CausalSubgraph(const HetGraph& graph, Metapath path);

  const HetGraph& graph() const { return *graph_; }
  const Metapath& metapath() const { return path_; }
  const EdgeSet& first() const { return graph_->edges(path_.relations()[0]); }
  const EdgeSet& second() const { return graph_->edges(path_.relations()[1]); }
  std::size_t edge_count() const { return first().size() + second().size(); }

 private:
  const HetGraph* graph_;
  Metapath path_;
};

// Requires a causal-3 metapath.
CausalSubgraph extract_subgraph(const HetGraph& g, const Metapath& p);

inline constexpr std::size_t kMaxInstancesPerSubgraph = 10'000'000;

/// Instances of one metapath stored row-major (length() node ids each), in
/// lexicographic order, with a per-node membership index built once.
class InstanceTable {
 public:
  InstanceTable(Metapath path, std::array<std::size_t, 3> node_counts,
                std::vector<std::uint32_t> flat_nodes);

  const Metapath& metapath() const { return path_; }
  std::size_t size() const { return length() == 0 ? 0 : nodes_.size() / length(); }
  std::size_t length() const { return path_.length(); }
  std::span<const std::uint32_t> instance(std::size_t i) const {
    return {nodes_.data() + i * length(), length()};
  }
  std::uint32_t node(std::size_t i, std::size_t pos) const { return nodes_[i * length() + pos]; }
  // Node ids at one position, one per instance.
  std::vector<std::uint32_t> position_column(std::size_t pos) const;

  // S_p(v): sorted ids of instances in which node v of type t appears.
  std::vector<std::uint32_t> instances_involving(EntityType t, std::uint32_t v) const;

 private:
  Metapath path_;
  std::vector<std::uint32_t> nodes_;
  // Per position: CSR offsets by node id over instance ids.
  std::vector<std::vector<std::size_t>> member_offsets_;
  std::vector<std::vector<std::uint32_t>> member_ids_;
};

/// Intermediate-node join: for each intermediate e, in-neighbors of e under
/// the first relation crossed with out-neighbors under the second.
InstanceTable enumerate_instances(const CausalSubgraph& sg,
                                  std::size_t limit = kMaxInstancesPerSubgraph);

/// Walk enumeration for any metapath length (node revisits allowed).
InstanceTable enumerate_walks(const HetGraph& g, const Metapath& p,
                              std::size_t limit = kMaxInstancesPerSubgraph);

/// Instance tables for every metapath of a family, in family order.
std::vector<InstanceTable> enumerate_family(const HetGraph& g, MetapathKind kind,
                                            std::size_t limit = kMaxInstancesPerSubgraph);

// Audit dump: `metapath<TAB>node...` with external ids.
void write_instances_tsv(const HetGraph& g, std::span<const InstanceTable> tables,
                         const std::filesystem::path& path);

}  // namespace hcmgnn
