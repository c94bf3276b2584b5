#include "hcmgnn/hetgraph/hetgraph.hpp"

#include <algorithm>
#include <stdexcept>

namespace hcmgnn {

std::uint32_t NodeRegistry::intern(std::string_view id) {
  auto it = index_.find(std::string(id));
  if (it != index_.end()) return it->second;
  const auto index = static_cast<std::uint32_t>(ids_.size());
  ids_.emplace_back(id);
  index_.emplace(ids_.back(), index);
  return index;
}

std::optional<std::uint32_t> NodeRegistry::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EdgeSet::EdgeSet(std::size_t source_count,
                 std::vector<std::pair<std::uint32_t, std::uint32_t>> edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  offsets_.assign(source_count + 1, 0);
  targets_.reserve(edges.size());
  for (const auto& [s, t] : edges) {
    if (s >= source_count) throw std::out_of_range("edge source out of range");
    ++offsets_[s + 1];
    targets_.push_back(t);
  }
  for (std::size_t i = 0; i < source_count; ++i) offsets_[i + 1] += offsets_[i];
}

std::span<const std::uint32_t> EdgeSet::neighbors(std::uint32_t source) const {
  if (source + 1 >= offsets_.size()) return {};
  return {targets_.data() + offsets_[source], offsets_[source + 1] - offsets_[source]};
}

bool EdgeSet::contains(std::uint32_t source, std::uint32_t target) const {
  auto n = neighbors(source);
  return std::binary_search(n.begin(), n.end(), target);
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> EdgeSet::pairs() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(size());
  for (std::uint32_t s = 0; s + 1 < offsets_.size(); ++s) {
    for (std::uint32_t t : neighbors(s)) out.emplace_back(s, t);
  }
  return out;
}

HetGraph::HetGraph(std::array<NodeRegistry, 3> registries,
                   std::span<const Association> associations,
                   std::array<num::Tensor, 3> features)
    : registries_(std::move(registries)), features_(std::move(features)) {
  std::array<std::vector<std::pair<std::uint32_t, std::uint32_t>>, kRelationCount> lists;
  for (const Association& a : associations) {
    if (a.a == a.b) throw std::invalid_argument("association must connect two distinct types");
    if (a.ia >= node_count(a.a) || a.ib >= node_count(a.b)) {
      throw std::out_of_range("association endpoint out of range");
    }
    lists[index_of(relation_between(a.a, a.b))].emplace_back(a.ia, a.ib);
    lists[index_of(relation_between(a.b, a.a))].emplace_back(a.ib, a.ia);
  }
  for (Relation r : kRelations) {
    edges_[index_of(r)] = EdgeSet(node_count(source_type(r)), std::move(lists[index_of(r)]));
  }
  for (EntityType t : kEntityTypes) {
    if (features_[index_of(t)].rows() != node_count(t)) {
      throw std::invalid_argument(std::string(type_name(t)) + " feature matrix has " +
                                  std::to_string(features_[index_of(t)].rows()) + " rows for " +
                                  std::to_string(node_count(t)) + " nodes");
    }
  }
}

std::size_t HetGraph::degree(EntityType t, std::uint32_t node) const {
  std::size_t d = 0;
  for (Relation r : kRelations) {
    if (source_type(r) == t) d += edges(r).neighbors(node).size();
  }
  return d;
}

std::string HetGraph::triplet_id(const Triplet& t) const {
  return nodes(EntityType::kGene).id(t.gene) + "|" + nodes(EntityType::kMicrobe).id(t.microbe) +
         "|" + nodes(EntityType::kDisease).id(t.disease);
}

std::optional<Triplet> HetGraph::parse_triplet_id(std::string_view id) const {
  const auto p1 = id.find('|');
  if (p1 == std::string_view::npos) return std::nullopt;
  const auto p2 = id.find('|', p1 + 1);
  if (p2 == std::string_view::npos || id.find('|', p2 + 1) != std::string_view::npos) {
    return std::nullopt;
  }
  auto g = nodes(EntityType::kGene).find(id.substr(0, p1));
  auto m = nodes(EntityType::kMicrobe).find(id.substr(p1 + 1, p2 - p1 - 1));
  auto d = nodes(EntityType::kDisease).find(id.substr(p2 + 1));
  if (!g || !m || !d) return std::nullopt;
  return Triplet{*g, *m, *d};
}

}  // namespace hcmgnn
