#include "hcmgnn/metapath/metapath.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace hcmgnn {
namespace {

constexpr EntityType G = EntityType::kGene;
constexpr EntityType M = EntityType::kMicrobe;
constexpr EntityType D = EntityType::kDisease;

std::array<std::size_t, 3> counts_of(const HetGraph& g) {
  return {g.node_count(G), g.node_count(M), g.node_count(D)};
}

void check_limit(std::size_t n, std::size_t limit, const Metapath& p) {
  if (n > limit) {
    throw std::length_error("metapath " + p.name() + " exceeds " + std::to_string(limit) +
                            " instances");
  }
}

}  // namespace

std::string_view kind_name(MetapathKind k) {
  switch (k) {
    case MetapathKind::kCausal3: return "causal-3";
    case MetapathKind::kPairwise2: return "pairwise-2";
    case MetapathKind::kSymmetric5: return "symmetric-5";
  }
  return "?";
}

Metapath::Metapath(std::vector<EntityType> types, MetapathKind kind)
    : types_(std::move(types)), kind_(kind) {
  const std::size_t expected = kind == MetapathKind::kCausal3     ? 3
                               : kind == MetapathKind::kPairwise2 ? 2
                                                                  : 5;
  if (types_.size() != expected) {
    throw std::invalid_argument(std::string(kind_name(kind)) + " metapath needs " +
                                std::to_string(expected) + " types");
  }
  for (std::size_t i = 0; i + 1 < types_.size(); ++i) {
    if (types_[i] == types_[i + 1]) {
      throw std::invalid_argument("metapath has repeated consecutive type");
    }
    relations_.push_back(relation_between(types_[i], types_[i + 1]));
  }
  if (kind == MetapathKind::kCausal3 && types_[0] == types_[2]) {
    throw std::invalid_argument("causal metapath must contain each type once");
  }
  if (kind == MetapathKind::kSymmetric5 &&
      !std::equal(types_.begin(), types_.end(), types_.rbegin())) {
    throw std::invalid_argument("symmetric metapath must be a palindrome");
  }
}

std::string Metapath::name() const {
  std::string out;
  for (std::size_t i = 0; i < types_.size(); ++i) {
    if (i) out += '-';
    out += type_letter(types_[i]);
  }
  return out;
}

Metapath Metapath::reversed() const {
  return Metapath(std::vector<EntityType>(types_.rbegin(), types_.rend()), kind_);
}

std::vector<Metapath> causal_metapaths() {
  const auto k = MetapathKind::kCausal3;
  return {Metapath({G, M, D}, k), Metapath({G, D, M}, k), Metapath({D, M, G}, k),
          Metapath({D, G, M}, k), Metapath({M, D, G}, k), Metapath({M, G, D}, k)};
}

std::vector<Metapath> ablation_metapaths(MetapathKind kind) {
  switch (kind) {
    case MetapathKind::kSymmetric5: {
      const auto k = MetapathKind::kSymmetric5;
      return {Metapath({G, M, D, M, G}, k), Metapath({G, D, M, D, G}, k),
              Metapath({M, G, D, G, M}, k), Metapath({M, D, G, D, M}, k),
              Metapath({D, G, M, G, D}, k), Metapath({D, M, G, M, D}, k)};
    }
    case MetapathKind::kPairwise2: {
      const auto k = MetapathKind::kPairwise2;
      return {Metapath({G, M}, k), Metapath({M, G}, k), Metapath({G, D}, k),
              Metapath({D, G}, k), Metapath({M, D}, k), Metapath({D, M}, k)};
    }
    case MetapathKind::kCausal3: break;
  }
  throw std::invalid_argument("ablation_metapaths: kind must be symmetric-5 or pairwise-2");
}

std::vector<Metapath> metapath_family(MetapathKind kind) {
  return kind == MetapathKind::kCausal3 ? causal_metapaths() : ablation_metapaths(kind);
}

CausalSubgraph::CausalSubgraph(const HetGraph& graph, Metapath path)
    : graph_(&graph), path_(std::move(path)) {
  if (path_.kind() != MetapathKind::kCausal3) {
    throw std::invalid_argument("causal subgraph requires a causal-3 metapath, got " + path_.name());
  }
}

CausalSubgraph extract_subgraph(const HetGraph& g, const Metapath& p) { return CausalSubgraph(g, p); }

InstanceTable::InstanceTable(Metapath path, std::array<std::size_t, 3> node_counts,
                             std::vector<std::uint32_t> flat_nodes)
    : path_(std::move(path)), nodes_(std::move(flat_nodes)) {
  const std::size_t len = length();
  if (nodes_.size() % len != 0) throw std::invalid_argument("instance table size mismatch");
  const std::size_t n = nodes_.size() / len;
  member_offsets_.resize(len);
  member_ids_.resize(len);
  for (std::size_t pos = 0; pos < len; ++pos) {
    const std::size_t count = node_counts[index_of(path_.types()[pos])];
    auto& offsets = member_offsets_[pos];
    auto& ids = member_ids_[pos];
    offsets.assign(count + 1, 0);
    for (std::size_t i = 0; i < n; ++i) ++offsets[node(i, pos) + 1];
    for (std::size_t v = 0; v < count; ++v) offsets[v + 1] += offsets[v];
    ids.resize(n);
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t i = 0; i < n; ++i) ids[cursor[node(i, pos)]++] = static_cast<std::uint32_t>(i);
  }
}

std::vector<std::uint32_t> InstanceTable::position_column(std::size_t pos) const {
  std::vector<std::uint32_t> out(size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = node(i, pos);
  return out;
}

std::vector<std::uint32_t> InstanceTable::instances_involving(EntityType t, std::uint32_t v) const {
  std::vector<std::uint32_t> out;
  for (std::size_t pos = 0; pos < length(); ++pos) {
    if (path_.types()[pos] != t) continue;
    const auto& offsets = member_offsets_[pos];
    if (v + 1 >= offsets.size()) continue;
    out.insert(out.end(), member_ids_[pos].begin() + static_cast<std::ptrdiff_t>(offsets[v]),
               member_ids_[pos].begin() + static_cast<std::ptrdiff_t>(offsets[v + 1]));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

InstanceTable enumerate_instances(const CausalSubgraph& sg, std::size_t limit) {
  const HetGraph& g = sg.graph();
  const Metapath& p = sg.metapath();
  const EntityType mid = p.types()[1];
  // In-neighbors of e under the first relation are out-neighbors of e under
  // its reverse.
  const EdgeSet& into_mid = g.edges(reverse(p.relations()[0]));
  const EdgeSet& out_of_mid = sg.second();

  std::size_t total = 0;
  for (std::uint32_t e = 0; e < g.node_count(mid); ++e) {
    total += into_mid.neighbors(e).size() * out_of_mid.neighbors(e).size();
  }
  check_limit(total, limit, p);

  std::vector<std::array<std::uint32_t, 3>> rows;
  rows.reserve(total);
  for (std::uint32_t e = 0; e < g.node_count(mid); ++e) {
    for (std::uint32_t h : into_mid.neighbors(e)) {
      for (std::uint32_t t : out_of_mid.neighbors(e)) rows.push_back({h, e, t});
    }
  }
  std::sort(rows.begin(), rows.end());
  std::vector<std::uint32_t> flat;
  flat.reserve(rows.size() * 3);
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  return InstanceTable(p, counts_of(g), std::move(flat));
}

InstanceTable enumerate_walks(const HetGraph& g, const Metapath& p, std::size_t limit) {
  const std::size_t len = p.length();
  std::vector<std::uint32_t> flat;
  std::vector<std::uint32_t> walk(len);
  std::size_t count = 0;
  // Depth-first over sorted adjacency yields lexicographic order directly.
  auto extend = [&](auto&& self, std::size_t depth) -> void {
    if (depth == len) {
      check_limit(++count, limit, p);
      flat.insert(flat.end(), walk.begin(), walk.end());
      return;
    }
    for (std::uint32_t next : g.edges(p.relations()[depth - 1]).neighbors(walk[depth - 1])) {
      walk[depth] = next;
      self(self, depth + 1);
    }
  };
  for (std::uint32_t h = 0; h < g.node_count(p.head_type()); ++h) {
    walk[0] = h;
    extend(extend, 1);
  }
  return InstanceTable(p, counts_of(g), std::move(flat));
}

std::vector<InstanceTable> enumerate_family(const HetGraph& g, MetapathKind kind,
                                            std::size_t limit) {
  std::vector<InstanceTable> out;
  for (const Metapath& p : metapath_family(kind)) {
    if (kind == MetapathKind::kCausal3) {
      out.push_back(enumerate_instances(extract_subgraph(g, p), limit));
    } else {
      out.push_back(enumerate_walks(g, p, limit));
    }
  }
  return out;
}

void write_instances_tsv(const HetGraph& g, std::span<const InstanceTable> tables,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const InstanceTable& table : tables) {
    const auto& types = table.metapath().types();
    const std::string name = table.metapath().name();
    for (std::size_t i = 0; i < table.size(); ++i) {
      out << name;
      for (std::size_t pos = 0; pos < table.length(); ++pos) {
        out << '\t' << g.nodes(types[pos]).id(table.node(i, pos));
      }
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace hcmgnn
