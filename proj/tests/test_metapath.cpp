#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include "hcmgnn/hetgraph/sampling.hpp"
#include "support.hpp"

using namespace hcmgnn;
using testing::D;
using testing::G;
using testing::M;

namespace {

using Row = std::array<std::uint32_t, 3>;

std::vector<std::string> names(const std::vector<Metapath>& paths) {
  std::vector<std::string> out;
  for (const auto& p : paths) out.push_back(p.name());
  return out;
}

// Toy graph: g1-m1, g1-d1, m1-d1 (one triangle) plus a dangling g2-m1.
HetGraph toy() {
  return testing::graph_from_pairs({{"g1", "m1"}, {"g2", "m1"}}, {{"g1", "d1"}}, {{"m1", "d1"}});
}

}  // namespace

TEST_CASE("causal metapaths come in the fixed order with reversal pairs") {
  auto paths = causal_metapaths();
  CHECK(names(paths) == std::vector<std::string>{"G-M-D", "G-D-M", "D-M-G", "D-G-M", "M-D-G", "M-G-D"});
  CHECK(paths[0].reversed() == paths[2]);
  CHECK(paths[1].reversed() == paths[4]);
  CHECK(paths[3].reversed() == paths[5]);
  for (const auto& p : paths) {
    CHECK(p.kind() == MetapathKind::kCausal3);
    CHECK(p.length() == 3);
    CHECK(p.relations().size() == 2);
    CHECK(p.reversed().reversed() == p);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(source_type(p.relations()[i]) == p.types()[i]);
      CHECK(target_type(p.relations()[i]) == p.types()[i + 1]);
    }
  }
}

TEST_CASE("metapath validation") {
  CHECK_THROWS_AS(Metapath({G, M, G}, MetapathKind::kCausal3), std::invalid_argument);
  CHECK_THROWS_AS(Metapath({G, M}, MetapathKind::kCausal3), std::invalid_argument);
  CHECK_THROWS_AS(Metapath({G, G}, MetapathKind::kPairwise2), std::invalid_argument);
  CHECK_THROWS_AS(Metapath({G, M, D, M, D}, MetapathKind::kSymmetric5), std::invalid_argument);
  CHECK_THROWS_AS(Metapath({G, M, M, M, G}, MetapathKind::kSymmetric5), std::invalid_argument);
  CHECK_NOTHROW(Metapath({G, M, D, M, G}, MetapathKind::kSymmetric5));
  CHECK_THROWS_AS(ablation_metapaths(MetapathKind::kCausal3), std::invalid_argument);
}

TEST_CASE("ablation families") {
  auto sym = ablation_metapaths(MetapathKind::kSymmetric5);
  REQUIRE(sym.size() == 6);
  for (const auto& p : sym) {
    CHECK(p.length() == 5);
    CHECK(p.reversed().types() == p.types());
  }
  auto pair = ablation_metapaths(MetapathKind::kPairwise2);
  CHECK(names(pair) == std::vector<std::string>{"G-M", "M-G", "G-D", "D-G", "M-D", "D-M"});
  CHECK(metapath_family(MetapathKind::kCausal3) == causal_metapaths());
}

TEST_CASE("subgraph extraction on the toy graph") {
  HetGraph g = toy();
  auto paths = causal_metapaths();
  CausalSubgraph gmd = extract_subgraph(g, paths[0]);
  CHECK(gmd.first().size() == 2);   // g1->m1, g2->m1
  CHECK(gmd.second().size() == 1);  // m1->d1
  CHECK(gmd.edge_count() == 3);
  CHECK_THROWS_AS(extract_subgraph(g, Metapath({G, M}, MetapathKind::kPairwise2)), std::invalid_argument);

  auto table = enumerate_instances(gmd);
  CHECK(testing::rows_of(table) == std::vector<Row>{{0, 0, 0}, {1, 0, 0}});

  auto dmg = enumerate_instances(extract_subgraph(g, paths[2]));
  CHECK(testing::rows_of(dmg) == std::vector<Row>{{0, 0, 0}, {0, 0, 1}});
}

TEST_CASE("every directed edge is used by exactly two causal subgraphs") {
  for (std::uint32_t seed = 0; seed < 5; ++seed) {
    HetGraph g = testing::random_graph(seed, 7, 6, 5, 0.4);
    std::map<std::size_t, std::size_t> uses;
    std::size_t total = 0;
    for (const auto& p : causal_metapaths()) {
      for (Relation r : p.relations()) ++uses[index_of(r)];
      total += extract_subgraph(g, p).edge_count();
    }
    std::size_t directed = 0;
    for (Relation r : kRelations) {
      CHECK(uses[index_of(r)] == 2);
      directed += g.edges(r).size();
    }
    CHECK(total == 2 * directed);
  }
}

TEST_CASE("instance enumeration matches brute force on random graphs") {
  for (std::uint32_t seed = 0; seed < 20; ++seed) {
    HetGraph g = testing::random_graph(100 + seed, 4 + seed % 6, 3 + seed % 5, 5 + seed % 4,
                                       0.15 + 0.03 * (seed % 7));
    auto paths = causal_metapaths();
    std::vector<InstanceTable> tables;
    for (const auto& p : paths) {
      InstanceTable t = enumerate_instances(extract_subgraph(g, p));
      CHECK(testing::rows_of(t) == testing::brute_force_instances(g, p));
      tables.push_back(std::move(t));
    }
    // Mirror pairs: reversing each instance of one gives the other.
    for (auto [a, b] : {std::pair{0, 2}, {1, 4}, {3, 5}}) {
      auto rows = testing::rows_of(tables[a]);
      for (auto& r : rows) std::swap(r[0], r[2]);
      std::sort(rows.begin(), rows.end());
      CHECK(rows == testing::rows_of(tables[b]));
    }
    // Walk enumeration agrees for length three.
    for (std::size_t i = 0; i < paths.size(); ++i) {
      CHECK(testing::rows_of(enumerate_walks(g, paths[i])) == testing::rows_of(tables[i]));
    }
  }
}

TEST_CASE("membership index") {
  HetGraph g = testing::random_graph(5, 8, 7, 6, 0.35);
  for (const auto& p : causal_metapaths()) {
    InstanceTable t = enumerate_instances(extract_subgraph(g, p));
    std::size_t total = 0;
    for (EntityType ty : kEntityTypes) {
      for (std::uint32_t v = 0; v < g.node_count(ty); ++v) {
        auto ids = t.instances_involving(ty, v);
        CHECK(std::is_sorted(ids.begin(), ids.end()));
        CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
        std::vector<std::uint32_t> expect;
        for (std::uint32_t i = 0; i < t.size(); ++i) {
          auto inst = t.instance(i);
          for (std::size_t pos = 0; pos < 3; ++pos) {
            if (p.types()[pos] == ty && inst[pos] == v) {
              expect.push_back(i);
              break;
            }
          }
        }
        CHECK(ids == expect);
        total += ids.size();
      }
    }
    // Causal types are distinct, so each instance is counted once per position.
    CHECK(total == 3 * t.size());
    CHECK(t.position_column(1).size() == t.size());
  }
}

TEST_CASE("symmetric walks revisit nodes and are palindromic in type") {
  HetGraph g = toy();
  Metapath gmdmg({G, M, D, M, G}, MetapathKind::kSymmetric5);
  InstanceTable t = enumerate_walks(g, gmdmg);
  // g -> m1 -> d1 -> m1 -> g for g in {g1, g2}.
  CHECK(t.size() == 4);
  CHECK(t.instance(0)[0] == 0);
  CHECK(t.instance(0)[4] == 0);
  CHECK(t.instance(1)[4] == 1);
  auto ids = t.instances_involving(G, 0);
  CHECK(ids.size() == 3);  // g1 at the head, the tail, or both
  auto m1 = t.instances_involving(M, 0);
  CHECK(m1.size() == 4);
}

TEST_CASE("pairwise instances are the relation edges") {
  HetGraph g = testing::random_graph(9, 6, 6, 6, 0.4);
  auto tables = enumerate_family(g, MetapathKind::kPairwise2);
  auto paths = ablation_metapaths(MetapathKind::kPairwise2);
  REQUIRE(tables.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    auto pairs = g.edges(paths[i].relations()[0]).pairs();
    REQUIRE(tables[i].size() == pairs.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      CHECK(tables[i].node(k, 0) == pairs[k].first);
      CHECK(tables[i].node(k, 1) == pairs[k].second);
    }
  }
}

TEST_CASE("each positive triplet appears as an instance of all six causal metapaths") {
  HetGraph g = testing::random_graph(12, 8, 8, 8, 0.4);
  auto triangles = triplets_of(derive_positive_triplets(g));
  REQUIRE_FALSE(triangles.empty());
  auto tables = enumerate_family(g, MetapathKind::kCausal3);
  for (const Triplet& tri : triangles) {
    for (const auto& t : tables) {
      Row row{};
      for (std::size_t pos = 0; pos < 3; ++pos) row[pos] = tri.slot(t.metapath().types()[pos]);
      auto rows = testing::rows_of(t);
      CHECK(std::binary_search(rows.begin(), rows.end(), row));
    }
  }
}

TEST_CASE("instance limit guard") {
  HetGraph g = testing::random_graph(1, 10, 10, 10, 0.9);
  auto sg = extract_subgraph(g, causal_metapaths()[0]);
  const std::size_t n = enumerate_instances(sg).size();
  REQUIRE(n > 10);
  CHECK_NOTHROW(enumerate_instances(sg, n));
  CHECK_THROWS_AS(enumerate_instances(sg, n - 1), std::length_error);
  CHECK_THROWS_AS(enumerate_walks(g, causal_metapaths()[0], n - 1), std::length_error);
}

TEST_CASE("instance audit dump") {
  HetGraph g = toy();
  auto tables = enumerate_family(g, MetapathKind::kCausal3);
  auto path = std::filesystem::temp_directory_path() / "hcmgnn_test_instances.tsv";
  write_instances_tsv(g, tables, path);
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  CHECK(first == "G-M-D\tg1\tm1\td1");
  std::filesystem::remove(path);
}
