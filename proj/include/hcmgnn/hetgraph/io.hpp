#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hcmgnn/hetgraph/hetgraph.hpp"

namespace hcmgnn {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using IdPair = std::pair<std::string, std::string>;

struct FeatureTable {
  std::vector<std::string> ids;
  num::Tensor values;  // ids.size() x k
};

/// File-level view of a dataset before node indexing.
struct RawDataset {
  std::vector<IdPair> gene_microbe;
  std::vector<IdPair> gene_disease;
  std::vector<IdPair> microbe_disease;
  std::array<std::optional<FeatureTable>, 3> features;
};

struct DatasetPaths {
  std::filesystem::path gene_microbe;
  std::filesystem::path gene_disease;
  std::filesystem::path microbe_disease;
  std::array<std::optional<std::filesystem::path>, 3> features;
};

struct LoadReport {
  // Indexed as gene-microbe, gene-disease, microbe-disease.
  std::array<std::size_t, 3> duplicate_edges{};
  std::array<std::vector<std::string>, 3> ignored_feature_ids;
  std::array<bool, 3> one_hot_fallback{};
  std::vector<std::string> warnings;
};

struct LoadedGraph {
  HetGraph graph;
  LoadReport report;
};

// `id_a<TAB>id_b` per line, no header. Blank lines are skipped; any other
// malformed line throws DataError naming the file and line.
std::vector<IdPair> read_edge_file(const std::filesystem::path& path);
// CSV with header `id,f1,...,fk`.
FeatureTable read_feature_file(const std::filesystem::path& path);

RawDataset read_dataset(const DatasetPaths& paths);

// Nodes are indexed by first appearance over the gene-microbe, gene-disease
// and microbe-disease lists. Types without a feature table, or with nodes
// missing from it, fall back to one-hot identity features.
LoadedGraph build_graph(const RawDataset& raw);

LoadedGraph load_edges(const DatasetPaths& paths);

// Writes the three edge files and any present feature tables under `dir`.
DatasetPaths write_dataset(const RawDataset& raw, const std::filesystem::path& dir);

}  // namespace hcmgnn
