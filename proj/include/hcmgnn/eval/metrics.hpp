#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hcmgnn/numerics/tensor.hpp"

namespace hcmgnn {

/// One positive ranked against its negatives. Candidate ids are positions in
/// `scores`; the positive sits at `positive`.
struct RankedCase {
  std::string positive_id;
  std::vector<double> scores;
  std::size_t positive = 0;
  std::size_t rank = 0;  // 1-based
};

// Descending score, ties broken by ascending candidate id:
// rank = 1 + #{s > s_pos} + #{j < positive : s_j == s_pos}.
std::size_t resolve_rank(std::span<const double> scores, std::size_t positive);
RankedCase make_case(std::string positive_id, std::vector<double> scores, std::size_t positive);

struct RankMetrics {
  double hit1 = 0, hit3 = 0, hit5 = 0;
  double ndcg1 = 0, ndcg3 = 0, ndcg5 = 0;
  double mrr = 0;
  std::size_t cases = 0;
};

// Throws std::invalid_argument for an empty list or a zero rank.
RankMetrics rank_metrics(std::span<const std::size_t> ranks);
RankMetrics rank_metrics(std::span<const RankedCase> cases);
// Field-wise mean (used for fold averages).
RankMetrics mean_metrics(std::span<const RankMetrics> metrics);

nlohmann::json to_json(const RankMetrics& m);

struct StratumReport {
  double threshold = 0;
  std::size_t count = 0;
  std::optional<double> hit1;  // empty when the stratum is empty
};

// Cumulative strata (0, N]: cases whose degree is <= N. Thresholds must be
// strictly increasing.
std::vector<StratumReport> stratify_by_degree(std::span<const double> degrees,
                                              std::span<const std::size_t> ranks,
                                              std::span<const double> thresholds);
// `count` empirical quantiles of `degrees`; falls back to evenly spaced
// values up to the maximum when quantiles coincide.
std::vector<double> default_thresholds(std::span<const double> degrees, std::size_t count = 12);
void write_strata_tsv(const std::filesystem::path& path, std::span<const StratumReport> strata);

struct SilhouetteResult {
  double score = 0;
  std::vector<std::string> warnings;
};

// Mean silhouette over all points with Euclidean distance and two classes
// (labels 0/1). A point alone in its class scores 0, with a warning.
SilhouetteResult silhouette(const num::Tensor& points, std::span<const int> labels);

struct EmbeddingTable {
  std::vector<std::string> ids;
  std::vector<int> labels;
  num::Tensor vectors;
};

// TSV rows: triplet_id, label, v1..vk.
void export_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);
EmbeddingTable load_embeddings(const std::filesystem::path& path);

}  // namespace hcmgnn
