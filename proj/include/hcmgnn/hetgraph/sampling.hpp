#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hcmgnn/hetgraph/hetgraph.hpp"

namespace hcmgnn {

/// Sorted, duplicate-free triplet collection with O(log n) membership.
class TripletSet {
 public:
  TripletSet() = default;
  explicit TripletSet(std::vector<Triplet> triplets);
  bool contains(const Triplet& t) const;
  std::size_t size() const { return items_.size(); }
  const std::vector<Triplet>& items() const { return items_; }

 private:
  std::vector<Triplet> items_;
};

/// Every (gene, microbe, disease) whose three pairwise associations all
/// exist, sorted by (gene, microbe, disease). For each gene-microbe edge the
/// disease neighbor lists of both endpoints are intersected.
std::vector<LabeledTriplet> derive_positive_triplets(const HetGraph& g);

struct UniverseSize {
  std::uint32_t genes = 0;
  std::uint32_t microbes = 0;
  std::uint32_t diseases = 0;

  static UniverseSize of(const HetGraph& g);
  std::uint32_t count(EntityType t) const {
    return t == EntityType::kGene ? genes : t == EntityType::kMicrobe ? microbes : diseases;
  }
};

/// For each positive emits `count_per_positive` distinct negatives that each
/// corrupt exactly one slot. Slot quotas cycle gene, microbe, disease
/// (count/3 each, remainder in slot order); a slot with too few valid
/// replacements passes its deficit to the following slots. Replacements are
/// drawn uniformly without replacement among entities that do not form a
/// known positive. Output is grouped per positive, in input order.
/// Throws std::runtime_error naming the positive when too few negatives exist.
std::vector<LabeledTriplet> sample_negatives(std::span<const Triplet> positives,
                                             const TripletSet& known_positives,
                                             UniverseSize universe, std::size_t count_per_positive,
                                             std::uint64_t seed);

/// One negative per positive; positive i corrupts slot i mod 3 (falling
/// through to the next slot if exhausted). Negatives are unique across the
/// whole list.
std::vector<LabeledTriplet> sample_training_negatives(std::span<const Triplet> positives,
                                                      const TripletSet& known_positives,
                                                      UniverseSize universe, std::uint64_t seed);

/// Test set plus five (or `folds`) cross-validation folds of positives.
struct SplitPlan {
  std::vector<Triplet> test;
  std::vector<std::vector<Triplet>> folds;
  std::uint64_t seed = 0;

  std::size_t fold_count() const { return folds.size(); }
  std::vector<Triplet> cv_set() const;
  std::vector<Triplet> train_positives(std::size_t fold) const;
  const std::vector<Triplet>& validation_positives(std::size_t fold) const { return folds.at(fold); }
};

/// Shuffles with the seed, reserves round(test_fraction * n) positives for
/// test, and deals the rest into near-equal folds (earlier folds take the
/// remainder).
SplitPlan make_split(std::span<const Triplet> positives, double test_fraction, std::size_t folds,
                     std::uint64_t seed);

nlohmann::json split_to_json(const SplitPlan& plan, const HetGraph& g);
SplitPlan split_from_json(const nlohmann::json& doc, const HetGraph& g);
// Stable fingerprint of a split, used to confirm controlled comparisons.
std::string split_hash(const SplitPlan& plan, const HetGraph& g);

/// (deg(n) + deg(m) + deg(d)) / 3 over undirected neighbors.
double avg_node_degree(const HetGraph& g, const Triplet& t);

std::vector<Triplet> triplets_of(std::span<const LabeledTriplet> labeled);

}  // namespace hcmgnn
