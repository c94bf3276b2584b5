#include "hcmgnn/hetgraph/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <set>
#include <stdexcept>

#include "hcmgnn/random.hpp"

namespace hcmgnn {

TripletSet::TripletSet(std::vector<Triplet> triplets) : items_(std::move(triplets)) {
  std::sort(items_.begin(), items_.end());
  items_.erase(std::unique(items_.begin(), items_.end()), items_.end());
}

bool TripletSet::contains(const Triplet& t) const {
  return std::binary_search(items_.begin(), items_.end(), t);
}

std::vector<LabeledTriplet> derive_positive_triplets(const HetGraph& g) {
  std::vector<LabeledTriplet> out;
  const EdgeSet& gene_microbe = g.edges(Relation::kGeneMicrobe);
  const EdgeSet& gene_disease = g.edges(Relation::kGeneDisease);
  const EdgeSet& microbe_disease = g.edges(Relation::kMicrobeDisease);
  std::vector<std::uint32_t> common;
  for (std::uint32_t n = 0; n < g.node_count(EntityType::kGene); ++n) {
    auto diseases_of_gene = gene_disease.neighbors(n);
    for (std::uint32_t m : gene_microbe.neighbors(n)) {
      auto diseases_of_microbe = microbe_disease.neighbors(m);
      common.clear();
      std::set_intersection(diseases_of_gene.begin(), diseases_of_gene.end(),
                            diseases_of_microbe.begin(), diseases_of_microbe.end(),
                            std::back_inserter(common));
      for (std::uint32_t d : common) out.push_back(LabeledTriplet::positive({n, m, d}));
    }
  }
  // Neighbor lists are sorted, so the output is already lexicographic.
  return out;
}

UniverseSize UniverseSize::of(const HetGraph& g) {
  return {static_cast<std::uint32_t>(g.node_count(EntityType::kGene)),
          static_cast<std::uint32_t>(g.node_count(EntityType::kMicrobe)),
          static_cast<std::uint32_t>(g.node_count(EntityType::kDisease))};
}

namespace {

// Replacement entities for one slot of `p` that produce a non-positive triplet.
std::vector<std::uint32_t> valid_replacements(const Triplet& p, EntityType slot,
                                              const TripletSet& known, UniverseSize universe) {
  std::vector<std::uint32_t> out;
  const std::uint32_t n = universe.count(slot);
  for (std::uint32_t x = 0; x < n; ++x) {
    if (x == p.slot(slot)) continue;
    Triplet c = p;
    c.set_slot(slot, x);
    if (!known.contains(c)) out.push_back(x);
  }
  return out;
}

std::string describe(const Triplet& t) {
  return "(" + std::to_string(t.gene) + "," + std::to_string(t.microbe) + "," +
         std::to_string(t.disease) + ")";
}

}  // namespace

std::vector<LabeledTriplet> sample_negatives(std::span<const Triplet> positives,
                                             const TripletSet& known_positives,
                                             UniverseSize universe, std::size_t count_per_positive,
                                             std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledTriplet> out;
  out.reserve(positives.size() * count_per_positive);
  for (const Triplet& p : positives) {
    std::array<std::vector<std::uint32_t>, 3> valid;
    std::array<std::size_t, 3> take{};
    std::size_t placed = 0;
    for (EntityType slot : kEntityTypes) {
      const std::size_t s = index_of(slot);
      valid[s] = valid_replacements(p, slot, known_positives, universe);
      const std::size_t quota = count_per_positive / 3 + (s < count_per_positive % 3 ? 1 : 0);
      take[s] = std::min(quota, valid[s].size());
      placed += take[s];
    }
    for (std::size_t s = 0; s < 3 && placed < count_per_positive; ++s) {
      const std::size_t extra = std::min(count_per_positive - placed, valid[s].size() - take[s]);
      take[s] += extra;
      placed += extra;
    }
    if (placed < count_per_positive) {
      throw std::runtime_error("cannot sample " + std::to_string(count_per_positive) +
                               " distinct negatives for positive " + describe(p) + "; only " +
                               std::to_string(placed) + " exist");
    }
    for (EntityType slot : kEntityTypes) {
      auto& pool = valid[index_of(slot)];
      // Partial Fisher-Yates: the first take[s] entries become a uniform sample.
      for (std::size_t k = 0; k < take[index_of(slot)]; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng.uniform_index(pool.size() - k));
        std::swap(pool[k], pool[j]);
        Triplet c = p;
        c.set_slot(slot, pool[k]);
        out.push_back(LabeledTriplet::negative(c));
      }
    }
  }
  return out;
}

std::vector<LabeledTriplet> sample_training_negatives(std::span<const Triplet> positives,
                                                      const TripletSet& known_positives,
                                                      UniverseSize universe, std::uint64_t seed) {
  Rng rng(seed);
  std::set<Triplet> emitted;
  std::vector<LabeledTriplet> out;
  out.reserve(positives.size());
  for (std::size_t i = 0; i < positives.size(); ++i) {
    const Triplet& p = positives[i];
    bool done = false;
    for (std::size_t attempt = 0; attempt < 3 && !done; ++attempt) {
      const EntityType slot = kEntityTypes[(i + attempt) % 3];
      std::vector<std::uint32_t> pool;
      for (std::uint32_t x : valid_replacements(p, slot, known_positives, universe)) {
        Triplet c = p;
        c.set_slot(slot, x);
        if (!emitted.contains(c)) pool.push_back(x);
      }
      if (pool.empty()) continue;
      Triplet c = p;
      c.set_slot(slot, pool[rng.uniform_index(pool.size())]);
      emitted.insert(c);
      out.push_back(LabeledTriplet::negative(c));
      done = true;
    }
    if (!done) {
      throw std::runtime_error("no unused negative available for positive " + describe(p));
    }
  }
  return out;
}

std::vector<Triplet> SplitPlan::cv_set() const {
  std::vector<Triplet> out;
  for (const auto& f : folds) out.insert(out.end(), f.begin(), f.end());
  return out;
}

std::vector<Triplet> SplitPlan::train_positives(std::size_t fold) const {
  if (fold >= folds.size()) throw std::out_of_range("fold index out of range");
  std::vector<Triplet> out;
  for (std::size_t k = 0; k < folds.size(); ++k) {
    if (k != fold) out.insert(out.end(), folds[k].begin(), folds[k].end());
  }
  return out;
}

SplitPlan make_split(std::span<const Triplet> positives, double test_fraction, std::size_t folds,
                     std::uint64_t seed) {
  if (folds == 0) throw std::invalid_argument("make_split: folds must be positive");
  if (test_fraction < 0.0 || test_fraction >= 1.0) {
    throw std::invalid_argument("make_split: test_fraction must lie in [0, 1)");
  }
  const std::size_t n = positives.size();
  if (n < folds) {
    throw std::invalid_argument("make_split: " + std::to_string(n) + " positives for " +
                                std::to_string(folds) + " folds");
  }
  std::vector<Triplet> shuffled(positives.begin(), positives.end());
  Rng rng(seed);
  rng.shuffle(shuffled);

  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n)));
  if (n - n_test < folds) n_test = n - folds;

  SplitPlan plan;
  plan.seed = seed;
  plan.test.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(n_test));
  const std::size_t rest = n - n_test;
  std::size_t offset = n_test;
  for (std::size_t k = 0; k < folds; ++k) {
    const std::size_t size = rest / folds + (k < rest % folds ? 1 : 0);
    plan.folds.emplace_back(shuffled.begin() + static_cast<std::ptrdiff_t>(offset),
                            shuffled.begin() + static_cast<std::ptrdiff_t>(offset + size));
    offset += size;
  }
  return plan;
}

nlohmann::json split_to_json(const SplitPlan& plan, const HetGraph& g) {
  nlohmann::json doc;
  doc["seed"] = plan.seed;
  doc["test"] = nlohmann::json::array();
  for (const Triplet& t : plan.test) doc["test"].push_back(g.triplet_id(t));
  doc["folds"] = nlohmann::json::array();
  for (const auto& fold : plan.folds) {
    nlohmann::json ids = nlohmann::json::array();
    for (const Triplet& t : fold) ids.push_back(g.triplet_id(t));
    doc["folds"].push_back(std::move(ids));
  }
  return doc;
}

SplitPlan split_from_json(const nlohmann::json& doc, const HetGraph& g) {
  auto parse = [&](const nlohmann::json& id) {
    auto t = g.parse_triplet_id(id.get<std::string>());
    if (!t) throw std::invalid_argument("split file: unknown triplet id '" + id.get<std::string>() + "'");
    return *t;
  };
  SplitPlan plan;
  plan.seed = doc.at("seed").get<std::uint64_t>();
  for (const auto& id : doc.at("test")) plan.test.push_back(parse(id));
  for (const auto& fold : doc.at("folds")) {
    std::vector<Triplet> f;
    for (const auto& id : fold) f.push_back(parse(id));
    plan.folds.push_back(std::move(f));
  }
  return plan;
}

std::string split_hash(const SplitPlan& plan, const HetGraph& g) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(split_to_json(plan, g).dump())));
  return buf;
}

double avg_node_degree(const HetGraph& g, const Triplet& t) {
  const double sum = static_cast<double>(g.degree(EntityType::kGene, t.gene) +
                                         g.degree(EntityType::kMicrobe, t.microbe) +
                                         g.degree(EntityType::kDisease, t.disease));
  return sum / 3.0;
}

std::vector<Triplet> triplets_of(std::span<const LabeledTriplet> labeled) {
  std::vector<Triplet> out;
  out.reserve(labeled.size());
  for (const auto& l : labeled) out.push_back(l.triplet);
  return out;
}

}  // namespace hcmgnn
