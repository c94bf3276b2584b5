#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string_view>

namespace hcmgnn {

// Declaration order fixes the iteration order Gene < Microbe < Disease.
enum class EntityType : std::uint8_t { kGene = 0, kMicrobe = 1, kDisease = 2 };

inline constexpr std::array<EntityType, 3> kEntityTypes = {
    EntityType::kGene, EntityType::kMicrobe, EntityType::kDisease};

constexpr std::size_t index_of(EntityType t) { return static_cast<std::size_t>(t); }

constexpr std::string_view type_letter(EntityType t) {
  switch (t) {
    case EntityType::kGene: return "G";
    case EntityType::kMicrobe: return "M";
    case EntityType::kDisease: return "D";
  }
  return "?";
}

constexpr std::string_view type_name(EntityType t) {
  switch (t) {
    case EntityType::kGene: return "gene";
    case EntityType::kMicrobe: return "microbe";
    case EntityType::kDisease: return "disease";
  }
  return "?";
}

// The six directed relations; paired relations are transposes of each other.
enum class Relation : std::uint8_t {
  kGeneMicrobe = 0,
  kMicrobeGene = 1,
  kGeneDisease = 2,
  kDiseaseGene = 3,
  kMicrobeDisease = 4,
  kDiseaseMicrobe = 5,
};

inline constexpr std::size_t kRelationCount = 6;

inline constexpr std::array<Relation, kRelationCount> kRelations = {
    Relation::kGeneMicrobe,    Relation::kMicrobeGene,    Relation::kGeneDisease,
    Relation::kDiseaseGene,    Relation::kMicrobeDisease, Relation::kDiseaseMicrobe};

constexpr std::size_t index_of(Relation r) { return static_cast<std::size_t>(r); }

constexpr EntityType source_type(Relation r) {
  switch (r) {
    case Relation::kGeneMicrobe:
    case Relation::kGeneDisease: return EntityType::kGene;
    case Relation::kMicrobeGene:
    case Relation::kMicrobeDisease: return EntityType::kMicrobe;
    case Relation::kDiseaseGene:
    case Relation::kDiseaseMicrobe: return EntityType::kDisease;
  }
  return EntityType::kGene;
}

constexpr EntityType target_type(Relation r) {
  switch (r) {
    case Relation::kMicrobeGene:
    case Relation::kDiseaseGene: return EntityType::kGene;
    case Relation::kGeneMicrobe:
    case Relation::kDiseaseMicrobe: return EntityType::kMicrobe;
    case Relation::kGeneDisease:
    case Relation::kMicrobeDisease: return EntityType::kDisease;
  }
  return EntityType::kGene;
}

constexpr Relation reverse(Relation r) {
  return static_cast<Relation>(index_of(r) ^ 1U);
}

// Relation from type a to type b; a != b.
constexpr Relation relation_between(EntityType a, EntityType b) {
  for (Relation r : kRelations) {
    if (source_type(r) == a && target_type(r) == b) return r;
  }
  return Relation::kGeneMicrobe;
}

struct Triplet {
  std::uint32_t gene = 0;
  std::uint32_t microbe = 0;
  std::uint32_t disease = 0;

  std::uint32_t slot(EntityType t) const {
    return t == EntityType::kGene ? gene : t == EntityType::kMicrobe ? microbe : disease;
  }
  void set_slot(EntityType t, std::uint32_t v) {
    (t == EntityType::kGene ? gene : t == EntityType::kMicrobe ? microbe : disease) = v;
  }

  friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

enum class Provenance : std::uint8_t { kObserved, kSampledNegative };

struct LabeledTriplet {
  Triplet triplet;
  std::uint8_t label = 0;
  Provenance provenance = Provenance::kSampledNegative;

  static LabeledTriplet positive(Triplet t) { return {t, 1, Provenance::kObserved}; }
  static LabeledTriplet negative(Triplet t) { return {t, 0, Provenance::kSampledNegative}; }
};

}  // namespace hcmgnn
