#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "hcmgnn/metapath/metapath.hpp"

namespace hcmgnn {

enum class Variant { kFull, kWoMP1, kWoMP2, kWoMP3, kWoTM, kWoAF, kWoBF };

inline constexpr std::array<Variant, 7> kVariants = {
    Variant::kFull, Variant::kWoMP1, Variant::kWoMP2, Variant::kWoMP3,
    Variant::kWoTM, Variant::kWoAF,  Variant::kWoBF};

// "full", "woMP-i", "woMP-ii", "woMP-iii", "woTM", "woAF", "woBF".
std::string_view variant_name(Variant v);
std::optional<Variant> parse_variant(std::string_view name);
MetapathKind family_of(Variant v);

struct ModelConfig {
  std::size_t projected_dim = 64;  // F'
  std::size_t heads = 4;           // K
  std::size_t fusion_dim = 128;    // d_a
  std::size_t mlp_hidden = 64;
  double leaky_slope = 0.01;
  Variant variant = Variant::kFull;

  std::size_t embedding_dim() const { return heads * projected_dim; }
  // Throws std::invalid_argument on zero dimensions or a negative slope.
  void validate() const;
};

nlohmann::json to_json(const ModelConfig& c);
// Missing keys keep their defaults; unknown variant names are rejected.
ModelConfig model_config_from_json(const nlohmann::json& j);

}  // namespace hcmgnn
