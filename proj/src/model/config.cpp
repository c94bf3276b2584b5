#include "hcmgnn/model/config.hpp"

#include <stdexcept>

namespace hcmgnn {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kWoMP1: return "woMP-i";
    case Variant::kWoMP2: return "woMP-ii";
    case Variant::kWoMP3: return "woMP-iii";
    case Variant::kWoTM: return "woTM";
    case Variant::kWoAF: return "woAF";
    case Variant::kWoBF: return "woBF";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view name) {
  for (Variant v : kVariants) {
    if (variant_name(v) == name) return v;
  }
  return std::nullopt;
}

MetapathKind family_of(Variant v) {
  switch (v) {
    case Variant::kWoMP3: return MetapathKind::kSymmetric5;
    case Variant::kWoTM: return MetapathKind::kPairwise2;
    default: return MetapathKind::kCausal3;
  }
}

void ModelConfig::validate() const {
  if (projected_dim == 0 || heads == 0 || fusion_dim == 0 || mlp_hidden == 0) {
    throw std::invalid_argument("model config: dimensions and head count must be positive");
  }
  if (!(leaky_slope >= 0.0)) throw std::invalid_argument("model config: negative LeakyReLU slope");
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"projected_dim", c.projected_dim}, {"heads", c.heads},
          {"fusion_dim", c.fusion_dim},       {"mlp_hidden", c.mlp_hidden},
          {"leaky_slope", c.leaky_slope},     {"activation", "elu"},
          {"variant", std::string(variant_name(c.variant))}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.projected_dim = j.value("projected_dim", c.projected_dim);
  c.heads = j.value("heads", c.heads);
  c.fusion_dim = j.value("fusion_dim", c.fusion_dim);
  c.mlp_hidden = j.value("mlp_hidden", c.mlp_hidden);
  c.leaky_slope = j.value("leaky_slope", c.leaky_slope);
  if (j.contains("activation") && j.at("activation").get<std::string>() != "elu") {
    throw std::invalid_argument("model config: only the elu aggregation activation is supported");
  }
  if (j.contains("variant")) {
    const auto name = j.at("variant").get<std::string>();
    auto v = parse_variant(name);
    if (!v) throw std::invalid_argument("model config: unknown variant '" + name + "'");
    c.variant = *v;
  }
  c.validate();
  return c;
}

}  // namespace hcmgnn
