#pragma once

#include <filesystem>

#include <json.hpp>

#include "hcmgnn/model/config.hpp"
#include "hcmgnn/model/params.hpp"

namespace hcmgnn {

struct Checkpoint {
  ModelConfig config;
  ModelParams params;
};

// {config, input_dims, metapaths, tensors: [{name, rows, cols, data}]}.
// Doubles are written in shortest round-trip form, so reload is bit-exact.
nlohmann::json checkpoint_to_json(const ModelConfig& config, const ModelParams& params);
Checkpoint checkpoint_from_json(const nlohmann::json& doc);

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config,
                     const ModelParams& params);
// Throws std::runtime_error naming the path on I/O or format errors.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hcmgnn
