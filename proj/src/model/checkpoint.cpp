#include "hcmgnn/model/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

namespace hcmgnn {

nlohmann::json checkpoint_to_json(const ModelConfig& config, const ModelParams& params) {
  nlohmann::json doc;
  doc["config"] = to_json(config);
  const auto dims = params.input_dims();
  doc["input_dims"] = {dims[0], dims[1], dims[2]};
  doc["metapaths"] = params.metapath_names;
  doc["tensors"] = nlohmann::json::array();
  for (const auto& [name, t] : params.named()) {
    for (double v : t->data()) {
      if (!std::isfinite(v)) throw std::runtime_error("checkpoint: tensor " + name + " is not finite");
    }
    doc["tensors"].push_back({{"name", name},
                              {"rows", t->rows()},
                              {"cols", t->cols()},
                              {"data", std::vector<double>(t->data().begin(), t->data().end())}});
  }
  return doc;
}

Checkpoint checkpoint_from_json(const nlohmann::json& doc) {
  Checkpoint ck;
  ck.config = model_config_from_json(doc.at("config"));
  const auto dims = doc.at("input_dims").get<std::array<std::size_t, 3>>();
  std::vector<Metapath> paths;
  const MetapathKind kind = family_of(ck.config.variant);
  for (const Metapath& p : metapath_family(kind)) paths.push_back(p);
  if (doc.at("metapaths").get<std::vector<std::string>>().size() != paths.size()) {
    throw std::runtime_error("checkpoint: metapath list does not match the variant");
  }
  // Shapes come from the config; values are overwritten below.
  ck.params = ModelParams::init(ck.config, dims, paths, 0);
  if (ck.params.metapath_names != doc.at("metapaths").get<std::vector<std::string>>()) {
    throw std::runtime_error("checkpoint: metapath names do not match the variant");
  }

  std::map<std::string, const nlohmann::json*> stored;
  for (const auto& t : doc.at("tensors")) stored[t.at("name").get<std::string>()] = &t;
  auto named = ck.params.named();
  if (stored.size() != named.size()) {
    throw std::runtime_error("checkpoint: expected " + std::to_string(named.size()) +
                             " tensors, found " + std::to_string(stored.size()));
  }
  for (auto& p : named) {
    auto it = stored.find(p.name);
    if (it == stored.end()) throw std::runtime_error("checkpoint: missing tensor " + p.name);
    const auto& t = *it->second;
    const auto rows = t.at("rows").get<std::size_t>();
    const auto cols = t.at("cols").get<std::size_t>();
    if (rows != p.tensor->rows() || cols != p.tensor->cols()) {
      throw std::runtime_error("checkpoint: tensor " + p.name + " has shape (" +
                               std::to_string(rows) + "x" + std::to_string(cols) + "), expected " +
                               p.tensor->shape_string());
    }
    num::Tensor value(rows, cols, t.at("data").get<std::vector<double>>());
    value.set_requires_grad(true);
    *p.tensor = std::move(value);
  }
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const ModelConfig& config,
                     const ModelParams& params) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(config, params).dump() << '\n';
  if (!out) throw std::runtime_error("write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  try {
    return checkpoint_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed checkpoint " + path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error("invalid checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace hcmgnn
