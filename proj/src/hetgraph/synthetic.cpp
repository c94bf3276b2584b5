#include "hcmgnn/hetgraph/synthetic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hcmgnn/random.hpp"

namespace hcmgnn {
namespace {

constexpr std::array<std::pair<EntityType, EntityType>, 3> kTypePairs = {{
    {EntityType::kGene, EntityType::kMicrobe},
    {EntityType::kGene, EntityType::kDisease},
    {EntityType::kMicrobe, EntityType::kDisease},
}};

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::string node_id(EntityType t, std::size_t i) {
  return std::string(1, static_cast<char>(type_name(t)[0])) + std::to_string(i);
}

}  // namespace

std::vector<HetGraph::Association> planted_edges(const std::array<num::Tensor, 3>& latents,
                                                 double affinity, double bias, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<HetGraph::Association> out;
  for (const auto& [a, b] : kTypePairs) {
    const num::Tensor& la = latents[index_of(a)];
    const num::Tensor& lb = latents[index_of(b)];
    for (std::uint32_t i = 0; i < la.rows(); ++i) {
      for (std::uint32_t j = 0; j < lb.rows(); ++j) {
        const double u = rng.uniform01();
        const double logit = affinity * dot(la.row(i), lb.row(j)) + bias;
        if (u < 1.0 / (1.0 + std::exp(-logit))) out.push_back({a, i, b, j});
      }
    }
  }
  return out;
}

SyntheticDataset generate_synthetic(const SyntheticOptions& o) {
  if (o.n_genes < 2 || o.n_microbes < 2 || o.n_diseases < 2) {
    throw std::invalid_argument("synthetic: every type needs at least 2 nodes");
  }
  if (!(o.density > 0.0 && o.density < 1.0)) {
    throw std::invalid_argument("synthetic: density must lie in (0, 1)");
  }
  if (o.latent_dim == 0) throw std::invalid_argument("synthetic: latent_dim must be positive");

  Rng rng(derive_seed(o.seed, "synthetic/latents"));
  std::vector<double> direction(o.latent_dim);
  double norm = 0.0;
  for (double& v : direction) {
    v = rng.normal();
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (double& v : direction) v /= norm;

  SyntheticDataset ds;
  const std::array<std::size_t, 3> counts = {o.n_genes, o.n_microbes, o.n_diseases};
  for (EntityType t : kEntityTypes) {
    num::Tensor lat(counts[index_of(t)], o.latent_dim);
    for (std::size_t i = 0; i < lat.rows(); ++i) {
      const double sign = rng.uniform01() < 0.5 ? 1.0 : -1.0;
      for (std::size_t k = 0; k < o.latent_dim; ++k) {
        lat(i, k) = sign * o.separation * direction[k] + o.component_std * rng.normal();
      }
    }
    ds.latents[index_of(t)] = std::move(lat);
  }

  const double pairs = static_cast<double>(o.n_genes * o.n_microbes + o.n_genes * o.n_diseases +
                                           o.n_microbes * o.n_diseases);
  const std::uint64_t edge_seed = derive_seed(o.seed, "synthetic/edges");
  double lo = -60.0, hi = 60.0;
  std::vector<HetGraph::Association> edges;
  double density = 0.0;
  bool calibrated = false;
  for (int step = 0; step < 60; ++step) {
    const double mid = 0.5 * (lo + hi);
    edges = planted_edges(ds.latents, o.affinity, mid, edge_seed);
    density = static_cast<double>(edges.size()) / pairs;
    ds.bias = mid;
    if (std::abs(density - o.density) <= 0.1 * o.density) {
      calibrated = true;
      break;
    }
    (density < o.density ? lo : hi) = mid;
  }
  if (!calibrated) {
    throw std::runtime_error("synthetic: bias calibration failed; achieved density " +
                             std::to_string(density) + " for target " + std::to_string(o.density));
  }
  ds.realized_density = density;
  ds.edge_count = edges.size();

  for (const auto& e : edges) {
    IdPair p{node_id(e.a, e.ia), node_id(e.b, e.ib)};
    if (e.a == EntityType::kGene && e.b == EntityType::kMicrobe) {
      ds.raw.gene_microbe.push_back(std::move(p));
    } else if (e.a == EntityType::kGene) {
      ds.raw.gene_disease.push_back(std::move(p));
    } else {
      ds.raw.microbe_disease.push_back(std::move(p));
    }
  }

  Rng noise(derive_seed(o.seed, "synthetic/features"));
  for (EntityType t : kEntityTypes) {
    const num::Tensor& lat = ds.latents[index_of(t)];
    FeatureTable table;
    table.values = num::Tensor(lat.rows(), lat.cols());
    for (std::size_t i = 0; i < lat.rows(); ++i) {
      table.ids.push_back(node_id(t, i));
      for (std::size_t k = 0; k < lat.cols(); ++k) {
        table.values(i, k) = lat(i, k) + o.feature_noise * noise.normal();
      }
    }
    ds.raw.features[index_of(t)] = std::move(table);
  }
  return ds;
}

}  // namespace hcmgnn
