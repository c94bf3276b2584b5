#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hcmgnn/hetgraph/io.hpp"

namespace hcmgnn {

struct SyntheticOptions {
  std::size_t n_genes = 40;
  std::size_t n_microbes = 30;
  std::size_t n_diseases = 30;
  std::size_t latent_dim = 8;
  double density = 0.15;
  std::uint64_t seed = 7;
  // Edge logit is affinity * <u, v> + bias; bias is calibrated.
  double affinity = 1.0;
  // Mixture component means sit at +/- separation along a random direction.
  double separation = 1.5;
  double component_std = 1.0;
  double feature_noise = 0.1;
};

/// Planted dataset: latent vectors from a two-component Gaussian mixture,
/// cross-type edges with probability sigmoid(affinity * <u, v> + bias), and
/// node features equal to latents plus Gaussian noise.
struct SyntheticDataset {
  RawDataset raw;
  std::array<num::Tensor, 3> latents;
  double bias = 0.0;
  double realized_density = 0.0;
  std::size_t edge_count = 0;
};

// Throws std::runtime_error if 60 bisection steps on the bias cannot bring
// the realized density within 10% of the target.
SyntheticDataset generate_synthetic(const SyntheticOptions& options);

/// Edge decisions for fixed latents and a given bias. Uniform draws are made
/// from `seed` in a fixed pair order, so density is monotone in `bias`.
std::vector<HetGraph::Association> planted_edges(const std::array<num::Tensor, 3>& latents,
                                                 double affinity, double bias, std::uint64_t seed);

}  // namespace hcmgnn
