#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace hcmgnn {

// Portable seeded generator. The standard distributions are
// implementation-defined, so every draw used by the library goes through the
// helpers below to keep runs bit-identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; caches the second variate.
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Sub-seed derivation: splitmix64(base ^ fnv1a64(label)). One top-level seed
// fans out to every randomized component through distinct labels.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace hcmgnn
