#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hcmgnn/numerics/tensor.hpp"

namespace hcmgnn::num {

struct NamedParam {
  std::string name;
  Tensor* tensor;
};

struct AdamOptions {
  double learning_rate = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Moment buffers are created on the first step
/// and are keyed by parameter position, so the same parameter list must be
/// passed on every call.
class Adam {
 public:
  explicit Adam(AdamOptions options = {}) : options_(options) {}

  // Applies one update from each parameter's gradient buffer. A parameter
  // without a gradient is treated as having zero gradient. Throws before
  // touching any parameter if a gradient is non-finite.
  void step(const std::vector<NamedParam>& params);

  std::uint64_t steps() const { return t_; }
  const AdamOptions& options() const { return options_; }
  const std::vector<Tensor>& first_moments() const { return m_; }
  const std::vector<Tensor>& second_moments() const { return v_; }

 private:
  AdamOptions options_;
  std::uint64_t t_ = 0;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
};

}  // namespace hcmgnn::num
