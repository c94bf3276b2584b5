#include "hcmgnn/numerics/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace hcmgnn::num {

void Adam::step(const std::vector<NamedParam>& params) {
  if (m_.empty()) {
    for (const NamedParam& p : params) {
      m_.emplace_back(p.tensor->rows(), p.tensor->cols());
      v_.emplace_back(p.tensor->rows(), p.tensor->cols());
    }
  }
  if (m_.size() != params.size()) {
    throw std::invalid_argument("adam: parameter list changed between steps");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Tensor& p = *params[k].tensor;
    if (!p.same_shape(m_[k])) {
      throw std::invalid_argument("adam: parameter '" + params[k].name + "' changed shape to " +
                                  p.shape_string());
    }
    if (!p.has_grad()) continue;
    for (double g : p.grad()) {
      if (!std::isfinite(g)) {
        throw std::runtime_error("adam: non-finite gradient in parameter '" + params[k].name + "'");
      }
    }
  }

  ++t_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k].tensor;
    if (!p.has_grad()) continue;
    std::span<const double> g = p.grad();
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= options_.learning_rate * m_hat / (std::sqrt(v_hat) + options_.epsilon);
    }
  }
}

}  // namespace hcmgnn::num
