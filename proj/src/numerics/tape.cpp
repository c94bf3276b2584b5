#include "hcmgnn/numerics/tape.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace hcmgnn::num {

const Tensor& Var::value() const {
  if (tape == nullptr) throw std::logic_error("Var is not bound to a tape");
  return tape->value(*this);
}

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

Var Tape::param(Tensor& param) {
  Node node;
  node.value = param;
  node.value.set_requires_grad(false);
  node.value.clear_grad();
  node.requires_grad = record_grad_ && param.requires_grad();
  node.param = node.requires_grad ? &param : nullptr;
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
  check_owner(v, "value");
  return nodes_[v.id].value;
}

void Tape::check_owner(Var v, const char* op) const {
  if (v.tape != this || v.id >= nodes_.size()) {
    throw std::invalid_argument(std::string(op) + ": variable does not belong to this tape");
  }
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn) {
  Node node;
  node.value = std::move(value);
  if (record_grad_) {
    node.requires_grad = std::any_of(inputs.begin(), inputs.end(),
                                     [&](std::size_t i) { return nodes_[i].requires_grad; });
  }
  if (node.requires_grad) {
    node.inputs = std::move(inputs);
    node.backward = std::move(fn);
  }
  nodes_.push_back(std::move(node));
  return Var{this, nodes_.size() - 1};
}

std::span<double> Tape::grad_buffer(std::size_t id) {
  Node& node = nodes_[id];
  if (!node.requires_grad) return {};
  if (node.grad.empty()) node.grad.assign(node.value.size(), 0.0);
  return node.grad;
}

void Tape::backward(Var loss) {
  check_owner(loss, "backward");
  if (backward_done_) {
    throw std::logic_error("backward already ran on this tape; reset() before another pass");
  }
  const Tensor& lv = nodes_[loss.id].value;
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw std::invalid_argument("backward requires a 1x1 loss, got " + lv.shape_string());
  }
  backward_done_ = true;
  if (!nodes_[loss.id].requires_grad) return;
  grad_buffer(loss.id)[0] = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.requires_grad || node.grad.empty()) continue;
    if (node.backward) node.backward(*this, node.grad);
    if (node.param != nullptr) {
      std::span<double> dst = node.param->mutable_grad();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += node.grad[k];
    }
  }
}

std::span<const double> Tape::grad(Var v) const {
  check_owner(v, "grad");
  return nodes_[v.id].grad;
}

void Tape::reset() {
  nodes_.clear();
  backward_done_ = false;
}

}  // namespace hcmgnn::num
