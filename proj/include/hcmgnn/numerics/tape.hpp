#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "hcmgnn/numerics/tensor.hpp"

namespace hcmgnn::num {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the
/// tape is alive and has not been reset.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Define-by-run gradient tape. Every primitive appends one node whose inputs
/// were recorded earlier, so record order is a topological order and the
/// reverse sweep in backward() visits each node exactly once.
///
/// A tape is single-threaded. Concurrent evaluations each own a tape.
class Tape {
 public:
  // Upstream gradient of the node's output (same length as its value).
  using BackwardFn = std::function<void(Tape&, std::span<const double> upstream)>;

  explicit Tape(bool record_grad = true) : record_grad_(record_grad) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Binds a learnable tensor. After backward() its gradient is accumulated
  // into param.mutable_grad(); `param` must outlive the tape.
  Var param(Tensor& param);

  const Tensor& value(Var v) const;
  std::size_t size() const { return nodes_.size(); }
  bool records_grad() const { return record_grad_; }
  bool backward_done() const { return backward_done_; }

  // Reverse sweep from a 1x1 loss. Rejected for non-scalar losses and when a
  // sweep already ran on this tape (call reset() to start a new pass).
  void backward(Var loss);
  void reset();

  // Gradient w.r.t. any recorded node; populated only after backward().
  std::span<const double> grad(Var v) const;

  // Primitive implementation interface.
  Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn);
  bool needs_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  // Accumulation buffer of an input, or an empty span when the input does
  // not require a gradient.
  std::span<double> grad_buffer(std::size_t id);
  void check_owner(Var v, const char* op) const;

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    Tensor* param = nullptr;
    bool requires_grad = false;
  };

  std::vector<Node> nodes_;
  bool record_grad_;
  bool backward_done_ = false;
};

}  // namespace hcmgnn::num
