#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "hcmgnn/numerics/adam.hpp"
#include "hcmgnn/numerics/tape.hpp"

namespace hcmgnn::num {

// Builds a scalar on the given tape, reading learnable tensors via tape.param.
using ScalarFn = std::function<Var(Tape&)>;

enum class CoordStatus { kOk, kKink, kNonFinite };

struct CoordCheck {
  std::string param;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
  CoordStatus status = CoordStatus::kOk;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  std::size_t checked = 0;
  std::size_t kinks = 0;
  std::size_t non_finite = 0;
  std::vector<CoordCheck> coords;

  // Non-finite coordinates fail the check; kinks are excluded from it.
  bool passed() const { return non_finite == 0 && max_rel_error <= tolerance; }
};

struct GradCheckOptions {
  double step = 1e-6;
  double tolerance = 1e-4;
  // Relative error is |a - n| / max(|a|, |n|, floor) so that near-zero
  // gradients are compared on an absolute scale.
  double floor = 1e-4;
  // One-sided slopes differing by more than this (relative) mark a kink.
  double kink_threshold = 1e-3;
};

/// Compares reverse-mode gradients of `f` with central differences over every
/// coordinate of `params`. Parameters are perturbed in place and restored.
GradCheckReport grad_check(const ScalarFn& f, const std::vector<NamedParam>& params,
                           GradCheckOptions options = {});

/// Single-input form: f receives x bound on the tape.
GradCheckReport grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x,
                           GradCheckOptions options = {});

}  // namespace hcmgnn::num
