#include "hcmgnn/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace hcmgnn::num {
namespace {

double evaluate(const ScalarFn& f) {
  Tape tape(/*record_grad=*/false);
  return f(tape).value().item();
}

}  // namespace

GradCheckReport grad_check(const ScalarFn& f, const std::vector<NamedParam>& params,
                           GradCheckOptions options) {
  GradCheckReport report;
  report.tolerance = options.tolerance;

  std::vector<bool> had_flag;
  for (const NamedParam& p : params) {
    had_flag.push_back(p.tensor->requires_grad());
    p.tensor->set_requires_grad(true);
    p.tensor->zero_grad();
  }
  {
    Tape tape;
    Var loss = f(tape);
    tape.backward(loss);
  }
  const double f0 = evaluate(f);
  const double h = options.step;

  for (const NamedParam& p : params) {
    Tensor& t = *p.tensor;
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double saved = t[i];
      t[i] = saved + h;
      const double fp = evaluate(f);
      t[i] = saved - h;
      const double fm = evaluate(f);
      t[i] = saved;

      CoordCheck c;
      c.param = p.name;
      c.index = i;
      c.analytic = analytic[i];
      c.numeric = (fp - fm) / (2.0 * h);
      if (!std::isfinite(fp) || !std::isfinite(fm) || !std::isfinite(c.analytic)) {
        c.status = CoordStatus::kNonFinite;
        c.rel_error = INFINITY;
        ++report.non_finite;
        report.coords.push_back(c);
        continue;
      }
      const double forward = (fp - f0) / h;
      const double backward = (f0 - fm) / h;
      const double slope_scale = std::max({1.0, std::abs(forward), std::abs(backward)});
      if (std::abs(forward - backward) > options.kink_threshold * slope_scale) {
        c.status = CoordStatus::kKink;
        ++report.kinks;
        report.coords.push_back(c);
        continue;
      }
      const double denom = std::max({std::abs(c.analytic), std::abs(c.numeric), options.floor});
      c.rel_error = std::abs(c.analytic - c.numeric) / denom;
      report.max_rel_error = std::max(report.max_rel_error, c.rel_error);
      ++report.checked;
      report.coords.push_back(c);
    }
  }

  for (std::size_t k = 0; k < params.size(); ++k) {
    params[k].tensor->set_requires_grad(had_flag[k]);
  }
  return report;
}

GradCheckReport grad_check(const std::function<Var(Tape&, Var)>& f, const Tensor& x,
                           GradCheckOptions options) {
  Tensor input = x;
  input.set_requires_grad(true);
  ScalarFn wrapped = [&](Tape& tape) { return f(tape, tape.param(input)); };
  return grad_check(wrapped, {NamedParam{"x", &input}}, options);
}

}  // namespace hcmgnn::num
