#include "boq/adam.hpp"

#include <cmath>

#include "boq/error.hpp"

namespace boq {

AdamState AdamState::for_param(const Tensor& param, double lr) {
  AdamState s;
  s.m = Tensor(param.shape());
  s.v = Tensor(param.shape());
  s.lr = lr;
  return s;
}

void adam_step(Tensor& param, const Tensor& grad, AdamState& state) {
  if (!param.same_shape(grad))
    throw ContractError("adam_step: gradient shape " + shape_string(grad.shape()) +
                        " does not match parameter " + shape_string(param.shape()));
  if (state.m.empty() && param.size() != 0) {
    state.m = Tensor(param.shape());
    state.v = Tensor(param.shape());
  }
  if (!state.m.same_shape(param) || !state.v.same_shape(param))
    throw ContractError("adam_step: optimizer state shape does not match parameter");

  ++state.t;
  const double b1 = state.beta1, b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
  const double step = state.lr / c1;
  const double inv_c2 = 1.0 / c2;
  const double eps = state.eps;

  double* p = param.data();
  double* m = state.m.data();
  double* v = state.v.data();
  const double* g = grad.data();
  const std::size_t n = param.size();
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    p[i] -= step * m[i] / (std::sqrt(v[i] * inv_c2) + eps);
  }
}

}  // namespace boq
