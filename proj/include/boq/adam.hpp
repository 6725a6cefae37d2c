#pragma once

#include <cstdint>

#include "boq/tensor.hpp"

namespace boq {

/// First/second moment estimates for one parameter tensor.
struct AdamState {
  Tensor m;
  Tensor v;
  std::int64_t t = 0;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_param(const Tensor& param, double lr = 0.01);
};

/// One bias-corrected Adam update of `param` in place; increments state.t.
/// Throws ContractError on a shape mismatch.
void adam_step(Tensor& param, const Tensor& grad, AdamState& state);

}  // namespace boq
