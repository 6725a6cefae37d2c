#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "boq/tensor.hpp"

namespace boq {

/// A parameter to perturb together with the analytic gradient to compare
/// against. The loss closure must read the parameter through `value`.
struct CheckedParam {
  std::string name;
  Tensor* value = nullptr;
  Tensor analytic;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

/// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

/// Central differences with step `epsilon` over every element (or, when
/// `max_per_param` > 0, an evenly strided subset) of every parameter.
GradCheckResult grad_check(const std::function<double()>& loss, std::vector<CheckedParam>& params,
                           double epsilon = 1e-5, std::size_t max_per_param = 0);

}  // namespace boq
