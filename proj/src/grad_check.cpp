#include "boq/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "boq/error.hpp"

namespace boq {

double relative_error(double analytic, double numeric) {
  double scale = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
  return std::fabs(analytic - numeric) / scale;
}

GradCheckResult grad_check(const std::function<double()>& loss, std::vector<CheckedParam>& params,
                           double epsilon, std::size_t max_per_param) {
  if (!(epsilon > 0.0)) throw ContractError("grad_check epsilon must be positive");
  GradCheckResult result;
  for (auto& p : params) {
    if (p.value == nullptr || !p.value->same_shape(p.analytic))
      throw ContractError("grad_check: analytic gradient shape mismatch for " + p.name);
    const std::size_t n = p.value->size();
    std::size_t stride = 1;
    if (max_per_param > 0 && n > max_per_param) stride = (n + max_per_param - 1) / max_per_param;
    for (std::size_t i = 0; i < n; i += stride) {
      double& x = (*p.value)[i];
      const double saved = x;
      x = saved + epsilon;
      const double up = loss();
      x = saved - epsilon;
      const double down = loss();
      x = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double err = relative_error(p.analytic[i], numeric);
      ++result.checked;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_param = p.name;
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace boq
