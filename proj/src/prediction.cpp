#include "boq/prediction.hpp"

#include <cmath>
#include <limits>

#include "boq/error.hpp"

namespace boq {

int argmax(std::span<const double> values) {
  if (values.empty()) throw ContractError("argmax of an empty score vector");
  int best = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isnan(values[i])) throw NumericError("NaN score");
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

std::vector<double> normalize_log_scores(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const double mx = values[static_cast<std::size_t>(argmax(values))];
  if (!std::isfinite(mx)) throw NumericError("no finite class score");
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::isinf(values[i]) ? 0.0 : std::exp(values[i] - mx);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace boq
