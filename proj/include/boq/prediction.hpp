#pragma once

#include <span>
#include <vector>

namespace boq {

/// One classified record: the winning class, a confidence in [0, 1] and the
/// raw per-class scores of the model that produced it.
struct Prediction {
  int label = 0;
  double confidence = 0.0;
  std::vector<double> scores;
};

/// Index of the largest value; ties go to the lowest index. -inf entries
/// are allowed, NaN is not.
int argmax(std::span<const double> values);

/// Normalised exp(values - max); entries equal to -inf map to zero.
std::vector<double> normalize_log_scores(std::span<const double> values);

}  // namespace boq
