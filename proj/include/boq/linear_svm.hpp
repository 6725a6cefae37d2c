#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "boq/prediction.hpp"
#include "boq/tensor.hpp"
#include "boq/vocabulary.hpp"

namespace boq {

struct SvmParams {
  double reg_lambda = 1e-4;
  int epochs = 10;
  std::uint64_t seed = 7;
  /// Evaluate the primal objective after every epoch (one extra data pass).
  bool record_objective = false;
};

/// One-vs-rest linear SVM.
struct LinearSvmModel {
  Tensor weights;            // [C, |V|]
  std::vector<double> bias;  // [C]
  double reg_lambda = 0.0;
  std::vector<double> objective_history;

  std::size_t n_classes() const noexcept { return bias.size(); }
  std::size_t n_features() const { return weights.rank() == 2 ? weights.dim(1) : 0; }
};

/// Pegasos-style SGD on the hinge loss, step 1/(lambda t) (1/t when lambda
/// is zero), visiting records in a seeded per-epoch shuffle. The bias is an
/// extra constant-one feature so it shares the regulariser.
LinearSvmModel svm_fit(const std::vector<SparseVector>& x, std::span<const int> y,
                       std::size_t n_classes, const SvmParams& params = {});

std::vector<double> svm_margins(const LinearSvmModel& model, const SparseVector& x);

/// lambda/2 * sum_c |w_c|^2 + mean over records of the summed per-class hinge.
double svm_objective(const LinearSvmModel& model, const std::vector<SparseVector>& x,
                     std::span<const int> y);

/// Argmax margin; confidence is the softmax of the margins.
Prediction svm_predict_one(const LinearSvmModel& model, const SparseVector& x);
std::vector<Prediction> svm_predict(const LinearSvmModel& model, const std::vector<SparseVector>& x);

}  // namespace boq
