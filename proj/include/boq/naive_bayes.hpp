#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "boq/prediction.hpp"
#include "boq/tensor.hpp"
#include "boq/vocabulary.hpp"

namespace boq {

/// Multinomial Naive Bayes over nonnegative (possibly fractional) weights.
struct NaiveBayesModel {
  std::vector<double> class_log_prior;  // -inf for classes without samples
  Tensor feature_log_prob;              // [C, |V|]
  double alpha = 1.0;

  std::size_t n_classes() const noexcept { return class_log_prior.size(); }
  std::size_t n_features() const { return feature_log_prob.rank() == 2 ? feature_log_prob.dim(1) : 0; }
};

NaiveBayesModel nb_fit(const std::vector<SparseVector>& x, std::span<const int> y,
                       std::size_t n_classes, double alpha = 1.0);

/// Joint log-likelihood per class: log prior + sum_t x_t log P(t | c).
std::vector<double> nb_scores(const NaiveBayesModel& model, const SparseVector& x);

/// Argmax of the joint log-likelihood; confidence is the normalised posterior.
Prediction nb_predict_one(const NaiveBayesModel& model, const SparseVector& x);
std::vector<Prediction> nb_predict(const NaiveBayesModel& model, const std::vector<SparseVector>& x);

}  // namespace boq
