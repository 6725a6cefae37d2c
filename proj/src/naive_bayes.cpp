#include "boq/naive_bayes.hpp"

#include <cmath>
#include <limits>

#include "boq/error.hpp"

namespace boq {

NaiveBayesModel nb_fit(const std::vector<SparseVector>& x, std::span<const int> y,
                       std::size_t n_classes, double alpha) {
  if (!(alpha > 0.0)) throw ContractError("naive Bayes alpha must be positive");
  if (x.size() != y.size()) throw ContractError("naive Bayes: X and y lengths differ");
  if (n_classes == 0) throw ContractError("naive Bayes needs at least one class");
  if (x.empty()) throw ContractError("naive Bayes needs at least one training record");
  const std::size_t dim = x.front().dim;

  std::vector<double> class_count(n_classes, 0.0);
  Tensor totals({n_classes, dim});
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& v = x[i];
    if (v.dim != dim) throw ContractError("naive Bayes: inconsistent feature dimension");
    if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= n_classes)
      throw ContractError("naive Bayes: label out of range");
    const auto c = static_cast<std::size_t>(y[i]);
    class_count[c] += 1.0;
    for (std::size_t k = 0; k < v.nnz(); ++k) {
      if (v.values[k] < 0.0) throw ContractError("naive Bayes: negative feature value");
      totals.at(c, static_cast<std::size_t>(v.indices[k])) += v.values[k];
    }
  }

  NaiveBayesModel m;
  m.alpha = alpha;
  m.class_log_prior.resize(n_classes);
  m.feature_log_prob = Tensor({n_classes, dim});
  const double n = static_cast<double>(x.size());
  for (std::size_t c = 0; c < n_classes; ++c) {
    m.class_log_prior[c] = class_count[c] > 0.0 ? std::log(class_count[c] / n)
                                                : -std::numeric_limits<double>::infinity();
    double row_total = 0.0;
    for (std::size_t t = 0; t < dim; ++t) row_total += totals.at(c, t);
    const double denom = std::log(row_total + alpha * static_cast<double>(dim));
    for (std::size_t t = 0; t < dim; ++t)
      m.feature_log_prob.at(c, t) = std::log(totals.at(c, t) + alpha) - denom;
  }
  return m;
}

std::vector<double> nb_scores(const NaiveBayesModel& model, const SparseVector& x) {
  if (x.dim != model.n_features())
    throw ContractError("naive Bayes: feature dimension " + std::to_string(x.dim) + " != " +
                        std::to_string(model.n_features()));
  std::vector<double> s = model.class_log_prior;
  for (std::size_t c = 0; c < s.size(); ++c) {
    if (std::isinf(s[c])) continue;
    for (std::size_t k = 0; k < x.nnz(); ++k)
      s[c] += x.values[k] * model.feature_log_prob.at(c, static_cast<std::size_t>(x.indices[k]));
  }
  return s;
}

Prediction nb_predict_one(const NaiveBayesModel& model, const SparseVector& x) {
  Prediction p;
  p.scores = nb_scores(model, x);
  p.label = argmax(p.scores);
  p.confidence = normalize_log_scores(p.scores)[static_cast<std::size_t>(p.label)];
  return p;
}

std::vector<Prediction> nb_predict(const NaiveBayesModel& model, const std::vector<SparseVector>& x) {
  std::vector<Prediction> out;
  out.reserve(x.size());
  for (const auto& v : x) out.push_back(nb_predict_one(model, v));
  return out;
}

}  // namespace boq
