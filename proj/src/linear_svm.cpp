#include "boq/linear_svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "boq/error.hpp"
#include "boq/random.hpp"

namespace boq {

namespace {

// w = scale * v, with the bias stored as the last coordinate of v.
struct ScaledVector {
  std::vector<double> v;
  double scale = 1.0;
  double norm_sq = 0.0;  // of v

  explicit ScaledVector(std::size_t dim) : v(dim + 1, 0.0) {}

  double dot(const SparseVector& x) const {
    double s = v.back();
    for (std::size_t k = 0; k < x.nnz(); ++k) s += v[static_cast<std::size_t>(x.indices[k])] * x.values[k];
    return scale * s;
  }

  void shrink(double factor) {
    if (factor <= 0.0) {
      std::fill(v.begin(), v.end(), 0.0);
      scale = 1.0;
      norm_sq = 0.0;
      return;
    }
    scale *= factor;
    if (scale < 1e-9) {
      for (double& e : v) e *= scale;
      norm_sq *= scale * scale;
      scale = 1.0;
    }
  }

  // w += a * [x, 1]
  void add(const SparseVector& x, double a) {
    const double step = a / scale;
    double vx = v.back();
    double xx = 1.0;
    for (std::size_t k = 0; k < x.nnz(); ++k) {
      vx += v[static_cast<std::size_t>(x.indices[k])] * x.values[k];
      xx += x.values[k] * x.values[k];
    }
    for (std::size_t k = 0; k < x.nnz(); ++k) v[static_cast<std::size_t>(x.indices[k])] += step * x.values[k];
    v.back() += step;
    norm_sq += 2.0 * step * vx + step * step * xx;
    norm_sq = std::max(norm_sq, 0.0);
  }

  double norm() const { return scale * std::sqrt(norm_sq); }
};

}  // namespace

LinearSvmModel svm_fit(const std::vector<SparseVector>& x, std::span<const int> y,
                       std::size_t n_classes, const SvmParams& params) {
  if (!(params.reg_lambda >= 0.0)) throw ContractError("SVM reg_lambda must be nonnegative");
  if (params.epochs < 1) throw ContractError("SVM epochs must be at least 1");
  if (x.size() != y.size()) throw ContractError("SVM: X and y lengths differ");
  if (x.empty() || n_classes == 0) throw ContractError("SVM needs records and classes");
  const std::size_t dim = x.front().dim;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].dim != dim) throw ContractError("SVM: inconsistent feature dimension");
    if (y[i] < 0 || static_cast<std::size_t>(y[i]) >= n_classes) throw ContractError("SVM: label out of range");
  }

  const double lambda = params.reg_lambda;
  const double radius = lambda > 0.0 ? 1.0 / std::sqrt(lambda) : 0.0;
  std::vector<ScaledVector> w(n_classes, ScaledVector(dim));
  std::vector<std::size_t> order(x.size());

  LinearSvmModel model;
  model.reg_lambda = lambda;
  auto export_weights = [&] {
    model.weights = Tensor({n_classes, dim});
    model.bias.assign(n_classes, 0.0);
    for (std::size_t c = 0; c < n_classes; ++c) {
      for (std::size_t t = 0; t < dim; ++t) model.weights.at(c, t) = w[c].scale * w[c].v[t];
      model.bias[c] = w[c].scale * w[c].v.back();
    }
  };

  double t = 0.0;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(params.seed, static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      t += 1.0;
      const double eta = lambda > 0.0 ? 1.0 / (lambda * t) : 1.0 / t;
      for (std::size_t c = 0; c < n_classes; ++c) {
        const double target = y[i] == static_cast<int>(c) ? 1.0 : -1.0;
        const double margin = target * w[c].dot(x[i]);
        if (lambda > 0.0) w[c].shrink(1.0 - eta * lambda);
        if (margin < 1.0) w[c].add(x[i], eta * target);
        if (lambda > 0.0) {
          double nrm = w[c].norm();
          if (nrm > radius) w[c].shrink(radius / nrm);
        }
      }
    }
    if (params.record_objective) {
      export_weights();
      model.objective_history.push_back(svm_objective(model, x, y));
    }
  }
  export_weights();
  return model;
}

std::vector<double> svm_margins(const LinearSvmModel& model, const SparseVector& x) {
  if (x.dim != model.n_features()) throw ContractError("SVM: feature dimension mismatch");
  std::vector<double> m = model.bias;
  for (std::size_t c = 0; c < m.size(); ++c)
    for (std::size_t k = 0; k < x.nnz(); ++k)
      m[c] += model.weights.at(c, static_cast<std::size_t>(x.indices[k])) * x.values[k];
  return m;
}

double svm_objective(const LinearSvmModel& model, const std::vector<SparseVector>& x,
                     std::span<const int> y) {
  double reg = 0.0;
  for (std::size_t c = 0; c < model.n_classes(); ++c) {
    for (std::size_t t = 0; t < model.n_features(); ++t) reg += model.weights.at(c, t) * model.weights.at(c, t);
    reg += model.bias[c] * model.bias[c];
  }
  double hinge = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto m = svm_margins(model, x[i]);
    for (std::size_t c = 0; c < m.size(); ++c) {
      double target = y[i] == static_cast<int>(c) ? 1.0 : -1.0;
      hinge += std::max(0.0, 1.0 - target * m[c]);
    }
  }
  return 0.5 * model.reg_lambda * reg + (x.empty() ? 0.0 : hinge / static_cast<double>(x.size()));
}

Prediction svm_predict_one(const LinearSvmModel& model, const SparseVector& x) {
  Prediction p;
  p.scores = svm_margins(model, x);
  p.label = argmax(p.scores);
  p.confidence = normalize_log_scores(p.scores)[static_cast<std::size_t>(p.label)];
  return p;
}

std::vector<Prediction> svm_predict(const LinearSvmModel& model, const std::vector<SparseVector>& x) {
  std::vector<Prediction> out;
  out.reserve(x.size());
  for (const auto& v : x) out.push_back(svm_predict_one(model, v));
  return out;
}

}  // namespace boq
