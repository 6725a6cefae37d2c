#include "boq/mlp.hpp"

#include <cmath>

#include "boq/error.hpp"
#include "boq/layers.hpp"
#include "eigen_view.hpp"

namespace boq {

Tensor glorot_uniform(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> u(-limit, limit);
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = u(rng);
  return t;
}

MlpModel::MlpModel(std::size_t input_dim, std::vector<std::size_t> hidden, std::size_t n_classes,
                   std::uint64_t seed)
    : input_dim_(input_dim), n_classes_(n_classes), hidden_(std::move(hidden)) {
  if (input_dim == 0 || n_classes == 0) throw ContractError("MLP needs a positive input and output width");
  std::vector<std::size_t> widths{input_dim_};
  widths.insert(widths.end(), hidden_.begin(), hidden_.end());
  widths.push_back(n_classes_);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    if (widths[l + 1] == 0) throw ContractError("MLP layer width must be positive");
    Rng rng = make_rng(seed, l);
    weights_.push_back(glorot_uniform({widths[l], widths[l + 1]}, widths[l], widths[l + 1], rng));
    biases_.emplace_back(std::vector<std::size_t>{widths[l + 1]});
  }
}

std::vector<Tensor*> MlpModel::parameters() {
  std::vector<Tensor*> p;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    p.push_back(&weights_[l]);
    p.push_back(&biases_[l]);
  }
  return p;
}

std::vector<const Tensor*> MlpModel::parameters() const {
  std::vector<const Tensor*> p;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    p.push_back(&weights_[l]);
    p.push_back(&biases_[l]);
  }
  return p;
}

std::vector<std::string> MlpModel::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    names.push_back("dense" + std::to_string(l) + ".w");
    names.push_back("dense" + std::to_string(l) + ".b");
  }
  return names;
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->size();
  return n;
}

Tensor MlpModel::forward(const std::vector<const SparseVector*>& batch, bool, std::uint64_t,
                         Cache* cache) const {
  if (weights_.empty()) throw ContractError("MLP is not initialised");
  const std::size_t n = batch.size();
  const std::size_t h0 = weights_[0].dim(1);
  // First layer straight from the sparse input.
  Tensor pre({n, h0});
  {
    auto out = detail::as_matrix(pre, n, h0);
    auto w = detail::as_matrix(weights_[0], input_dim_, h0);
    out.rowwise() = detail::as_row(biases_[0]);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& x = *batch[i];
      if (x.dim != input_dim_)
        throw ContractError("MLP input dimension " + std::to_string(x.dim) + " != " + std::to_string(input_dim_));
      for (std::size_t k = 0; k < x.nnz(); ++k)
        out.row(static_cast<Eigen::Index>(i)) += x.values[k] * w.row(x.indices[k]);
    }
  }
  Cache local;
  Cache& c = cache ? *cache : local;
  c.pre.clear();
  c.act.clear();
  if (weights_.size() == 1) return pre;  // no hidden layer
  c.pre.push_back(pre);
  c.act.push_back(relu_forward(pre));
  for (std::size_t l = 1; l < weights_.size(); ++l) {
    Tensor z = affine_forward(c.act.back(), weights_[l], biases_[l]);
    if (l + 1 == weights_.size()) return z;
    c.pre.push_back(z);
    c.act.push_back(relu_forward(z));
  }
  return {};
}

std::vector<Tensor> MlpModel::backward(const std::vector<const SparseVector*>& batch, const Cache& cache,
                                       const Tensor& dlogits) const {
  const std::size_t layers = weights_.size();
  std::vector<Tensor> grads(2 * layers);
  Tensor d = dlogits;
  for (std::size_t l = layers; l-- > 1;) {
    AffineGrads g = affine_backward(cache.act[l - 1], weights_[l], d);
    grads[2 * l] = std::move(g.dw);
    grads[2 * l + 1] = std::move(g.db);
    d = relu_backward(cache.pre[l - 1], g.dx);
  }
  const std::size_t h0 = weights_[0].dim(1);
  Tensor dw({input_dim_, h0});
  Tensor db({h0});
  auto dwm = detail::as_matrix(dw, input_dim_, h0);
  auto dm = detail::as_matrix(d, batch.size(), h0);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& x = *batch[i];
    for (std::size_t k = 0; k < x.nnz(); ++k) dwm.row(x.indices[k]) += x.values[k] * dm.row(static_cast<Eigen::Index>(i));
  }
  detail::as_row(db) = dm.colwise().sum();
  grads[0] = std::move(dw);
  grads[1] = std::move(db);
  return grads;
}

Tensor mlp_forward(const MlpModel& model, const std::vector<SparseVector>& batch) {
  std::vector<const SparseVector*> ptrs;
  for (const auto& v : batch) ptrs.push_back(&v);
  return model.forward(ptrs, false, 0, nullptr);
}

}  // namespace boq
