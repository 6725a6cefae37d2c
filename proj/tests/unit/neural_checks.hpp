#pragma once

// Finite-difference checks of full MLP / TCN backward passes on toy shapes.
// The loss is sum(logits .* R) for a fixed random R, so every parameter gets
// an O(1) gradient and relative errors are not swamped by rounding.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "boq/grad_check.hpp"
#include "boq/mlp.hpp"
#include "boq/tcn.hpp"
#include "test_util.hpp"

namespace boq::test {

// Central differences are meaningless when a ReLU input lies within a step
// of zero. Such draws are rejected and the inputs redrawn; `redraws` says how
// often that happened.
constexpr double kKinkMargin = 1e-4;

struct NeuralCheck {
  GradCheckResult result;
  int redraws = 0;
};

inline double min_abs(const std::vector<Tensor>& tensors) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& t : tensors)
    for (double v : t.storage()) m = std::min(m, std::abs(v));
  return m;
}

// Fresh models have zero biases, which can put ReLU inputs exactly on the
// kink where central differences are meaningless, and tiny embeddings, which
// shrink some gradients below what a 1e-5 step resolves. Both are widened.
inline void widen_biases(const std::vector<Tensor*>& tensors, Rng& rng) {
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (auto* t : tensors)
    if (t->rank() == 1)
      for (auto& v : t->storage()) v = u(rng);
}

inline void widen_init(MlpModel& model, std::uint64_t seed) {
  Rng rng(seed ^ 0xb1a5);
  widen_biases(model.parameters(), rng);
}

inline void widen_init(TcnModel& model, std::uint64_t seed) {
  Rng rng(seed ^ 0xb1a5);
  widen_biases(model.all_tensors(), rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor& e = model.embedding();
  for (std::size_t i = e.dim(1); i < e.size(); ++i) e[i] = u(rng);  // row 0 stays the zero padding row
}

inline SparseVector random_sparse(std::size_t dim, std::mt19937_64& rng) {
  SparseVector v;
  v.dim = dim;
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (std::size_t i = 0; i < dim; ++i)
    if (rng() % 3 == 0) {
      v.indices.push_back(static_cast<int>(i));
      v.values.push_back(u(rng));
    }
  return v;
}

inline NeuralCheck mlp_grad_check(std::uint64_t seed) {
  MlpModel model(10, {7, 5}, 4, seed);
  widen_init(model, seed);
  NeuralCheck out;
  for (;; ++out.redraws) {
    std::mt19937_64 rng(seed * 1000 + static_cast<std::uint64_t>(out.redraws));
    std::vector<SparseVector> batch;
    for (int i = 0; i < 5; ++i) batch.push_back(random_sparse(10, rng));
    std::vector<const SparseVector*> ptrs;
    for (const auto& b : batch) ptrs.push_back(&b);
    MlpModel::Cache cache;
    model.forward(ptrs, true, 0, &cache);
    if (min_abs(cache.pre) < kKinkMargin) continue;

    Rng trng(seed + 1);
    Tensor r = random_tensor({5, 4}, trng);
    auto grads = model.backward(ptrs, cache, r);
    auto params = model.parameters();
    auto names = model.parameter_names();
    std::vector<CheckedParam> checked;
    for (std::size_t i = 0; i < params.size(); ++i) checked.push_back({names[i], params[i], grads[i]});
    out.result = grad_check([&] { return dot(model.forward(ptrs, false, 0, nullptr), r); }, checked);
    return out;
  }
}

inline TcnConfig toy_tcn_config() {
  TcnConfig c;
  c.vocab_size = 12;
  c.n_classes = 3;
  c.embed_dim = 5;
  c.filters = 4;
  c.kernel = 3;
  c.dilations = {1, 2, 4};
  c.seq_len = 11;
  c.dropout = 0.5;
  return c;
}

inline std::vector<PaddedSequence> random_sequences(const TcnConfig& c, std::size_t n, std::mt19937_64& rng) {
  std::vector<PaddedSequence> out;
  for (std::size_t i = 0; i < n; ++i) {
    PaddedSequence s;
    s.ids.assign(c.seq_len, 0);
    s.mask.assign(c.seq_len, 0);
    std::size_t len = 1 + rng() % c.seq_len;
    for (std::size_t t = 0; t < len; ++t) {
      s.ids[t] = 1 + static_cast<int>(rng() % (c.vocab_size - 1));
      s.mask[t] = 1;
    }
    out.push_back(s);
  }
  return out;
}

// With `training` the dropout masks are drawn from a fixed seed, so the loss
// is still a deterministic function of the parameters.
inline NeuralCheck tcn_grad_check(std::uint64_t seed, const TcnConfig& config, bool training) {
  TcnModel model(config, seed);
  widen_init(model, seed);
  const std::uint64_t drop_seed = seed * 31 + 7;
  NeuralCheck out;
  for (;; ++out.redraws) {
    std::mt19937_64 rng(seed * 1000 + static_cast<std::uint64_t>(out.redraws));
    auto batch = random_sequences(config, 3, rng);
    std::vector<const PaddedSequence*> ptrs;
    for (const auto& b : batch) ptrs.push_back(&b);
    TcnModel::Cache cache;
    model.forward(ptrs, training, drop_seed, &cache);
    if (min_abs(cache.pre) < kKinkMargin) continue;

    Rng trng(seed + 1);
    Tensor r = random_tensor({3, config.n_classes}, trng);
    auto grads = model.backward(ptrs, cache, r);
    auto params = model.parameters();
    auto names = model.parameter_names();
    std::vector<CheckedParam> checked;
    for (std::size_t i = 0; i < params.size(); ++i) checked.push_back({names[i], params[i], grads[i]});
    out.result = grad_check([&] { return dot(model.forward(ptrs, training, drop_seed, nullptr), r); }, checked);
    return out;
  }
}

}  // namespace boq::test
