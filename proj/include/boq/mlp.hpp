#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "boq/random.hpp"
#include "boq/tensor.hpp"
#include "boq/vocabulary.hpp"

namespace boq {

/// Dense feed-forward classifier over bag-of-words vectors:
/// |V| -> hidden... -> C with ReLU between layers and no dropout.
class MlpModel {
 public:
  using Input = SparseVector;

  struct Cache {
    std::vector<Tensor> pre;  // pre-activation of each hidden layer
    std::vector<Tensor> act;  // ReLU outputs
  };

  MlpModel() = default;
  /// Glorot-uniform weights, zero biases.
  MlpModel(std::size_t input_dim, std::vector<std::size_t> hidden, std::size_t n_classes,
           std::uint64_t seed);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t n_classes() const noexcept { return n_classes_; }
  const std::vector<std::size_t>& hidden() const noexcept { return hidden_; }

  /// W0, b0, W1, b1, ... in layer order.
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::vector<std::string> parameter_names() const;
  std::size_t parameter_count() const;

  Tensor forward(const std::vector<const SparseVector*>& batch, bool training, std::uint64_t seed,
                 Cache* cache) const;
  /// Gradients aligned with parameters().
  std::vector<Tensor> backward(const std::vector<const SparseVector*>& batch, const Cache& cache,
                               const Tensor& dlogits) const;

 private:
  std::size_t input_dim_ = 0;
  std::size_t n_classes_ = 0;
  std::vector<std::size_t> hidden_;
  std::vector<Tensor> weights_;
  std::vector<Tensor> biases_;
};

/// Logits for a batch of bag-of-words vectors.
Tensor mlp_forward(const MlpModel& model, const std::vector<SparseVector>& batch);

/// Glorot/Xavier uniform initialisation with the given fans.
Tensor glorot_uniform(std::vector<std::size_t> shape, std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace boq
