#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "boq/layers.hpp"
#include "boq/tensor.hpp"
#include "boq/vocabulary.hpp"

namespace boq {

enum class Pooling { max, mean };
std::string to_string(Pooling p);
Pooling parse_pooling(std::string_view text);

struct TcnConfig {
  std::size_t vocab_size = 0;  // including the padding and unknown ids
  std::size_t n_classes = 0;
  std::size_t embed_dim = 300;
  std::size_t filters = 100;
  std::size_t kernel = 3;
  /// Dilation of each conv layer, first entry being the initial conv.
  std::vector<std::size_t> dilations{1, 2, 4};
  bool residual = true;
  Pooling pooling = Pooling::max;
  double dropout = 0.5;
  bool train_embedding = true;
  std::size_t seq_len = 160;

  /// Positions on either side an output can see: sum of d * (k - 1) / 2.
  std::size_t receptive_radius() const;
  nlohmann::json to_json() const;
  static TcnConfig from_json(const nlohmann::json& j);
};

/// Named dilation schedules: "exp" = 1,2,4 and "linear" = 1,1,2.
std::vector<std::size_t> dilation_schedule(std::string_view name);

/// Embedding -> stack of acausal dilated conv blocks -> pooling over the
/// real tokens -> affine head. Each block computes
///   y = dropout(relu(conv(x))) + residual(x)
/// with the residual an identity, or a 1x1 projection when channel counts
/// differ. Padding positions never enter the computation: every layer runs
/// only over the real tokens of each sequence and taps past either end read
/// zeros, which is the same as zero-padding the activations.
class TcnModel {
 public:
  using Input = PaddedSequence;

  struct Block {
    Tensor kernel, bias;            // [k, Cin, Cout], [Cout]
    Tensor proj_w, proj_b;          // [Cin, Cout], [Cout]; empty for identity
    std::size_t dilation = 1;
    bool has_projection() const { return !proj_w.empty(); }
  };

  struct Cache {
    std::vector<int> ids;
    std::vector<Segment> segments;
    std::vector<Tensor> inputs;   // input of each block; inputs[0] is the embedded batch
    std::vector<Tensor> pre;      // conv output before ReLU
    std::vector<DropoutResult> drop;
    Tensor features;              // output of the last block
    PoolResult pooled;
  };

  TcnModel() = default;
  /// Glorot-uniform conv/dense weights, uniform(-0.05, 0.05) embeddings,
  /// padding row zero.
  TcnModel(const TcnConfig& config, std::uint64_t seed);

  const TcnConfig& config() const noexcept { return config_; }
  std::size_t n_classes() const noexcept { return config_.n_classes; }

  Tensor& embedding() noexcept { return embedding_; }
  const Tensor& embedding() const noexcept { return embedding_; }
  std::vector<Block>& blocks() noexcept { return blocks_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }

  /// Trainable tensors; the embedding is left out when it is frozen.
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::vector<std::string> parameter_names() const;
  /// Every stored tensor, trainable or not, for serialisation.
  std::vector<Tensor*> all_tensors();
  std::vector<const Tensor*> all_tensors() const;
  std::vector<std::string> all_tensor_names() const;
  /// Weights of the conv blocks including projections.
  std::size_t conv_parameter_count() const;

  Tensor forward(const std::vector<const PaddedSequence*>& batch, bool training, std::uint64_t seed,
                 Cache* cache) const;
  /// Gradients aligned with parameters().
  std::vector<Tensor> backward(const std::vector<const PaddedSequence*>& batch, const Cache& cache,
                               const Tensor& dlogits) const;

  /// Per-position output of the last block for one sequence, [real_len, filters].
  Tensor position_features(const PaddedSequence& seq) const;

 private:
  TcnConfig config_;
  Tensor embedding_;  // [V, D]
  std::vector<Block> blocks_;
  Tensor head_w_, head_b_;
};

/// Logits for a batch of sequences (evaluation mode).
Tensor tcn_forward(const TcnModel& model, const std::vector<PaddedSequence>& batch);

}  // namespace boq
