#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "boq/random.hpp"
#include "boq/tensor.hpp"

namespace boq {

// Forward/backward pairs for the layer set used by the MLP and the TCN.
// Backward functions return exact gradients; nothing is cached implicitly.

/// Softmax over the last axis of a [batch, C] tensor.
Tensor softmax(const Tensor& logits);

struct LossValue {
  double value = 0.0;
  Tensor grad_wrt_logits;  // (p - y) / batch
};

/// Mean categorical cross-entropy; probabilities are clamped at 1e-12.
/// Throws ContractError when a label row is not one-hot.
LossValue cross_entropy(const Tensor& probs, const Tensor& one_hot);
LossValue cross_entropy(const Tensor& probs, std::span<const int> labels);

Tensor one_hot(std::span<const int> labels, std::size_t n_classes);

// ---- affine: y = x W + b, x [n, in], W [in, out], b [out]

struct AffineGrads {
  Tensor dx, dw, db;
};
Tensor affine_forward(const Tensor& x, const Tensor& w, const Tensor& b);
AffineGrads affine_backward(const Tensor& x, const Tensor& w, const Tensor& dy);

// ---- embedding lookup: rows of table [V, D] selected by ids

Tensor embedding_forward(std::span<const int> ids, const Tensor& table);
/// Gradient w.r.t. the table; rows listed in `frozen_rows` stay zero.
Tensor embedding_backward(std::span<const int> ids, const Tensor& dy, std::size_t vocab_rows,
                          std::span<const int> frozen_rows = {});

// ---- dilated 1-D convolution, centred ("acausal") window

/// A run of consecutive rows of a packed [rows, channels] matrix that form one
/// sequence. Taps falling outside the run read zeros.
struct Segment {
  std::size_t start = 0;
  std::size_t length = 0;
};

struct ConvGrads {
  Tensor dx, dkernel, dbias;
};

/// x [rows, Cin], kernel [k, Cin, Cout], bias [Cout] -> [rows, Cout]. Output
/// rows not covered by a segment are zero. k must be odd.
Tensor conv1d_rows_forward(const Tensor& x, std::span<const Segment> segments,
                           const Tensor& kernel, const Tensor& bias, std::size_t dilation);
ConvGrads conv1d_rows_backward(const Tensor& x, std::span<const Segment> segments,
                               const Tensor& kernel, std::size_t dilation, const Tensor& dy);

/// x [batch, L, Cin] -> [batch, L, Cout], zero-padded by dilation*(k-1)/2 on
/// both sides. `lengths` (optional) marks positions >= lengths[b] as padding.
Tensor conv1d_dilated_forward(const Tensor& x, const Tensor& kernel, const Tensor& bias,
                              std::size_t dilation, std::span<const std::size_t> lengths = {});
ConvGrads conv1d_dilated_backward(const Tensor& x, const Tensor& kernel, std::size_t dilation,
                                  const Tensor& dy, std::span<const std::size_t> lengths = {});

// ---- elementwise

Tensor relu_forward(const Tensor& x);
Tensor relu_backward(const Tensor& pre_activation, const Tensor& dy);

struct DropoutResult {
  Tensor y;
  Tensor scale;  // 0 for dropped units, 1/(1-rate) for kept ones
};
/// Inverted dropout; identity when !training or rate == 0.
DropoutResult dropout_forward(const Tensor& x, double rate, bool training, Rng& rng);
DropoutResult dropout_forward(const Tensor& x, double rate, bool training, std::uint64_t seed);
Tensor dropout_backward(const DropoutResult& forward, const Tensor& dy);

// ---- pooling over time

struct PoolResult {
  Tensor y;                  // [segments, C]
  std::vector<long> source;  // argmax row per output element, -1 when empty
};
/// Max over the rows of each segment; empty segments pool to zeros.
PoolResult max_pool_rows(const Tensor& x, std::span<const Segment> segments);
Tensor max_pool_rows_backward(const PoolResult& forward, std::size_t rows, const Tensor& dy);
/// Mean over the rows of each segment; empty segments pool to zeros.
Tensor mean_pool_rows(const Tensor& x, std::span<const Segment> segments);
Tensor mean_pool_rows_backward(std::span<const Segment> segments, std::size_t rows, const Tensor& dy);

/// x [batch, L, C] with mask [batch * L] (1 = real) -> [batch, C]; masked
/// positions are ignored and an all-masked row pools to zeros.
PoolResult max_pool_over_time(const Tensor& x, std::span<const char> mask);
Tensor max_pool_over_time_backward(const PoolResult& forward, const std::vector<std::size_t>& x_shape,
                                   const Tensor& dy);

}  // namespace boq
