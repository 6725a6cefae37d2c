#include "boq/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "boq/error.hpp"
#include "eigen_view.hpp"

namespace boq {

using detail::as_matrix;
using detail::as_row;
using detail::RowMatrix;

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ContractError(what);
}

constexpr double kProbFloor = 1e-12;

}  // namespace

Tensor softmax(const Tensor& logits) {
  require(logits.rank() == 2, "softmax expects [batch, C]");
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  require(c >= 1, "softmax needs at least one class");
  if (!logits.all_finite()) throw NumericError("softmax received non-finite logits");
  Tensor out(logits.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = logits.data() + i * c;
    double* o = out.data() + i * c;
    double mx = *std::max_element(row, row + c);
    double sum = 0.0;
    for (std::size_t j = 0; j < c; ++j) sum += (o[j] = std::exp(row[j] - mx));
    for (std::size_t j = 0; j < c; ++j) o[j] /= sum;
  }
  return out;
}

Tensor one_hot(std::span<const int> labels, std::size_t n_classes) {
  Tensor y({labels.size(), n_classes});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < n_classes,
            "label out of range for one-hot encoding");
    y.at(i, static_cast<std::size_t>(labels[i])) = 1.0;
  }
  return y;
}

LossValue cross_entropy(const Tensor& probs, const Tensor& labels) {
  require(probs.rank() == 2 && probs.same_shape(labels), "cross_entropy shape mismatch");
  const std::size_t n = probs.dim(0), c = probs.dim(1);
  LossValue out;
  out.grad_wrt_logits = Tensor(probs.shape());
  if (n == 0) return out;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    int hot = -1;
    for (std::size_t j = 0; j < c; ++j) {
      double y = labels.at(i, j);
      if (y == 1.0 && hot < 0) {
        hot = static_cast<int>(j);
      } else if (y != 0.0) {
        throw ContractError("cross_entropy label row " + std::to_string(i) + " is not one-hot");
      }
    }
    if (hot < 0) throw ContractError("cross_entropy label row " + std::to_string(i) + " is empty");
    total -= std::log(std::max(probs.at(i, static_cast<std::size_t>(hot)), kProbFloor));
    for (std::size_t j = 0; j < c; ++j)
      out.grad_wrt_logits.at(i, j) = (probs.at(i, j) - labels.at(i, j)) / static_cast<double>(n);
  }
  out.value = total / static_cast<double>(n);
  return out;
}

LossValue cross_entropy(const Tensor& probs, std::span<const int> labels) {
  require(probs.rank() == 2 && probs.dim(0) == labels.size(), "cross_entropy shape mismatch");
  return cross_entropy(probs, one_hot(labels, probs.dim(1)));
}

Tensor affine_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
  require(x.rank() == 2 && w.rank() == 2 && b.rank() == 1, "affine expects x[n,in], W[in,out], b[out]");
  require(x.dim(1) == w.dim(0) && w.dim(1) == b.dim(0), "affine dimension mismatch");
  const std::size_t n = x.dim(0), in = w.dim(0), out = w.dim(1);
  Tensor y({n, out});
  auto Y = as_matrix(y, n, out);
  Y.noalias() = as_matrix(x, n, in) * as_matrix(w, in, out);
  Y.rowwise() += as_row(b);
  return y;
}

AffineGrads affine_backward(const Tensor& x, const Tensor& w, const Tensor& dy) {
  require(x.rank() == 2 && w.rank() == 2 && dy.rank() == 2, "affine_backward rank mismatch");
  const std::size_t n = x.dim(0), in = w.dim(0), out = w.dim(1);
  require(x.dim(1) == in && dy.dim(0) == n && dy.dim(1) == out, "affine_backward shape mismatch");
  AffineGrads g{Tensor({n, in}), Tensor({in, out}), Tensor({out})};
  auto DY = as_matrix(dy, n, out);
  as_matrix(g.dx, n, in).noalias() = DY * as_matrix(w, in, out).transpose();
  as_matrix(g.dw, in, out).noalias() = as_matrix(x, n, in).transpose() * DY;
  as_row(g.db) = DY.colwise().sum();
  return g;
}

Tensor embedding_forward(std::span<const int> ids, const Tensor& table) {
  require(table.rank() == 2, "embedding table must be [V, D]");
  const std::size_t v = table.dim(0), d = table.dim(1);
  Tensor out({ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] >= 0 && static_cast<std::size_t>(ids[i]) < v, "embedding id out of range");
    std::copy_n(table.data() + static_cast<std::size_t>(ids[i]) * d, d, out.data() + i * d);
  }
  return out;
}

Tensor embedding_backward(std::span<const int> ids, const Tensor& dy, std::size_t vocab_rows,
                          std::span<const int> frozen_rows) {
  require(dy.rank() == 2 && dy.dim(0) == ids.size(), "embedding_backward shape mismatch");
  const std::size_t d = dy.dim(1);
  Tensor grad({vocab_rows, d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] >= 0 && static_cast<std::size_t>(ids[i]) < vocab_rows, "embedding id out of range");
    double* row = grad.data() + static_cast<std::size_t>(ids[i]) * d;
    const double* src = dy.data() + i * d;
    for (std::size_t k = 0; k < d; ++k) row[k] += src[k];
  }
  for (int r : frozen_rows) std::fill_n(grad.data() + static_cast<std::size_t>(r) * d, d, 0.0);
  return grad;
}

namespace {

struct ConvShape {
  std::size_t taps, cin, cout, half, dilation;
};

ConvShape conv_shape(const Tensor& kernel, std::size_t dilation) {
  require(kernel.rank() == 3, "conv kernel must be [k, Cin, Cout]");
  const std::size_t k = kernel.dim(0);
  if (k % 2 == 0) throw ContractError("conv kernel size must be odd for a centred window");
  require(dilation >= 1, "conv dilation must be at least 1");
  return {k, kernel.dim(1), kernel.dim(2), (k - 1) / 2, dilation};
}

// im2col over the rows covered by `segments`, in segment order.
RowMatrix gather_columns(const Tensor& x, std::span<const Segment> segments, const ConvShape& s,
                         std::size_t total) {
  RowMatrix col = RowMatrix::Zero(static_cast<Eigen::Index>(total),
                                  static_cast<Eigen::Index>(s.taps * s.cin));
  Eigen::Index r = 0;
  for (const auto& seg : segments) {
    const auto len = static_cast<long>(seg.length);
    for (long t = 0; t < len; ++t, ++r) {
      for (std::size_t j = 0; j < s.taps; ++j) {
        long src = t + (static_cast<long>(j) - static_cast<long>(s.half)) * static_cast<long>(s.dilation);
        if (src < 0 || src >= len) continue;
        const double* from = x.data() + (seg.start + static_cast<std::size_t>(src)) * s.cin;
        std::copy_n(from, s.cin, col.row(r).data() + j * s.cin);
      }
    }
  }
  return col;
}

std::size_t covered_rows(std::span<const Segment> segments, std::size_t rows) {
  std::size_t total = 0;
  for (const auto& seg : segments) {
    require(seg.start + seg.length <= rows, "conv segment exceeds input rows");
    total += seg.length;
  }
  return total;
}

}  // namespace

Tensor conv1d_rows_forward(const Tensor& x, std::span<const Segment> segments, const Tensor& kernel,
                           const Tensor& bias, std::size_t dilation) {
  const ConvShape s = conv_shape(kernel, dilation);
  require(x.rank() == 2 && x.dim(1) == s.cin, "conv input must be [rows, Cin]");
  require(bias.rank() == 1 && bias.dim(0) == s.cout, "conv bias must be [Cout]");
  const std::size_t rows = x.dim(0);
  const std::size_t total = covered_rows(segments, rows);

  RowMatrix col = gather_columns(x, segments, s, total);
  RowMatrix y = col * as_matrix(kernel, s.taps * s.cin, s.cout);
  y.rowwise() += as_row(bias);

  Tensor out({rows, s.cout});
  Eigen::Index r = 0;
  for (const auto& seg : segments)
    for (std::size_t t = 0; t < seg.length; ++t, ++r)
      std::copy_n(y.row(r).data(), s.cout, out.data() + (seg.start + t) * s.cout);
  return out;
}

ConvGrads conv1d_rows_backward(const Tensor& x, std::span<const Segment> segments,
                               const Tensor& kernel, std::size_t dilation, const Tensor& dy) {
  const ConvShape s = conv_shape(kernel, dilation);
  require(x.rank() == 2 && x.dim(1) == s.cin, "conv input must be [rows, Cin]");
  const std::size_t rows = x.dim(0);
  require(dy.rank() == 2 && dy.dim(0) == rows && dy.dim(1) == s.cout, "conv dy shape mismatch");
  const std::size_t total = covered_rows(segments, rows);

  RowMatrix g(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(s.cout));
  {
    Eigen::Index r = 0;
    for (const auto& seg : segments)
      for (std::size_t t = 0; t < seg.length; ++t, ++r)
        std::copy_n(dy.data() + (seg.start + t) * s.cout, s.cout, g.row(r).data());
  }
  RowMatrix col = gather_columns(x, segments, s, total);

  ConvGrads out{Tensor({rows, s.cin}), Tensor({s.taps, s.cin, s.cout}), Tensor({s.cout})};
  as_matrix(out.dkernel, s.taps * s.cin, s.cout).noalias() = col.transpose() * g;
  as_row(out.dbias) = g.colwise().sum();

  RowMatrix dcol = g * as_matrix(kernel, s.taps * s.cin, s.cout).transpose();
  Eigen::Index r = 0;
  for (const auto& seg : segments) {
    const auto len = static_cast<long>(seg.length);
    for (long t = 0; t < len; ++t, ++r) {
      for (std::size_t j = 0; j < s.taps; ++j) {
        long src = t + (static_cast<long>(j) - static_cast<long>(s.half)) * static_cast<long>(s.dilation);
        if (src < 0 || src >= len) continue;
        double* to = out.dx.data() + (seg.start + static_cast<std::size_t>(src)) * s.cin;
        const double* from = dcol.row(r).data() + j * s.cin;
        for (std::size_t c = 0; c < s.cin; ++c) to[c] += from[c];
      }
    }
  }
  return out;
}

namespace {

std::vector<Segment> batch_segments(const Tensor& x, std::span<const std::size_t> lengths) {
  require(x.rank() == 3, "expected [batch, L, C]");
  const std::size_t batch = x.dim(0), len = x.dim(1);
  require(lengths.empty() || lengths.size() == batch, "one length per batch row required");
  std::vector<Segment> segs(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    std::size_t n = lengths.empty() ? len : lengths[b];
    require(n <= len, "sequence length exceeds L");
    segs[b] = {b * len, n};
  }
  return segs;
}

}  // namespace

Tensor conv1d_dilated_forward(const Tensor& x, const Tensor& kernel, const Tensor& bias,
                              std::size_t dilation, std::span<const std::size_t> lengths) {
  auto segs = batch_segments(x, lengths);
  const std::size_t batch = x.dim(0), len = x.dim(1);
  Tensor y = conv1d_rows_forward(x.reshaped({batch * len, x.dim(2)}), segs, kernel, bias, dilation);
  return y.reshaped({batch, len, kernel.dim(2)});
}

ConvGrads conv1d_dilated_backward(const Tensor& x, const Tensor& kernel, std::size_t dilation,
                                  const Tensor& dy, std::span<const std::size_t> lengths) {
  auto segs = batch_segments(x, lengths);
  const std::size_t batch = x.dim(0), len = x.dim(1);
  require(dy.rank() == 3 && dy.dim(0) == batch && dy.dim(1) == len, "conv dy shape mismatch");
  ConvGrads g = conv1d_rows_backward(x.reshaped({batch * len, x.dim(2)}), segs, kernel, dilation,
                                     dy.reshaped({batch * len, dy.dim(2)}));
  g.dx = g.dx.reshaped(x.shape());
  return g;
}

Tensor relu_forward(const Tensor& x) {
  Tensor y = x;
  for (double& v : y.values()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor relu_backward(const Tensor& pre_activation, const Tensor& dy) {
  require(pre_activation.same_shape(dy), "relu_backward shape mismatch");
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i)
    if (!(pre_activation[i] > 0.0)) dx[i] = 0.0;
  return dx;
}

DropoutResult dropout_forward(const Tensor& x, double rate, bool training, Rng& rng) {
  require(rate >= 0.0 && rate < 1.0, "dropout rate must be in [0, 1)");
  DropoutResult out{x, Tensor(x.shape(), 1.0)};
  if (!training || rate == 0.0) return out;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = u(rng) < rate ? 0.0 : keep_scale;
    out.scale[i] = s;
    out.y[i] = x[i] * s;
  }
  return out;
}

DropoutResult dropout_forward(const Tensor& x, double rate, bool training, std::uint64_t seed) {
  Rng rng(seed);
  return dropout_forward(x, rate, training, rng);
}

Tensor dropout_backward(const DropoutResult& forward, const Tensor& dy) {
  require(forward.scale.same_shape(dy), "dropout_backward shape mismatch");
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= forward.scale[i];
  return dx;
}

PoolResult max_pool_rows(const Tensor& x, std::span<const Segment> segments) {
  require(x.rank() == 2, "pool input must be [rows, C]");
  const std::size_t c = x.dim(1);
  PoolResult out{Tensor({segments.size(), c}), std::vector<long>(segments.size() * c, -1)};
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    require(seg.start + seg.length <= x.dim(0), "pool segment exceeds input rows");
    if (seg.length == 0) continue;
    for (std::size_t k = 0; k < c; ++k) {
      std::size_t best = seg.start;
      double best_v = x.at(best, k);
      for (std::size_t r = seg.start + 1; r < seg.start + seg.length; ++r) {
        double v = x.at(r, k);
        if (v > best_v) {
          best_v = v;
          best = r;
        }
      }
      out.y.at(s, k) = best_v;
      out.source[s * c + k] = static_cast<long>(best);
    }
  }
  return out;
}

Tensor max_pool_rows_backward(const PoolResult& forward, std::size_t rows, const Tensor& dy) {
  require(dy.same_shape(forward.y), "pool dy shape mismatch");
  const std::size_t c = dy.dim(1);
  Tensor dx({rows, c});
  for (std::size_t s = 0; s < dy.dim(0); ++s)
    for (std::size_t k = 0; k < c; ++k) {
      long src = forward.source[s * c + k];
      if (src >= 0) dx.at(static_cast<std::size_t>(src), k) += dy.at(s, k);
    }
  return dx;
}

Tensor mean_pool_rows(const Tensor& x, std::span<const Segment> segments) {
  require(x.rank() == 2, "pool input must be [rows, C]");
  const std::size_t c = x.dim(1);
  Tensor y({segments.size(), c});
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    if (seg.length == 0) continue;
    for (std::size_t r = seg.start; r < seg.start + seg.length; ++r)
      for (std::size_t k = 0; k < c; ++k) y.at(s, k) += x.at(r, k);
    for (std::size_t k = 0; k < c; ++k) y.at(s, k) /= static_cast<double>(seg.length);
  }
  return y;
}

Tensor mean_pool_rows_backward(std::span<const Segment> segments, std::size_t rows, const Tensor& dy) {
  const std::size_t c = dy.dim(1);
  Tensor dx({rows, c});
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    for (std::size_t r = seg.start; r < seg.start + seg.length; ++r)
      for (std::size_t k = 0; k < c; ++k) dx.at(r, k) = dy.at(s, k) / static_cast<double>(seg.length);
  }
  return dx;
}

PoolResult max_pool_over_time(const Tensor& x, std::span<const char> mask) {
  require(x.rank() == 3, "pool input must be [batch, L, C]");
  const std::size_t batch = x.dim(0), len = x.dim(1), c = x.dim(2);
  require(mask.size() == batch * len, "mask must have batch * L entries");
  PoolResult out{Tensor({batch, c}), std::vector<long>(batch * c, -1)};
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t k = 0; k < c; ++k) {
      long best = -1;
      double best_v = -std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < len; ++t) {
        if (!mask[b * len + t]) continue;
        double v = x.at(b, t, k);
        if (best < 0 || v > best_v) {
          best_v = v;
          best = static_cast<long>(b * len + t);
        }
      }
      out.y.at(b, k) = best < 0 ? 0.0 : best_v;
      out.source[b * c + k] = best;
    }
  }
  return out;
}

Tensor max_pool_over_time_backward(const PoolResult& forward, const std::vector<std::size_t>& x_shape,
                                   const Tensor& dy) {
  require(x_shape.size() == 3, "pool input shape must be [batch, L, C]");
  Tensor dx = max_pool_rows_backward(forward, x_shape[0] * x_shape[1], dy);
  return dx.reshaped(x_shape);
}

}  // namespace boq
