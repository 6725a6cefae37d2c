#include "boq/tcn.hpp"

#include <algorithm>

#include "boq/error.hpp"
#include "boq/mlp.hpp"

namespace boq {

std::string to_string(Pooling p) { return p == Pooling::max ? "max" : "mean"; }

Pooling parse_pooling(std::string_view text) {
  if (text == "max") return Pooling::max;
  if (text == "mean") return Pooling::mean;
  throw ConfigError("pooling must be max or mean, got '" + std::string(text) + "'");
}

std::vector<std::size_t> dilation_schedule(std::string_view name) {
  if (name == "exp") return {1, 2, 4};
  if (name == "linear") return {1, 1, 2};
  throw ConfigError("dilation schedule must be exp or linear, got '" + std::string(name) + "'");
}

std::size_t TcnConfig::receptive_radius() const {
  std::size_t r = 0;
  for (auto d : dilations) r += d * (kernel - 1) / 2;
  return r;
}

nlohmann::json TcnConfig::to_json() const {
  return {{"vocab_size", vocab_size}, {"n_classes", n_classes}, {"embed_dim", embed_dim},
          {"filters", filters},       {"kernel", kernel},       {"dilations", dilations},
          {"residual", residual},     {"pooling", to_string(pooling)},
          {"dropout", dropout},       {"train_embedding", train_embedding},
          {"seq_len", seq_len}};
}

TcnConfig TcnConfig::from_json(const nlohmann::json& j) {
  TcnConfig c;
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.n_classes = j.at("n_classes").get<std::size_t>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.filters = j.at("filters").get<std::size_t>();
  c.kernel = j.at("kernel").get<std::size_t>();
  c.dilations = j.at("dilations").get<std::vector<std::size_t>>();
  c.residual = j.at("residual").get<bool>();
  c.pooling = parse_pooling(j.at("pooling").get<std::string>());
  c.dropout = j.at("dropout").get<double>();
  c.train_embedding = j.at("train_embedding").get<bool>();
  c.seq_len = j.at("seq_len").get<std::size_t>();
  return c;
}

TcnModel::TcnModel(const TcnConfig& config, std::uint64_t seed) : config_(config) {
  if (config.vocab_size < 1 || config.n_classes < 1 || config.embed_dim < 1 || config.filters < 1)
    throw ConfigError("TCN sizes must be positive");
  if (config.kernel % 2 == 0) throw ConfigError("TCN kernel size must be odd");
  if (config.dilations.empty()) throw ConfigError("TCN needs at least one conv layer");
  if (!(config.dropout >= 0.0 && config.dropout < 1.0)) throw ConfigError("TCN dropout must be in [0, 1)");
  for (auto d : config.dilations)
    if (d < 1) throw ConfigError("TCN dilations must be at least 1");

  Rng erng = make_rng(seed, 0);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  embedding_ = Tensor({config.vocab_size, config.embed_dim});
  for (double& v : embedding_.values()) v = u(erng);
  std::fill_n(embedding_.data(), config.embed_dim, 0.0);

  std::size_t cin = config.embed_dim;
  const std::size_t k = config.kernel, cout = config.filters;
  for (std::size_t i = 0; i < config.dilations.size(); ++i) {
    Block b;
    Rng krng = make_rng(seed, 10 + i);
    b.kernel = glorot_uniform({k, cin, cout}, k * cin, k * cout, krng);
    b.bias = Tensor({cout});
    b.dilation = config.dilations[i];
    if (config.residual && cin != cout) {
      Rng prng = make_rng(seed, 20 + i);
      b.proj_w = glorot_uniform({cin, cout}, cin, cout, prng);
      b.proj_b = Tensor({cout});
    }
    blocks_.push_back(std::move(b));
    cin = cout;
  }
  Rng hrng = make_rng(seed, 30);
  head_w_ = glorot_uniform({cout, config.n_classes}, cout, config.n_classes, hrng);
  head_b_ = Tensor({config.n_classes});
}

std::vector<Tensor*> TcnModel::all_tensors() {
  std::vector<Tensor*> p{&embedding_};
  for (auto& b : blocks_) {
    p.push_back(&b.kernel);
    p.push_back(&b.bias);
    if (b.has_projection()) {
      p.push_back(&b.proj_w);
      p.push_back(&b.proj_b);
    }
  }
  p.push_back(&head_w_);
  p.push_back(&head_b_);
  return p;
}

std::vector<const Tensor*> TcnModel::all_tensors() const {
  auto mut = const_cast<TcnModel*>(this)->all_tensors();
  return {mut.begin(), mut.end()};
}

std::vector<std::string> TcnModel::all_tensor_names() const {
  std::vector<std::string> names{"embedding"};
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const std::string p = "block" + std::to_string(i);
    names.push_back(p + ".kernel");
    names.push_back(p + ".bias");
    if (blocks_[i].has_projection()) {
      names.push_back(p + ".proj_w");
      names.push_back(p + ".proj_b");
    }
  }
  names.push_back("head.w");
  names.push_back("head.b");
  return names;
}

std::vector<Tensor*> TcnModel::parameters() {
  auto p = all_tensors();
  if (!config_.train_embedding) p.erase(p.begin());
  return p;
}

std::vector<const Tensor*> TcnModel::parameters() const {
  auto p = all_tensors();
  if (!config_.train_embedding) p.erase(p.begin());
  return p;
}

std::vector<std::string> TcnModel::parameter_names() const {
  auto n = all_tensor_names();
  if (!config_.train_embedding) n.erase(n.begin());
  return n;
}

std::size_t TcnModel::conv_parameter_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks_) n += b.kernel.size() + b.bias.size() + b.proj_w.size() + b.proj_b.size();
  return n;
}

Tensor TcnModel::forward(const std::vector<const PaddedSequence*>& batch, bool training,
                         std::uint64_t seed, Cache* cache) const {
  Cache local;
  Cache& c = cache ? *cache : local;
  c = Cache{};
  const auto vocab = static_cast<int>(config_.vocab_size);
  for (const auto* seq : batch) {
    const std::size_t len = seq->real_length();
    c.segments.push_back({c.ids.size(), len});
    for (std::size_t t = 0; t < len; ++t) {
      const int id = seq->ids[t];
      if (id < 0 || id >= vocab)
        throw ContractError("token id " + std::to_string(id) + " outside the embedding table");
      c.ids.push_back(id);
    }
  }
  const std::size_t rows = c.ids.size();
  Tensor x = embedding_forward(c.ids, embedding_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    c.inputs.push_back(x);
    Tensor pre = conv1d_rows_forward(x, c.segments, b.kernel, b.bias, b.dilation);
    DropoutResult dr = dropout_forward(relu_forward(pre), config_.dropout, training, derive_seed(seed, i));
    Tensor y = dr.y;
    if (config_.residual) {
      if (b.has_projection()) {
        Tensor r = affine_forward(x, b.proj_w, b.proj_b);
        for (std::size_t e = 0; e < y.size(); ++e) y[e] += r[e];
      } else {
        for (std::size_t e = 0; e < y.size(); ++e) y[e] += x[e];
      }
    }
    c.pre.push_back(std::move(pre));
    c.drop.push_back(std::move(dr));
    x = std::move(y);
  }
  if (rows == 0) x = Tensor({0, config_.filters});
  c.features = std::move(x);
  if (config_.pooling == Pooling::max) {
    c.pooled = max_pool_rows(c.features, c.segments);
  } else {
    c.pooled.y = mean_pool_rows(c.features, c.segments);
  }
  return affine_forward(c.pooled.y, head_w_, head_b_);
}

std::vector<Tensor> TcnModel::backward(const std::vector<const PaddedSequence*>&, const Cache& c,
                                       const Tensor& dlogits) const {
  const std::size_t rows = c.ids.size();
  AffineGrads head = affine_backward(c.pooled.y, head_w_, dlogits);
  Tensor dx = config_.pooling == Pooling::max ? max_pool_rows_backward(c.pooled, rows, head.dx)
                                              : mean_pool_rows_backward(c.segments, rows, head.dx);

  std::vector<std::vector<Tensor>> block_grads(blocks_.size());
  for (std::size_t i = blocks_.size(); i-- > 0;) {
    const auto& b = blocks_[i];
    Tensor dpre = relu_backward(c.pre[i], dropout_backward(c.drop[i], dx));
    ConvGrads g = conv1d_rows_backward(c.inputs[i], c.segments, b.kernel, b.dilation, dpre);
    Tensor din = std::move(g.dx);
    auto& out = block_grads[i];
    out.push_back(std::move(g.dkernel));
    out.push_back(std::move(g.dbias));
    if (config_.residual) {
      if (b.has_projection()) {
        AffineGrads pg = affine_backward(c.inputs[i], b.proj_w, dx);
        for (std::size_t e = 0; e < din.size(); ++e) din[e] += pg.dx[e];
        out.push_back(std::move(pg.dw));
        out.push_back(std::move(pg.db));
      } else {
        for (std::size_t e = 0; e < din.size(); ++e) din[e] += dx[e];
      }
    }
    dx = std::move(din);
  }

  std::vector<Tensor> grads;
  if (config_.train_embedding) {
    const int pad = Vocabulary::kPadId;
    grads.push_back(embedding_backward(c.ids, dx, config_.vocab_size, std::span<const int>(&pad, 1)));
  }
  for (auto& bg : block_grads)
    for (auto& g : bg) grads.push_back(std::move(g));
  grads.push_back(std::move(head.dw));
  grads.push_back(std::move(head.db));
  return grads;
}

Tensor TcnModel::position_features(const PaddedSequence& seq) const {
  Cache c;
  forward({&seq}, false, 0, &c);
  return c.features;
}

Tensor tcn_forward(const TcnModel& model, const std::vector<PaddedSequence>& batch) {
  std::vector<const PaddedSequence*> ptrs;
  for (const auto& s : batch) ptrs.push_back(&s);
  return model.forward(ptrs, false, 0, nullptr);
}

}  // namespace boq
