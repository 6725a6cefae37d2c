#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "json.hpp"

#include "boq/adam.hpp"
#include "boq/error.hpp"
#include "boq/layers.hpp"
#include "boq/prediction.hpp"
#include "boq/random.hpp"
#include "boq/tensor.hpp"

namespace boq {

struct TrainConfig {
  double lr = 0.01;
  std::size_t batch = 64;
  int epochs = 40;
  std::uint64_t seed = 7;
  double dev_fraction = 0.1;  // carved from the training split by the caller

  /// lr may be zero (parameters then never move); everything else must be positive.
  void validate() const;
  nlohmann::json to_json() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;  // mean over the epoch's mini-batches, training mode
  double train_acc = 0.0;
  double dev_loss = 0.0;    // evaluation mode
  double dev_acc = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_dev_acc = 0.0;
};

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<Prediction> predictions;
};

/// Probabilities become Prediction objects (confidence = max probability).
std::vector<Prediction> predictions_from_probs(const Tensor& probs);

template <class Model>
std::vector<Prediction> predict_model(const Model& model, const std::vector<typename Model::Input>& x,
                                      std::size_t batch = 256) {
  std::vector<Prediction> out;
  out.reserve(x.size());
  std::vector<const typename Model::Input*> ptrs;
  for (std::size_t start = 0; start < x.size(); start += batch) {
    ptrs.clear();
    for (std::size_t i = start; i < std::min(x.size(), start + batch); ++i) ptrs.push_back(&x[i]);
    auto preds = predictions_from_probs(softmax(model.forward(ptrs, false, 0, nullptr)));
    for (auto& p : preds) out.push_back(std::move(p));
  }
  return out;
}

template <class Model>
EvalResult evaluate_model(const Model& model, const std::vector<typename Model::Input>& x,
                          std::span<const int> y, std::size_t batch = 256) {
  if (x.size() != y.size()) throw ContractError("evaluate: inputs and labels differ in length");
  EvalResult r;
  r.predictions = predict_model(model, x, batch);
  if (x.empty()) return r;
  std::size_t correct = 0;
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& p = r.predictions[i];
    correct += p.label == y[i];
    loss -= std::log(std::max(p.scores.at(static_cast<std::size_t>(y[i])), 1e-12));
  }
  r.loss = loss / static_cast<double>(x.size());
  r.accuracy = static_cast<double>(correct) / static_cast<double>(x.size());
  return r;
}

/// Mini-batch Adam on the categorical cross-entropy. Records are reshuffled
/// every epoch from the seed; the returned model holds the parameters of the
/// epoch with the best dev accuracy (earliest on ties, last epoch when there
/// is no dev set). A non-finite loss raises TrainingError with the epoch.
template <class Model>
TrainResult train(Model& model, const std::vector<typename Model::Input>& x, std::span<const int> y,
                  const std::vector<typename Model::Input>& dev_x, std::span<const int> dev_y,
                  const TrainConfig& cfg, const std::function<void(const EpochRecord&)>& on_epoch = {}) {
  cfg.validate();
  if (x.empty()) throw ContractError("train: empty training set");
  if (x.size() != y.size() || dev_x.size() != dev_y.size())
    throw ContractError("train: inputs and labels differ in length");

  std::vector<Tensor*> params = model.parameters();
  std::vector<AdamState> states;
  for (auto* p : params) states.push_back(AdamState::for_param(*p, cfg.lr));
  std::vector<Tensor> best;
  TrainResult result;
  result.best_dev_acc = -1.0;

  std::vector<std::size_t> order(x.size());
  std::vector<const typename Model::Input*> ptrs;
  std::vector<int> labels;
  std::uint64_t step = 0;
  const std::uint64_t dropout_seed = derive_seed(cfg.seed, 0xd50u);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(cfg.seed, 1000 + static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      ptrs.clear();
      labels.clear();
      for (std::size_t i = start; i < end; ++i) {
        ptrs.push_back(&x[order[i]]);
        labels.push_back(y[order[i]]);
      }
      typename Model::Cache cache;
      Tensor logits = model.forward(ptrs, true, derive_seed(dropout_seed, step++), &cache);
      if (!logits.all_finite()) throw TrainingError(epoch, "non-finite logits");
      Tensor probs = softmax(logits);
      LossValue loss = cross_entropy(probs, labels);
      if (!std::isfinite(loss.value)) throw TrainingError(epoch, "non-finite loss");
      loss_sum += loss.value * static_cast<double>(ptrs.size());
      for (std::size_t i = 0; i < ptrs.size(); ++i) {
        std::span<const double> row(probs.data() + i * probs.dim(1), probs.dim(1));
        correct += argmax(row) == labels[i];
      }
      std::vector<Tensor> grads = model.backward(ptrs, cache, loss.grad_wrt_logits);
      for (std::size_t p = 0; p < params.size(); ++p) adam_step(*params[p], grads[p], states[p]);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(x.size());
    rec.train_acc = static_cast<double>(correct) / static_cast<double>(x.size());
    if (!std::isfinite(rec.train_loss)) throw TrainingError(epoch, "non-finite loss");
    bool improved;
    if (dev_x.empty()) {
      rec.dev_loss = rec.dev_acc = std::nan("");
      improved = true;
    } else {
      EvalResult dev = evaluate_model(model, dev_x, dev_y);
      rec.dev_loss = dev.loss;
      rec.dev_acc = dev.accuracy;
      improved = dev.accuracy > result.best_dev_acc;
    }
    if (improved) {
      result.best_epoch = epoch;
      result.best_dev_acc = rec.dev_acc;
      best.clear();
      for (auto* p : params) best.push_back(*p);
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  for (std::size_t p = 0; p < params.size(); ++p) *params[p] = std::move(best[p]);
  return result;
}

}  // namespace boq
