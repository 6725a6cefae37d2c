#include "boq/trainer.hpp"

namespace boq {

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be a finite value >= 0");
  if (batch < 1) throw ConfigError("batch size must be at least 1");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(dev_fraction >= 0.0 && dev_fraction < 1.0)) throw ConfigError("dev_fraction must be in [0, 1)");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"lr", lr}, {"batch", batch}, {"epochs", epochs}, {"seed", seed}, {"dev_fraction", dev_fraction},
          {"optimizer", {{"name", "adam"}, {"beta1", 0.9}, {"beta2", 0.999}, {"eps", 1e-8}}},
          {"loss", "categorical_cross_entropy"}};
}

std::vector<Prediction> predictions_from_probs(const Tensor& probs) {
  std::vector<Prediction> out;
  if (probs.rank() != 2) throw ContractError("expected [batch, C] probabilities");
  const std::size_t c = probs.dim(1);
  for (std::size_t i = 0; i < probs.dim(0); ++i) {
    Prediction p;
    p.scores.assign(probs.data() + i * c, probs.data() + (i + 1) * c);
    p.label = argmax(p.scores);
    p.confidence = p.scores[static_cast<std::size_t>(p.label)];
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace boq
