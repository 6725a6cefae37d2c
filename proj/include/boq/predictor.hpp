#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "boq/artifact.hpp"
#include "boq/corpus.hpp"
#include "boq/metrics.hpp"
#include "boq/prediction.hpp"
#include "boq/vocabulary.hpp"

namespace boq {

struct LabeledPrediction {
  int label = 0;
  std::string code;
  double confidence = 0.0;
  std::string note;  // "no-signal" when the input carried no usable token
};

/// A loaded model bound to its vocabulary. Read-only after construction, so
/// one instance can serve concurrent callers. Records are scored one at a
/// time, which keeps results independent of how inputs are batched.
class Predictor {
 public:
  /// Throws ConfigError when the vocabulary hash differs from the one the
  /// model was trained with.
  Predictor(ModelArtifact artifact, Vocabulary vocab);

  /// `vocab` defaults to vocab.json next to the model file.
  static Predictor load(const std::filesystem::path& model, const std::optional<std::filesystem::path>& vocab = {});

  ModelKind kind() const noexcept { return artifact_.kind; }
  const nlohmann::json& manifest() const noexcept { return artifact_.manifest; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const Vocabulary& vocab() const noexcept { return vocab_; }
  /// posterior, softmax-margin, vote-share or softmax.
  std::string confidence_kind() const;

  /// Inputs that vectorise to nothing fall back to the most frequent
  /// training class, with its training share as confidence.
  LabeledPrediction predict_tokens(const std::vector<std::string>& tokens) const;
  LabeledPrediction predict_text(std::string_view description) const;
  std::vector<LabeledPrediction> predict_texts(const std::vector<std::string>& descriptions) const;

 private:
  ModelArtifact artifact_;
  Vocabulary vocab_;
  std::vector<std::string> labels_;
  WeightingScheme weighting_ = WeightingScheme::tfidf;
  std::size_t seq_len_ = 160;
  int prior_label_ = 0;
  double prior_share_ = 0.0;
};

/// Scores `docs` (labels index the predictor's label space) and builds a report.
MetricsReport evaluate_docs(const Predictor& predictor, const std::vector<CleanDoc>& docs,
                            const std::string& scope);

}  // namespace boq
