#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "boq/artifact.hpp"
#include "boq/corpus.hpp"
#include "boq/metrics.hpp"
#include "boq/trainer.hpp"
#include "boq/vocabulary.hpp"

namespace boq {

/// Cleaned, deduplicated, cut-off corpus split three ways. `fit` is what
/// models learn from, `dev` selects neural checkpoints, `test` is held out.
struct PreparedData {
  LabelSpace labels;
  std::vector<CleanDoc> fit, dev, test;
  std::size_t n_records = 0;
  std::size_t duplicates_removed = 0;
  std::vector<std::string> dropped_labels;
};

/// The test split uses `seed`; the dev split is carved from the remaining
/// training records with a seed derived from it.
PreparedData prepare_data(const std::vector<RawRecord>& records, std::size_t cutoff, double test_fraction,
                          double dev_fraction, std::uint64_t seed);

struct TrainOptions {
  ModelKind kind = ModelKind::mlp;
  std::uint64_t seed = 7;
  TrainConfig train;  // neural models; train.seed is overwritten with `seed`
  int min_df = 1;
  int ngram = 1;
  std::optional<WeightingScheme> weighting;  // default depends on the model
  std::size_t seq_len = 160;
  // naive Bayes
  double alpha = 1.0;
  // linear SVM
  double svm_lambda = 1e-4;
  int svm_epochs = 10;
  // random forest
  int trees = 600;
  std::string max_features = "log2";
  std::vector<int> oob_checkpoints{25, 100, 300, 600};
  // MLP
  std::vector<std::size_t> hidden{300, 50};
  // TCN
  std::string dilations = "exp";
  bool residual = true;
  Pooling pooling = Pooling::max;
  double dropout = 0.5;
  std::string embedding = "learned";  // or "pretrained:<path>"
  bool freeze_embedding = false;

  WeightingScheme resolved_weighting() const;
};

/// Weighting each model family uses unless told otherwise.
WeightingScheme default_weighting(ModelKind kind);

struct TrainOutcome {
  ModelArtifact artifact;
  Vocabulary vocab;
  MetricsReport dev_report;   // empty scope when there is no dev split
  MetricsReport test_report;
  std::vector<EpochRecord> history;      // neural models
  int best_epoch = 0;
  std::vector<OobPoint> oob;             // random forest
  std::optional<double> embedding_coverage;
};

using LogFn = std::function<void(const std::string&)>;

/// Vectorise, fit, evaluate on dev and test. Neural weights are rounded to
/// float32 before evaluation so the reported metrics are those of the saved
/// artifact.
TrainOutcome run_training(const PreparedData& data, const TrainOptions& options, const LogFn& log = {});

}  // namespace boq
