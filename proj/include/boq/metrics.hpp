#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace boq {

/// counts[i][j]: records of true class i predicted as j.
struct ConfusionMatrix {
  std::size_t n_classes = 0;
  std::vector<std::uint64_t> counts;  // row-major C x C

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t c) : n_classes(c), counts(c * c, 0) {}
  std::uint64_t& at(std::size_t i, std::size_t j) { return counts[i * n_classes + j]; }
  std::uint64_t at(std::size_t i, std::size_t j) const { return counts[i * n_classes + j]; }
  std::uint64_t total() const;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, std::size_t n_classes);

struct ClassMetrics {
  std::string label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;    // true records of the class
  std::uint64_t predicted = 0;  // records predicted as the class
  bool in_macro = false;        // counted in the macro average
};

struct MetricsReport {
  std::string scope = "test";  // "test", "dev" or "in-sample"
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  ConfusionMatrix confusion;
  std::vector<std::string> notes;

  nlohmann::json to_json() const;
  static MetricsReport from_json(const nlohmann::json& j);
  /// Fixed-width per-class table followed by the summary lines.
  std::string to_table() const;
};

/// Per-class precision, recall and F1 with 0 for empty denominators (each
/// such case is listed in `notes`); macro F1 averages the classes that occur
/// in the true or the predicted labels; accuracy is trace / total.
/// Throws UndefinedResultError for an all-zero matrix.
MetricsReport metrics(const ConfusionMatrix& cm, const std::vector<std::string>& labels = {});

}  // namespace boq
