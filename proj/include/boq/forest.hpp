#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "boq/prediction.hpp"
#include "boq/vocabulary.hpp"

namespace boq {

struct ForestParams {
  int n_trees = 600;
  int max_features = 0;  // 0 = floor(log2 |V|)
  std::uint64_t seed = 7;
  bool bootstrap = true;  // false is a test hook: every tree sees every record once
  bool warm_start = false;
};

/// "log2", "sqrt", "all" or a positive integer.
int resolve_max_features(std::string_view spec, std::size_t n_features);

/// Internal nodes test `float(x[feature]) <= threshold`. Leaves have
/// feature -1; `left` is then the offset of their histogram in Tree::leaves
/// and `right` its length.
struct TreeNode {
  std::int32_t feature = -1;
  float threshold = 0.0f;
  std::int32_t left = 0;
  std::int32_t right = 0;
};
static_assert(sizeof(TreeNode) == 16);

struct LeafEntry {
  std::int32_t label = 0;
  std::int32_t count = 0;  // in-bag weight
};

struct Tree {
  std::vector<TreeNode> nodes;
  std::vector<LeafEntry> leaves;
  std::vector<int> oob;  // record ids absent from this tree's bootstrap, ascending

  /// Index of the leaf node reached by `x`.
  std::size_t leaf_for(const SparseVector& x) const;
  std::size_t leaf_count() const;
};

struct Forest {
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::size_t n_records = 0;  // training set size the OOB ids refer to
  int max_features = 1;
  std::uint64_t seed = 0;
  bool bootstrap = true;
  std::vector<Tree> trees;
};

/// Bagged CART trees with Gini impurity, grown until pure. At each node
/// features are visited in random order until `max_features` have been seen
/// and at least one of them can split the node. Tree i draws from the seed
/// stream (seed, i), so a warm-started forest equals a direct fit.
/// With params.warm_start and a compatible `previous`, its trees are kept
/// and only the missing ones are grown.
Forest forest_fit(const std::vector<SparseVector>& x, std::span<const int> y, std::size_t n_classes,
                  const ForestParams& params, Forest previous = {});

/// Mean of the normalised leaf histograms over all trees.
std::vector<double> forest_proba(const Forest& forest, const SparseVector& x);
Prediction forest_predict_one(const Forest& forest, const SparseVector& x);
std::vector<Prediction> forest_predict(const Forest& forest, const std::vector<SparseVector>& x);

struct OobPoint {
  int trees = 0;
  double error = 0.0;
  std::size_t scored = 0;  // records with at least one out-of-bag vote
};

/// OOB error using the first k trees for each k in `checkpoints`.
/// Throws UndefinedResultError when no record has an out-of-bag vote.
std::vector<OobPoint> oob_curve(const Forest& forest, const std::vector<SparseVector>& x,
                                std::span<const int> y, const std::vector<int>& checkpoints);
double oob_error(const Forest& forest, const std::vector<SparseVector>& x, std::span<const int> y);

struct GiniSplit {
  bool found = false;
  int feature = -1;
  float threshold = 0.0f;
};

/// Best split over every feature for weighted records, using the same search
/// the trees use. Maximises sum over sides of (sum_c n_c^2) / n_side, which
/// is the weighted Gini decrease; ties go to the lower feature, then the
/// lower threshold.
GiniSplit best_gini_split(const std::vector<SparseVector>& x, std::span<const int> y,
                          std::span<const int> weights, std::size_t n_classes);

}  // namespace boq
