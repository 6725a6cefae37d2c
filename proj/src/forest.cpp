#include "boq/forest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <string>

#include "boq/error.hpp"
#include "boq/random.hpp"

namespace boq {

int resolve_max_features(std::string_view spec, std::size_t n_features) {
  if (n_features == 0) throw ConfigError("max_features needs a non-empty feature space");
  const double n = static_cast<double>(n_features);
  int value = 0;
  if (spec == "log2") {
    value = static_cast<int>(std::floor(std::log2(n)));
  } else if (spec == "sqrt") {
    value = static_cast<int>(std::floor(std::sqrt(n)));
  } else if (spec == "all") {
    value = static_cast<int>(n_features);
  } else {
    auto [p, ec] = std::from_chars(spec.data(), spec.data() + spec.size(), value);
    if (ec != std::errc() || p != spec.data() + spec.size() || value < 1)
      throw ConfigError("max_features must be log2, sqrt, all or a positive integer, got '" +
                        std::string(spec) + "'");
  }
  return std::max(value, 1);
}

std::size_t Tree::leaf_for(const SparseVector& x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    float v = static_cast<float>(x.at(n.feature));
    i = static_cast<std::size_t>(v <= n.threshold ? n.left : n.right);
  }
  return i;
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

namespace {

// Row-major sparse matrix with float values, as the trees compare them.
struct Csr {
  std::size_t rows = 0, cols = 0;
  std::vector<std::size_t> ptr{0};
  std::vector<int> col;
  std::vector<float> val;

  explicit Csr(const std::vector<SparseVector>& x) {
    rows = x.size();
    cols = x.empty() ? 0 : x.front().dim;
    for (const auto& v : x) {
      if (v.dim != cols) throw ContractError("forest: inconsistent feature dimension");
      for (std::size_t k = 0; k < v.nnz(); ++k) {
        float f = static_cast<float>(v.values[k]);
        if (f == 0.0f) continue;
        if (!std::isfinite(f)) throw NumericError("forest: non-finite feature value");
        col.push_back(v.indices[k]);
        val.push_back(f);
      }
      ptr.push_back(col.size());
    }
  }
};

struct Candidate {
  std::int64_t num = 0;  // S_L * W_R + S_R * W_L
  std::int64_t den = 1;  // W_L * W_R
  int feature = -1;
  float threshold = 0.0f;

  bool better_than(const Candidate& o) const {
    if (o.feature < 0) return true;
    return static_cast<__int128>(num) * o.den > static_cast<__int128>(o.num) * den;
  }
};

class Builder {
 public:
  Builder(const Csr& x, std::span<const int> y, std::size_t n_classes, std::span<const int> weight)
      : x_(x), y_(y), n_classes_(n_classes), weight_(weight),
        stamp_(x.cols, -1), chosen_(x.cols, -1), nz_count_(x.cols, 0), fmin_(x.cols), fmax_(x.cols),
        node_hist_(n_classes), left_hist_(n_classes), zero_hist_(n_classes) {}

  // Class histogram of samples[start, end); returns total weight.
  std::int64_t histogram(std::span<const int> samples, std::vector<std::int64_t>& hist) const {
    std::fill(hist.begin(), hist.end(), 0);
    std::int64_t total = 0;
    for (int s : samples) {
      hist[static_cast<std::size_t>(y_[static_cast<std::size_t>(s)])] += weight_[static_cast<std::size_t>(s)];
      total += weight_[static_cast<std::size_t>(s)];
    }
    return total;
  }

  // Features that take at least two distinct values on `samples`.
  std::vector<int> non_constant(std::span<const int> samples) {
    ++epoch_;
    touched_.clear();
    for (int s : samples) {
      for (std::size_t k = x_.ptr[static_cast<std::size_t>(s)]; k < x_.ptr[static_cast<std::size_t>(s) + 1]; ++k) {
        const auto f = static_cast<std::size_t>(x_.col[k]);
        const float v = x_.val[k];
        if (stamp_[f] != epoch_) {
          stamp_[f] = epoch_;
          nz_count_[f] = 0;
          fmin_[f] = fmax_[f] = v;
          touched_.push_back(static_cast<int>(f));
        }
        ++nz_count_[f];
        fmin_[f] = std::min(fmin_[f], v);
        fmax_[f] = std::max(fmax_[f], v);
      }
    }
    std::vector<int> out;
    for (int f : touched_) {
      const auto u = static_cast<std::size_t>(f);
      if (nz_count_[u] < samples.size() || fmin_[u] != fmax_[u]) out.push_back(f);
    }
    return out;
  }

  // Best split of `samples` over `features` (ascending order gives the tie rule).
  Candidate best_split(std::span<const int> samples, std::vector<int> features) {
    std::sort(features.begin(), features.end());
    ++epoch_;
    buckets_.resize(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
      chosen_[static_cast<std::size_t>(features[i])] = static_cast<int>(i);
      stamp_[static_cast<std::size_t>(features[i])] = epoch_;
      buckets_[i].clear();
    }
    for (int s : samples) {
      for (std::size_t k = x_.ptr[static_cast<std::size_t>(s)]; k < x_.ptr[static_cast<std::size_t>(s) + 1]; ++k) {
        const auto f = static_cast<std::size_t>(x_.col[k]);
        if (stamp_[f] == epoch_) buckets_[static_cast<std::size_t>(chosen_[f])].push_back({x_.val[k], s});
      }
    }
    const std::int64_t total = histogram(samples, node_hist_);
    std::int64_t node_sq = 0;
    for (auto c : node_hist_) node_sq += c * c;

    Candidate best;
    for (std::size_t i = 0; i < features.size(); ++i) {
      auto& b = buckets_[i];
      std::sort(b.begin(), b.end());
      // Class weights of the records where this feature is zero.
      zero_hist_ = node_hist_;
      std::int64_t zero_w = total;
      for (const auto& [v, s] : b) {
        zero_hist_[static_cast<std::size_t>(y_[static_cast<std::size_t>(s)])] -= weight_[static_cast<std::size_t>(s)];
        zero_w -= weight_[static_cast<std::size_t>(s)];
      }
      std::fill(left_hist_.begin(), left_hist_.end(), 0);
      std::int64_t wl = 0, sl = 0;

      auto move_one = [&](int s) {
        const auto c = static_cast<std::size_t>(y_[static_cast<std::size_t>(s)]);
        const std::int64_t w = weight_[static_cast<std::size_t>(s)];
        sl += 2 * left_hist_[c] * w + w * w;
        left_hist_[c] += w;
        wl += w;
      };
      auto move_zeros = [&] {
        for (std::size_t c = 0; c < n_classes_; ++c) {
          const std::int64_t z = zero_hist_[c];
          if (z == 0) continue;
          sl += 2 * left_hist_[c] * z + z * z;
          left_hist_[c] += z;
        }
        wl += zero_w;
      };
      auto consider = [&](float lo, float hi) {
        const std::int64_t wr = total - wl;
        if (wl <= 0 || wr <= 0) return;
        // S_R from the node total: sum (N_c - L_c)^2 = node_sq - 2 sum N_c L_c + S_L
        std::int64_t cross = 0;
        for (std::size_t c = 0; c < n_classes_; ++c) cross += node_hist_[c] * left_hist_[c];
        const std::int64_t sr = node_sq - 2 * cross + sl;
        Candidate cand;
        cand.num = sl * wr + sr * wl;
        cand.den = wl * wr;
        cand.feature = features[i];
        float mid = static_cast<float>((static_cast<double>(lo) + static_cast<double>(hi)) / 2.0);
        cand.threshold = (mid >= lo && mid < hi) ? mid : lo;
        if (cand.better_than(best)) best = cand;
      };

      // Walk distinct values in ascending order, with the zero block slotted
      // in where it belongs.
      bool zeros_done = zero_w == 0;
      float prev = 0.0f;
      bool have_prev = false;
      std::size_t k = 0;
      while (k < b.size() || !zeros_done) {
        float next;
        bool take_zero = !zeros_done && (k >= b.size() || b[k].first > 0.0f);
        next = take_zero ? 0.0f : b[k].first;
        if (have_prev) consider(prev, next);
        if (take_zero) {
          move_zeros();
          zeros_done = true;
        } else {
          while (k < b.size() && b[k].first == next) move_one(b[k++].second);
        }
        prev = next;
        have_prev = true;
      }
    }
    return best;
  }

  // x[f] of every sample in `samples` into value_, for partitioning.
  float value(int s, int f) const {
    const auto* first = x_.col.data() + x_.ptr[static_cast<std::size_t>(s)];
    const auto* last = x_.col.data() + x_.ptr[static_cast<std::size_t>(s) + 1];
    const auto* it = std::lower_bound(first, last, f);
    if (it == last || *it != f) return 0.0f;
    return x_.val[static_cast<std::size_t>(it - x_.col.data())];
  }

  std::vector<std::int64_t>& node_hist() { return node_hist_; }

 private:
  const Csr& x_;
  std::span<const int> y_;
  std::size_t n_classes_;
  std::span<const int> weight_;
  std::vector<int> stamp_, chosen_;
  std::vector<std::size_t> nz_count_;
  std::vector<float> fmin_, fmax_;
  std::vector<int> touched_;
  std::vector<std::vector<std::pair<float, int>>> buckets_;
  std::vector<std::int64_t> node_hist_, left_hist_, zero_hist_;
  int epoch_ = 0;
};

// Number of non-constant features among `draws` features taken without
// replacement from `total`, of which `good` are non-constant.
std::size_t hypergeometric(std::size_t total, std::size_t good, std::size_t draws, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < draws && hits < good; ++i) {
    const double p = static_cast<double>(good - hits) / static_cast<double>(total - i);
    if (u(rng) < p) ++hits;
  }
  return hits;
}

Tree grow_tree(const Csr& x, std::span<const int> y, std::size_t n_classes, int max_features,
               bool bootstrap, Rng rng) {
  const std::size_t n = x.rows;
  std::vector<int> weight(n, bootstrap ? 0 : 1);
  if (bootstrap) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t i = 0; i < n; ++i) ++weight[pick(rng)];
  }
  Tree tree;
  std::vector<int> samples;
  for (std::size_t i = 0; i < n; ++i) {
    if (weight[i] > 0)
      samples.push_back(static_cast<int>(i));
    else
      tree.oob.push_back(static_cast<int>(i));
  }

  Builder builder(x, y, n_classes, weight);
  struct Pending {
    std::size_t start, end, node;
  };
  std::vector<Pending> stack{{0, samples.size(), 0}};
  tree.nodes.emplace_back();

  auto make_leaf = [&](std::size_t node, std::span<const int> part) {
    auto& hist = builder.node_hist();
    builder.histogram(part, hist);
    auto& nd = tree.nodes[node];
    nd.feature = -1;
    nd.left = static_cast<std::int32_t>(tree.leaves.size());
    for (std::size_t c = 0; c < n_classes; ++c)
      if (hist[c] > 0) tree.leaves.push_back({static_cast<std::int32_t>(c), static_cast<std::int32_t>(hist[c])});
    nd.right = static_cast<std::int32_t>(tree.leaves.size()) - nd.left;
  };

  while (!stack.empty()) {
    auto [start, end, node] = stack.back();
    stack.pop_back();
    std::span<int> part(samples.data() + start, end - start);

    const int first_label = y[static_cast<std::size_t>(part.front())];
    bool pure = std::all_of(part.begin(), part.end(),
                            [&](int s) { return y[static_cast<std::size_t>(s)] == first_label; });
    if (pure) {
      make_leaf(node, part);
      continue;
    }
    std::vector<int> candidates = builder.non_constant(part);
    if (candidates.empty()) {
      make_leaf(node, part);
      continue;
    }
    const std::size_t draws = std::min<std::size_t>(static_cast<std::size_t>(max_features), x.cols);
    std::size_t h = hypergeometric(x.cols, candidates.size(), draws, rng);
    h = std::max<std::size_t>(h, 1);
    for (std::size_t i = 0; i < h; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
      std::swap(candidates[i], candidates[pick(rng)]);
    }
    candidates.resize(h);

    Candidate best = builder.best_split(part, std::move(candidates));
    if (best.feature < 0) {
      make_leaf(node, part);
      continue;
    }
    auto mid = std::partition(part.begin(), part.end(),
                              [&](int s) { return builder.value(s, best.feature) <= best.threshold; });
    const std::size_t split_at = start + static_cast<std::size_t>(mid - part.begin());

    const std::size_t left = tree.nodes.size();
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& nd = tree.nodes[node];
    nd.feature = best.feature;
    nd.threshold = best.threshold;
    nd.left = static_cast<std::int32_t>(left);
    nd.right = static_cast<std::int32_t>(left + 1);
    stack.push_back({split_at, end, left + 1});
    stack.push_back({start, split_at, left});
  }
  return tree;
}

void check_labels(std::span<const int> y, std::size_t n, std::size_t n_classes) {
  if (y.size() != n) throw ContractError("forest: X and y lengths differ");
  for (int v : y)
    if (v < 0 || static_cast<std::size_t>(v) >= n_classes) throw ContractError("forest: label out of range");
}

}  // namespace

Forest forest_fit(const std::vector<SparseVector>& x, std::span<const int> y, std::size_t n_classes,
                  const ForestParams& params, Forest previous) {
  if (params.n_trees < 1) throw ContractError("forest needs at least one tree");
  if (x.empty()) throw ContractError("forest needs at least one training record");
  check_labels(y, x.size(), n_classes);
  const std::size_t dim = x.front().dim;
  const int max_features = params.max_features == 0 ? resolve_max_features("log2", dim) : params.max_features;
  if (max_features < 1 || static_cast<std::size_t>(max_features) > dim)
    throw ContractError("max_features " + std::to_string(max_features) + " outside [1, " +
                        std::to_string(dim) + "]");

  Forest forest;
  if (params.warm_start && !previous.trees.empty()) {
    if (previous.n_features != dim || previous.n_classes != n_classes || previous.n_records != x.size() ||
        previous.max_features != max_features || previous.seed != params.seed ||
        previous.bootstrap != params.bootstrap)
      throw ConfigError("warm start needs a forest fitted with the same data and settings");
    if (previous.trees.size() > static_cast<std::size_t>(params.n_trees))
      throw ConfigError("warm start cannot shrink a forest");
    forest = std::move(previous);
  } else {
    forest.n_features = dim;
    forest.n_classes = n_classes;
    forest.n_records = x.size();
    forest.max_features = max_features;
    forest.seed = params.seed;
    forest.bootstrap = params.bootstrap;
  }

  const Csr csr(x);
  for (std::size_t t = forest.trees.size(); t < static_cast<std::size_t>(params.n_trees); ++t)
    forest.trees.push_back(grow_tree(csr, y, n_classes, max_features, params.bootstrap, make_rng(params.seed, t)));
  return forest;
}

namespace {

void add_leaf_vote(const Tree& tree, std::size_t leaf, std::span<double> votes) {
  const auto& nd = tree.nodes[leaf];
  double total = 0.0;
  for (std::int32_t i = 0; i < nd.right; ++i) total += tree.leaves[static_cast<std::size_t>(nd.left + i)].count;
  for (std::int32_t i = 0; i < nd.right; ++i) {
    const auto& e = tree.leaves[static_cast<std::size_t>(nd.left + i)];
    votes[static_cast<std::size_t>(e.label)] += e.count / total;
  }
}

}  // namespace

std::vector<double> forest_proba(const Forest& forest, const SparseVector& x) {
  if (x.dim != forest.n_features) throw ContractError("forest: feature dimension mismatch");
  if (forest.trees.empty()) throw ContractError("forest has no trees");
  std::vector<double> votes(forest.n_classes, 0.0);
  for (const auto& t : forest.trees) add_leaf_vote(t, t.leaf_for(x), votes);
  for (double& v : votes) v /= static_cast<double>(forest.trees.size());
  return votes;
}

Prediction forest_predict_one(const Forest& forest, const SparseVector& x) {
  Prediction p;
  p.scores = forest_proba(forest, x);
  p.label = argmax(p.scores);
  p.confidence = p.scores[static_cast<std::size_t>(p.label)];
  return p;
}

std::vector<Prediction> forest_predict(const Forest& forest, const std::vector<SparseVector>& x) {
  std::vector<Prediction> out;
  out.reserve(x.size());
  for (const auto& v : x) out.push_back(forest_predict_one(forest, v));
  return out;
}

std::vector<OobPoint> oob_curve(const Forest& forest, const std::vector<SparseVector>& x,
                                std::span<const int> y, const std::vector<int>& checkpoints) {
  if (x.size() != forest.n_records) throw ContractError("OOB needs the forest's own training records");
  check_labels(y, x.size(), forest.n_classes);
  std::vector<int> marks = checkpoints;
  std::sort(marks.begin(), marks.end());
  for (int m : marks)
    if (m < 1 || static_cast<std::size_t>(m) > forest.trees.size())
      throw ContractError("OOB checkpoint " + std::to_string(m) + " outside the forest size");

  const std::size_t c = forest.n_classes;
  std::vector<double> votes(x.size() * c, 0.0);
  std::vector<char> voted(x.size(), 0);
  std::vector<OobPoint> out;
  std::size_t next = 0;
  for (std::size_t t = 0; t < forest.trees.size() && next < marks.size(); ++t) {
    const auto& tree = forest.trees[t];
    for (int id : tree.oob) {
      const auto i = static_cast<std::size_t>(id);
      add_leaf_vote(tree, tree.leaf_for(x[i]), std::span<double>(votes.data() + i * c, c));
      voted[i] = 1;
    }
    while (next < marks.size() && static_cast<std::size_t>(marks[next]) == t + 1) {
      OobPoint p;
      p.trees = marks[next];
      std::size_t wrong = 0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (!voted[i]) continue;
        ++p.scored;
        if (argmax(std::span<const double>(votes.data() + i * c, c)) != y[i]) ++wrong;
      }
      if (p.scored == 0)
        throw UndefinedResultError("no record has an out-of-bag vote after " + std::to_string(p.trees) + " trees");
      p.error = static_cast<double>(wrong) / static_cast<double>(p.scored);
      out.push_back(p);
      ++next;
    }
  }
  return out;
}

double oob_error(const Forest& forest, const std::vector<SparseVector>& x, std::span<const int> y) {
  if (forest.trees.empty()) throw ContractError("forest has no trees");
  return oob_curve(forest, x, y, {static_cast<int>(forest.trees.size())}).front().error;
}

GiniSplit best_gini_split(const std::vector<SparseVector>& x, std::span<const int> y,
                          std::span<const int> weights, std::size_t n_classes) {
  check_labels(y, x.size(), n_classes);
  if (weights.size() != x.size()) throw ContractError("one weight per record required");
  const Csr csr(x);
  std::vector<int> samples;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (weights[i] > 0) samples.push_back(static_cast<int>(i));
  GiniSplit out;
  if (samples.empty()) return out;
  Builder b(csr, y, n_classes, weights);
  auto features = b.non_constant(samples);
  if (features.empty()) return out;
  Candidate best = b.best_split(samples, std::move(features));
  if (best.feature < 0) return out;
  out.found = true;
  out.feature = best.feature;
  out.threshold = best.threshold;
  return out;
}

}  // namespace boq
