#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "boq/error.hpp"
#include "boq/forest.hpp"
#include "boq/linear_svm.hpp"
#include "boq/naive_bayes.hpp"
#include "boq/prediction.hpp"
#include "oracles.hpp"

using namespace boq;

namespace {

SparseVector sparse(const std::vector<double>& dense) {
  SparseVector v;
  v.dim = dense.size();
  for (std::size_t i = 0; i < dense.size(); ++i)
    if (dense[i] != 0.0) {
      v.indices.push_back(static_cast<int>(i));
      v.values.push_back(dense[i]);
    }
  return v;
}

std::vector<SparseVector> sparse_all(const std::vector<std::vector<double>>& rows) {
  std::vector<SparseVector> out;
  for (const auto& r : rows) out.push_back(sparse(r));
  return out;
}

// Random labelled dataset with a learnable signal: feature f leans to class f % C.
struct Toy {
  std::vector<SparseVector> x;
  std::vector<int> y;
};

Toy toy(std::size_t n, std::size_t dim, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Toy t;
  for (std::size_t i = 0; i < n; ++i) {
    int c = static_cast<int>(rng() % static_cast<unsigned>(classes));
    std::vector<double> row(dim, 0.0);
    for (int k = 0; k < 4; ++k) {
      std::size_t f = rng() % dim;
      if (rng() % 3 != 0) f = (f / static_cast<std::size_t>(classes)) * static_cast<std::size_t>(classes) + static_cast<std::size_t>(c);
      if (f >= dim) f = static_cast<std::size_t>(c);
      row[f] += 1.0;
    }
    t.x.push_back(sparse(row));
    t.y.push_back(c);
  }
  return t;
}

}  // namespace

TEST_CASE("naive Bayes worked example") {
  // vocab {cabl, duct, pipe}
  auto x = sparse_all({{2, 1, 0}, {0, 0, 1}});
  std::vector<int> y{0, 1};
  auto m = nb_fit(x, y, 2, 1.0);
  CHECK(std::exp(m.feature_log_prob.at(0, 0)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(std::exp(m.class_log_prior[0]) == doctest::Approx(0.5));
  CHECK(nb_predict_one(m, sparse({1, 0, 0})).label == 0);
  CHECK(nb_predict_one(m, sparse({0, 0, 1})).label == 1);
}

TEST_CASE("naive Bayes degenerate inputs") {
  auto single = nb_fit(sparse_all({{1, 0}, {0, 3}}), std::vector<int>{0, 0}, 1);
  CHECK(single.class_log_prior[0] == 0.0);
  CHECK(nb_predict_one(single, sparse({0, 5})).label == 0);
  CHECK(nb_predict_one(single, sparse({0, 5})).confidence == doctest::Approx(1.0));

  auto zeros = nb_fit(sparse_all({{0, 0, 0}, {0, 0, 0}}), std::vector<int>{0, 1}, 2, 0.5);
  for (std::size_t f = 0; f < 3; ++f) CHECK(std::exp(zeros.feature_log_prob.at(1, f)) == doctest::Approx(1.0 / 3));

  // No evidence: the larger prior wins.
  auto skew = nb_fit(sparse_all({{1, 0}, {0, 1}, {0, 1}}), std::vector<int>{0, 1, 1}, 2);
  CHECK(nb_predict_one(skew, sparse({0, 0})).label == 1);
  CHECK(nb_predict_one(skew, sparse({0, 0})).confidence == doctest::Approx(2.0 / 3));

  // A class absent from training never wins.
  auto gap = nb_fit(sparse_all({{1, 0}, {0, 1}}), std::vector<int>{0, 2}, 3);
  CHECK(std::isinf(gap.class_log_prior[1]));
  CHECK(nb_predict_one(gap, sparse({0, 0})).label != 1);

  CHECK_THROWS_AS(nb_fit(sparse_all({{-1, 0}}), std::vector<int>{0}, 1), ContractError);
  CHECK_THROWS_AS(nb_fit(sparse_all({{1, 0}}), std::vector<int>{3}, 2), ContractError);
}

TEST_CASE("naive Bayes matches the posterior enumerator") {
  std::mt19937_64 rng(77);
  int cases = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t docs = 1 + rng() % 5, terms = 1 + rng() % 5;
    const int classes = 1 + static_cast<int>(rng() % 3);
    std::vector<std::vector<double>> dense(docs, std::vector<double>(terms));
    std::vector<int> y(docs);
    for (std::size_t i = 0; i < docs; ++i) {
      y[i] = static_cast<int>(rng() % static_cast<unsigned>(classes));
      for (auto& v : dense[i]) v = static_cast<double>(rng() % 4);
    }
    const double alpha = trial % 3 == 0 ? 0.5 : 1.0;
    auto model = nb_fit(sparse_all(dense), y, static_cast<std::size_t>(classes), alpha);
    std::vector<double> q(terms);
    for (auto& v : q) v = static_cast<double>(rng() % 3);
    auto expected = oracle::nb_posterior(dense, y, classes, alpha, q);
    auto got = normalize_log_scores(nb_scores(model, sparse(q)));
    for (int c = 0; c < classes; ++c) CHECK(std::abs(got[static_cast<std::size_t>(c)] - expected[static_cast<std::size_t>(c)]) <= 1e-12);
    ++cases;
  }
  CHECK(cases >= 200);
}

TEST_CASE("linear SVM toys") {
  auto x = sparse_all({{1, 0}, {0, 1}});
  std::vector<int> y{0, 1};
  auto m = svm_fit(x, y, 2, {1e-3, 50, 7, false});
  for (std::size_t i = 0; i < 2; ++i) CHECK(svm_predict_one(m, x[i]).label == y[i]);

  auto xor_x = sparse_all({{0, 0}, {1, 1}, {1, 0}, {0, 1}});
  std::vector<int> xor_y{0, 0, 1, 1};
  auto xm = svm_fit(xor_x, xor_y, 2, {1e-3, 50, 7, false});
  int right = 0;
  for (std::size_t i = 0; i < 4; ++i) right += svm_predict_one(xm, xor_x[i]).label == xor_y[i];
  CHECK(right <= 3);

  auto huge = svm_fit(x, y, 2, {1e6, 20, 7, false});
  double norm = 0;
  for (double w : huge.weights.storage()) norm += w * w;
  CHECK(std::sqrt(norm) < 1e-3);

  auto p = svm_predict_one(m, x[0]);
  CHECK(p.confidence > 0.5);
  CHECK(p.confidence <= 1.0);
}

TEST_CASE("linear SVM objective decreases and runs are reproducible") {
  auto t = toy(300, 20, 3, 5);
  SvmParams params{1e-2, 15, 3, true};
  auto a = svm_fit(t.x, t.y, 3, params);
  auto b = svm_fit(t.x, t.y, 3, params);
  CHECK(a.weights.storage() == b.weights.storage());
  REQUIRE(a.objective_history.size() == 15);
  CHECK(a.objective_history.back() < a.objective_history.front());
  CHECK(svm_objective(a, t.x, t.y) == doctest::Approx(a.objective_history.back()));
  int right = 0;
  for (std::size_t i = 0; i < t.x.size(); ++i) right += svm_predict_one(a, t.x[i]).label == t.y[i];
  CHECK(right > 200);
}

TEST_CASE("max_features resolution") {
  CHECK(resolve_max_features("log2", 6045) == 12);
  CHECK(resolve_max_features("sqrt", 6045) == 77);
  CHECK(resolve_max_features("all", 6045) == 6045);
  CHECK(resolve_max_features("30", 6045) == 30);
  CHECK(resolve_max_features("log2", 1) == 1);
  CHECK_THROWS_AS(resolve_max_features("half", 10), ConfigError);
  CHECK_THROWS_AS(resolve_max_features("0", 10), ConfigError);
}

TEST_CASE("Gini split matches exhaustive search") {
  std::mt19937_64 rng(4242);
  int cases = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 2 + rng() % 19, dim = 1 + rng() % 5;
    const int classes = 2 + static_cast<int>(rng() % 3);
    std::vector<std::vector<float>> xf(n, std::vector<float>(dim));
    std::vector<std::vector<double>> xd(n, std::vector<double>(dim));
    std::vector<int> y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng() % static_cast<unsigned>(classes));
      w[i] = static_cast<int>(rng() % 3);  // bootstrap-style multiplicities, 0 = out of bag
      for (std::size_t f = 0; f < dim; ++f) {
        // mostly sparse, some repeated values, a few fractional ones
        double v = rng() % 2 ? 0.0 : static_cast<double>(rng() % 4) / (rng() % 2 ? 1.0 : 3.0);
        xd[i][f] = v;
        xf[i][f] = static_cast<float>(v);
      }
    }
    auto expected = oracle::gini_best(xf, y, w, classes);
    auto got = best_gini_split(sparse_all(xd), y, w, static_cast<std::size_t>(classes));
    REQUIRE(got.found == expected.found);
    if (expected.found) {
      CHECK(got.feature == expected.feature);
      CHECK(got.threshold == expected.threshold);
      CHECK(oracle::gini_decrease(xf, y, w, classes, got.feature, got.threshold) ==
            doctest::Approx(oracle::gini_decrease(xf, y, w, classes, expected.feature, expected.threshold)));
    }
    ++cases;
  }
  CHECK(cases >= 100);
}

TEST_CASE("single unbagged tree over all features is a plain CART that fits its data") {
  auto t = toy(200, 12, 3, 9);
  ForestParams p;
  p.n_trees = 1;
  p.bootstrap = false;
  p.max_features = 12;
  auto f = forest_fit(t.x, t.y, 3, p);
  REQUIRE(f.trees.size() == 1);
  CHECK(f.trees[0].oob.empty());
  // Pure leaves unless identical inputs carry different labels.
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < t.x.size(); ++i) wrong += forest_predict_one(f, t.x[i]).label != t.y[i];
  std::size_t conflicts = 0;
  for (std::size_t i = 0; i < t.x.size(); ++i)
    for (std::size_t j = 0; j < t.x.size(); ++j)
      if (t.x[i].indices == t.x[j].indices && t.x[i].values == t.x[j].values && t.y[i] != t.y[j]) {
        ++conflicts;
        break;
      }
  CHECK(wrong <= conflicts);

  // The root split is the exhaustive best split.
  std::vector<int> ones(t.x.size(), 1);
  auto root = best_gini_split(t.x, t.y, ones, 3);
  CHECK(f.trees[0].nodes[0].feature == root.feature);
  CHECK(f.trees[0].nodes[0].threshold == root.threshold);

  // A second fit with a different seed gives the same tree: no randomness is left.
  p.seed = 99;
  auto g = forest_fit(t.x, t.y, 3, p);
  REQUIRE(g.trees[0].nodes.size() == f.trees[0].nodes.size());
  for (std::size_t i = 0; i < g.trees[0].nodes.size(); ++i) {
    CHECK(g.trees[0].nodes[i].feature == f.trees[0].nodes[i].feature);
    CHECK(g.trees[0].nodes[i].threshold == f.trees[0].nodes[i].threshold);
  }
}

TEST_CASE("forest of one tree predicts what that tree predicts") {
  auto t = toy(150, 10, 3, 12);
  ForestParams p;
  p.n_trees = 1;
  auto f = forest_fit(t.x, t.y, 3, p);
  const auto& tree = f.trees[0];
  for (const auto& x : t.x) {
    const auto& leaf = tree.nodes[tree.leaf_for(x)];
    int best = -1, best_count = -1;
    for (int k = 0; k < leaf.right; ++k) {
      const auto& e = tree.leaves[static_cast<std::size_t>(leaf.left + k)];
      if (e.count > best_count || (e.count == best_count && e.label < best)) {
        best = e.label;
        best_count = e.count;
      }
    }
    CHECK(forest_predict_one(f, x).label == best);
  }
}

TEST_CASE("warm start equals a direct fit") {
  auto t = toy(180, 15, 3, 21);
  ForestParams p;
  p.n_trees = 10;
  p.seed = 5;
  auto small = forest_fit(t.x, t.y, 3, p);
  p.n_trees = 30;
  p.warm_start = true;
  auto grown = forest_fit(t.x, t.y, 3, p, small);
  p.warm_start = false;
  auto direct = forest_fit(t.x, t.y, 3, p);
  REQUIRE(grown.trees.size() == 30);
  for (std::size_t i = 0; i < t.x.size(); ++i) CHECK(forest_proba(grown, t.x[i]) == forest_proba(direct, t.x[i]));
  CHECK(oob_error(grown, t.x, t.y) == oob_error(direct, t.x, t.y));

  p.warm_start = true;
  p.max_features = 2;
  CHECK_THROWS_AS(forest_fit(t.x, t.y, 3, p, small), ConfigError);
}

TEST_CASE("out-of-bag error") {
  auto t = toy(120, 10, 3, 31);
  ForestParams p;
  p.n_trees = 1;
  p.seed = 8;
  auto f = forest_fit(t.x, t.y, 3, p);
  const auto& oob = f.trees[0].oob;
  REQUIRE_FALSE(oob.empty());
  double wrong = 0;
  for (int id : oob) wrong += forest_predict_one(f, t.x[static_cast<std::size_t>(id)]).label != t.y[static_cast<std::size_t>(id)];
  auto curve = oob_curve(f, t.x, t.y, {1});
  CHECK(curve[0].scored == oob.size());
  CHECK(curve[0].error == doctest::Approx(wrong / static_cast<double>(oob.size())));

  p.bootstrap = false;
  auto all_in = forest_fit(t.x, t.y, 3, p);
  CHECK_THROWS_AS(oob_error(all_in, t.x, t.y), UndefinedResultError);

  p.bootstrap = true;
  p.n_trees = 40;
  auto big = forest_fit(t.x, t.y, 3, p);
  auto pts = oob_curve(big, t.x, t.y, {5, 20, 40});
  REQUIRE(pts.size() == 3);
  CHECK(pts[0].trees == 5);
  CHECK(pts[2].scored >= pts[0].scored);
  CHECK(pts[2].error == oob_error(big, t.x, t.y));
}
