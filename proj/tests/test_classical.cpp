// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include "celebprof/classical.hpp"
#include "celebprof/error.hpp"
#include "doctest.h"
#include "oracles.hpp"

namespace celebprof {
namespace {

const std::vector<std::string> kAB = {"A", "B"};
const std::vector<std::string> kABC = {"A", "B", "C"};

Matrix matrix(std::vector<std::vector<double>> rows) {
  Matrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  }
  return m;
}

// Gaussian blobs around well-separated class centres.
std::pair<Matrix, std::vector<int>> blobs(int n, int dims, int classes, double spread,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, spread);
  Matrix x(static_cast<std::size_t>(n), static_cast<std::size_t>(dims));
  std::vector<int> y;
  for (int i = 0; i < n; ++i) {
    const int cls = i % classes;
    y.push_back(cls);
    for (int d = 0; d < dims; ++d) {
      x(static_cast<std::size_t>(i), static_cast<std::size_t>(d)) =
          (d % classes == cls ? 3.0 : 0.0) + noise(rng);
    }
  }
  return {x, y};
}

double accuracy(const std::vector<int>& a, const std::vector<int>& b) {
  int ok = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ok += a[i] == b[i];
  return double(ok) / double(a.size());
}

TrainConfig config_for(Algorithm a) {
  TrainConfig c;
  c.algorithm = a;
  c.seed = 99;
  return c;
}

std::string error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

TEST_CASE("knn") {
  const Matrix train = matrix({{0, 0}, {0, 1}, {5, 5}});
  const std::vector<int> y = {0, 0, 1};
  CHECK(knn_classify(train, y, 2, matrix({{0, 0.4}}), 3) == std::vector<int>{0});
  CHECK(knn_classify(train, y, 2, matrix({{5, 5}}), 1) == std::vector<int>{1});
  CHECK(knn_classify(train, y, 2, matrix({{5, 5}}), 2) == std::vector<int>{0});  // vote tie
  CHECK(error_code([&] { knn_classify(train, y, 2, matrix({{0, 0}}), 4); }) == "precondition");
  CHECK(error_code([&] { knn_classify(Matrix(0, 2), {}, 2, matrix({{0, 0}}), 1); }) ==
        "empty_input");
  // Equidistant neighbours: the lower row index wins.
  CHECK(knn_classify(matrix({{1, 0}, {-1, 0}}), std::vector<int>{1, 0}, 2, matrix({{0, 0}}), 1) ==
        std::vector<int>{1});

  SUBCASE("training rows reproduce their labels with k = 1") {
    auto [x, labels] = blobs(30, 4, 3, 1.0, 2);
    TrainConfig c = config_for(Algorithm::kKnn);
    c.k_neighbors = 1;
    TrainedModel m = fit_knn(x, labels, kABC, c);
    CHECK(predict_classical(m, x) == labels);
  }
}

TEST_CASE("knn matches an exhaustive scan") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<std::vector<double>> rows(200, std::vector<double>(10));
  std::vector<int> labels;
  for (auto& r : rows) {
    for (auto& v : r) v = std::round(u(rng) * 4) / 4;  // coarse grid forces distance ties
    labels.push_back(static_cast<int>(rng() % 3));
  }
  const Matrix train = matrix(rows);
  std::vector<std::vector<double>> queries(50, std::vector<double>(10));
  for (auto& q : queries) {
    for (auto& v : q) v = std::round(u(rng) * 4) / 4;
  }
  for (int k : {1, 3, 5}) {
    const std::vector<int> got = knn_classify(train, labels, 3, matrix(queries), k);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      CHECK(got[i] == oracle::knn(rows, labels, 3, queries[i], k));
    }
  }
}

TEST_CASE("entropy and information gain") {
  const std::vector<int> parent = {0, 0, 1, 1};
  CHECK(information_gain(parent, {{0, 0}, {1, 1}}) == 1.0);
  CHECK(information_gain(parent, {{0, 1}, {0, 1}}) == 0.0);
  CHECK(information_gain(std::vector<int>{0, 0}, {{0}, {0}}) == 0.0);
  CHECK(entropy_bits(std::vector<double>{1, 1, 1, 1}) == doctest::Approx(2.0));
  CHECK(entropy_bits(std::vector<double>{5, 0}) == 0.0);
  CHECK(error_code([] { information_gain(std::vector<int>{}, {}); }) == "empty_input");
  CHECK(error_code([&] { information_gain(parent, {{0}, {1}}); }) == "precondition");

  SUBCASE("gain lies in [0, log2 K] and vanishes for mirrored children") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
      const int k = 2 + static_cast<int>(rng() % 3);
      std::vector<int> labels(4 + rng() % 20);
      for (auto& l : labels) l = static_cast<int>(rng() % static_cast<unsigned>(k));
      const std::size_t cut = 1 + rng() % (labels.size() - 1);
      std::vector<std::vector<int>> cells = {{labels.begin(), labels.begin() + long(cut)},
                                             {labels.begin() + long(cut), labels.end()}};
      const double g = information_gain(labels, cells);
      CHECK(g >= -1e-12);
      CHECK(g <= std::log2(double(k)) + 1e-12);
    }
    std::vector<int> half = {0, 1, 2, 2};
    std::vector<int> parent2 = half;
    parent2.insert(parent2.end(), half.begin(), half.end());
    CHECK(std::abs(information_gain(parent2, {half, half})) < 1e-12);
  }
}

TEST_CASE("logistic regression") {
  SUBCASE("analytic gradient matches finite differences") {
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n01;
    Matrix x(12, 5), w(3, 5);
    std::vector<double> b(3);
    for (double& v : x.data()) v = n01(rng);
    for (double& v : w.data()) v = n01(rng);
    for (double& v : b) v = n01(rng);
    std::vector<int> y;
    for (int i = 0; i < 12; ++i) y.push_back(i % 3);
    const LogisticObjective obj = logistic_objective(w, b, x, y, 0.1);
    std::vector<double*> params;
    for (double& v : w.data()) params.push_back(&v);
    for (double& v : b) params.push_back(&v);
    const auto numeric = oracle::numeric_gradient(
        [&] { return logistic_objective(w, b, x, y, 0.1).loss; }, params);
    std::vector<double> analytic = obj.grad_weights.data();
    analytic.insert(analytic.end(), obj.grad_bias.begin(), obj.grad_bias.end());
    double worst = 0;
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      worst = std::max(worst, oracle::relative_error(analytic[i], numeric[i]));
    }
    CHECK(worst < 1e-6);
  }
  SUBCASE("zero weights give uniform probabilities") {
    Matrix p = softmax_probabilities(Matrix(3, 4), std::vector<double>(3, 0.0), Matrix(2, 4, 1.5));
    for (double v : p.data()) CHECK(v == doctest::Approx(1.0 / 3));
  }
  SUBCASE("separable singletons are fit exactly") {
    const Matrix x = matrix({{1, 0}, {0, 1}});
    const std::vector<int> y = {0, 1};
    TrainedModel m = fit_logistic_regression(x, y, kAB, config_for(Algorithm::kLogReg));
    CHECK(predict_classical(m, x) == y);
  }
  SUBCASE("loss never increases and probabilities sum to one") {
    auto [x, y] = blobs(60, 6, 3, 1.5, 4);
    TrainedModel m = fit_logistic_regression(x, y, kABC, config_for(Algorithm::kLogReg));
    const auto& hist = std::get<LogRegParams>(m.params).loss_history;
    CHECK(hist.size() == 201);
    for (std::size_t i = 1; i < hist.size(); ++i) CHECK(hist[i] <= hist[i - 1] + 1e-15);
    Matrix p = decision_scores(m, x);
    for (std::size_t r = 0; r < p.rows(); ++r) {
      double s = 0;
      for (double v : p.row(r)) s += v;
      CHECK(std::abs(s - 1.0) < 1e-9);
    }
  }
  SUBCASE("single class is rejected") {
    CHECK(error_code([] {
            fit_logistic_regression(matrix({{1}, {2}}), std::vector<int>{0, 0}, kAB,
                                    config_for(Algorithm::kLogReg));
          }) == "degenerate_labels");
  }
}

TEST_CASE("decision tree") {
  const Matrix x = matrix({{1, 7}, {2, 7}, {3, 7}, {4, 7}});
  const std::vector<int> y = {0, 0, 1, 1};
  TrainConfig c = config_for(Algorithm::kDecisionTree);
  c.min_leaf = 1;
  c.features_per_split = FeaturesPerSplit::kAll;

  TrainedModel m = fit_decision_tree(x, y, kAB, c);
  const auto& tree = std::get<DecisionTree>(m.params);
  CHECK(tree.depth() == 1);
  CHECK(tree.nodes[0].feature == 0);
  CHECK(tree.nodes[0].threshold == 2.5);
  CHECK(predict_classical(m, x) == y);

  SUBCASE("constant features give a majority leaf") {
    TrainedModel leaf =
        fit_decision_tree(matrix({{1}, {1}, {1}}), std::vector<int>{1, 0, 1}, kAB, c);
    CHECK(std::get<DecisionTree>(leaf.params).nodes.size() == 1);
    CHECK(predict_classical(leaf, matrix({{5}})) == std::vector<int>{1});
  }
  SUBCASE("max_depth 0 predicts the majority class") {
    TrainConfig shallow = c;
    shallow.max_depth = 0;
    TrainedModel leaf = fit_decision_tree(x, std::vector<int>{0, 1, 1, 1}, kAB, shallow);
    CHECK(predict_classical(leaf, x) == std::vector<int>{1, 1, 1, 1});
  }
  SUBCASE("leaf class ties go to the lower class") {
    TrainConfig shallow = c;
    shallow.max_depth = 0;
    TrainedModel leaf = fit_decision_tree(x, y, kAB, shallow);
    CHECK(predict_classical(leaf, x) == std::vector<int>{0, 0, 0, 0});
  }
}

TEST_CASE("random forest") {
  auto [x, y] = blobs(90, 8, 3, 1.2, 6);
  SUBCASE("one tree without bootstrap equals the decision tree") {
    TrainConfig c = config_for(Algorithm::kRandomForest);
    c.n_trees = 1;
    c.bootstrap = false;
    c.features_per_split = FeaturesPerSplit::kAll;
    TrainConfig t = c;
    t.algorithm = Algorithm::kDecisionTree;
    TrainedModel forest = fit_random_forest(x, y, kABC, c);
    TrainedModel tree = fit_decision_tree(x, y, kABC, t);
    auto [probe, unused] = blobs(100, 8, 3, 2.5, 77);
    CHECK(predict_classical(forest, probe) == predict_classical(tree, probe));
  }
  SUBCASE("deterministic in the seed") {
    TrainConfig c = config_for(Algorithm::kRandomForest);
    c.n_trees = 15;
    CHECK(decision_scores(fit_random_forest(x, y, kABC, c), x) ==
          decision_scores(fit_random_forest(x, y, kABC, c), x));
  }
  SUBCASE("25 trees fit nearly as well as one full tree") {
    TrainConfig c = config_for(Algorithm::kRandomForest);
    c.n_trees = 25;
    TrainConfig t = config_for(Algorithm::kDecisionTree);
    t.features_per_split = FeaturesPerSplit::kAll;
    const double forest = accuracy(predict_classical(fit_random_forest(x, y, kABC, c), x), y);
    const double tree = accuracy(predict_classical(fit_decision_tree(x, y, kABC, t), x), y);
    CHECK(forest >= tree - 0.05);
  }
}

TEST_CASE("linear svm") {
  CHECK(hinge_loss(std::vector<double>{1.0, 2.5, 10}) == 0.0);
  CHECK(hinge_loss(std::vector<double>{0.5}) > 0.0);

  auto [x, y] = blobs(40, 2, 2, 0.3, 3);
  TrainedModel m = fit_linear_svm(x, y, kAB, config_for(Algorithm::kSvm));
  CHECK(accuracy(predict_classical(m, x), y) == 1.0);

  SUBCASE("scaling decision values keeps the argmax") {
    TrainedModel scaled = m;
    auto& p = std::get<SvmParams>(scaled.params);
    for (double& v : p.weights.data()) v *= 3.7;
    for (double& v : p.bias) v *= 3.7;
    auto [probe, unused] = blobs(50, 2, 2, 2.0, 8);
    CHECK(predict_classical(scaled, probe) == predict_classical(m, probe));
  }
}

TEST_CASE("uniform dispatch and persistence") {
  auto [x, y] = blobs(45, 5, 3, 1.0, 10);
  for (Algorithm a : {Algorithm::kKnn, Algorithm::kLogReg, Algorithm::kDecisionTree,
                      Algorithm::kRandomForest, Algorithm::kSvm}) {
    CAPTURE(to_string(a));
    TrainConfig c = config_for(a);
    c.n_trees = 5;
    TrainedModel m = fit_classical(x, y, kABC, c);
    CHECK(predict_classical(m, Matrix(0, 5)).empty());
    CHECK(error_code([&] { predict_classical(m, Matrix(2, 4)); }) == "dimension");
    const auto pred = predict_classical(m, x);
    CHECK(pred.size() == 45);
    // Refitting and a JSON round-trip both reproduce the predictions.
    CHECK(predict_classical(fit_classical(x, y, kABC, c), x) == pred);
    CHECK(predict_classical(model_from_json(model_to_json(m)), x) == pred);
    CHECK(parse_algorithm(to_string(a)) == a);
  }
  CHECK(error_code([] { model_from_json(nlohmann::json{{"algorithm", "knn"}}); }) == "corrupt");
}

TEST_CASE("config validation") {
  TrainConfig c;
  c.k_neighbors = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TrainConfig{};
  c.learning_rate = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = TrainConfig{};
  c.max_depth = 4;
  CHECK(TrainConfig::from_json(c.to_json()).to_json() == c.to_json());
}

}  // namespace
}  // namespace celebprof
