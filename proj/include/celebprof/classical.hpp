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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "celebprof/matrix.hpp"
#include "json.hpp"

namespace celebprof {

enum class Algorithm { kKnn, kLogReg, kDecisionTree, kRandomForest, kSvm };
enum class FeaturesPerSplit { kSqrt, kAll };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);
std::string_view to_string(FeaturesPerSplit f);
FeaturesPerSplit parse_features_per_split(std::string_view s);

struct TrainConfig {
  Algorithm algorithm = Algorithm::kLogReg;
  int k_neighbors = 5;
  double learning_rate = 0.1;
  int epochs = 200;
  double l2_penalty = 1e-3;
  std::optional<int> max_depth;
  int min_leaf = 2;
  int n_trees = 100;
  bool bootstrap = true;
  FeaturesPerSplit features_per_split = FeaturesPerSplit::kSqrt;
  double svm_c = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

// ---- parameter blocks -------------------------------------------------------

struct KnnParams {
  Matrix train;
  std::vector<int> labels;
};

struct LogRegParams {
  Matrix weights;  // classes x features
  std::vector<double> bias;
  std::vector<double> loss_history;  // before training, then after each epoch
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> class_counts;

  bool is_leaf() const { return feature < 0; }
};

// Flat node array; node 0 is the root. x[feature] <= threshold goes left.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  const TreeNode& leaf_for(std::span<const double> x) const;
  int predict(std::span<const double> x) const;
  int depth() const;
};

struct ForestParams {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
};

struct SvmParams {
  Matrix weights;  // classes x features, one-vs-rest
  std::vector<double> bias;
};

struct TrainedModel {
  Algorithm algorithm = Algorithm::kLogReg;
  std::vector<std::string> label_set;
  std::size_t n_features = 0;
  TrainConfig config;
  std::variant<KnnParams, LogRegParams, DecisionTree, ForestParams, SvmParams> params;
};

// ---- algorithms ----------------------------------------------------------

// Majority label among the k nearest rows (Euclidean). Distance ties go to
// the lower row index, vote ties to the lower class index.
std::vector<int> knn_classify(const Matrix& train, std::span<const int> train_labels,
                              std::size_t n_classes, const Matrix& queries, int k);

// Entropy in bits of a class histogram.
double entropy_bits(std::span<const double> counts);

// H(parent) - sum |cell|/|parent| H(cell), in bits.
double information_gain(std::span<const int> parent,
                        const std::vector<std::vector<int>>& partition);

struct LogisticObjective {
  double loss = 0.0;
  Matrix grad_weights;
  std::vector<double> grad_bias;
};

// Mean cross-entropy of the softmax model plus (l2/2)*||W||^2 (bias not
// penalized), with its analytic gradient.
LogisticObjective logistic_objective(const Matrix& weights, std::span<const double> bias,
                                     const Matrix& x, std::span<const int> y, double l2_penalty);

// Row-wise softmax probabilities.
Matrix softmax_probabilities(const Matrix& weights, std::span<const double> bias, const Matrix& x);

double hinge_loss(std::span<const double> margins);

TrainedModel fit_knn(const Matrix& x, std::span<const int> y,
                     const std::vector<std::string>& label_set, const TrainConfig& config);
TrainedModel fit_logistic_regression(const Matrix& x, std::span<const int> y,
                                     const std::vector<std::string>& label_set,
                                     const TrainConfig& config);
TrainedModel fit_decision_tree(const Matrix& x, std::span<const int> y,
                               const std::vector<std::string>& label_set,
                               const TrainConfig& config);
TrainedModel fit_random_forest(const Matrix& x, std::span<const int> y,
                               const std::vector<std::string>& label_set,
                               const TrainConfig& config);
TrainedModel fit_linear_svm(const Matrix& x, std::span<const int> y,
                            const std::vector<std::string>& label_set, const TrainConfig& config);

// Dispatches on config.algorithm.
TrainedModel fit_classical(const Matrix& x, std::span<const int> y,
                           const std::vector<std::string>& label_set, const TrainConfig& config);

std::vector<int> predict_classical(const TrainedModel& model, const Matrix& x);

// Per-class decision scores (probabilities, margins or vote counts).
Matrix decision_scores(const TrainedModel& model, const Matrix& x);

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& j);

}  // namespace celebprof
