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

#include "celebprof/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "celebprof/error.hpp"
#include "celebprof/random.hpp"

namespace celebprof {

namespace {

constexpr std::array<std::string_view, 5> kAlgorithmNames = {"knn", "logreg", "dtree", "rforest",
                                                             "svm"};

int argmax_lowest(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

void check_training_data(const Matrix& x, std::span<const int> y,
                         const std::vector<std::string>& label_set) {
  if (x.rows() == 0) throw data_error("empty_input", "training set is empty");
  if (y.size() != x.rows()) {
    throw data_error("dimension",
                     fmt::format("{} training rows but {} labels", x.rows(), y.size()));
  }
  if (label_set.empty()) throw data_error("empty_input", "label set is empty");
  for (int label : y) {
    if (label < 0 || label >= static_cast<int>(label_set.size())) {
      throw data_error("bad_label", fmt::format("label index {} outside label set", label));
    }
  }
}

void require_two_classes(std::span<const int> y) {
  if (std::adjacent_find(y.begin(), y.end(), std::not_equal_to<>()) == y.end()) {
    throw data_error("degenerate_labels", "training labels contain a single class");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// ---- tree induction ---------------------------------------------------------

struct TreeBuilder {
  const Matrix& x;
  std::span<const int> y;
  std::size_t n_classes;
  const TrainConfig& config;
  Rng* feature_rng;  // null: every feature is a candidate at every node
  DecisionTree tree;

  std::vector<double> histogram(std::span<const std::size_t> idx) const {
    std::vector<double> counts(n_classes, 0.0);
    for (auto i : idx) counts[static_cast<std::size_t>(y[i])] += 1.0;
    return counts;
  }

  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> features(x.cols());
    std::iota(features.begin(), features.end(), 0);
    if (!feature_rng || config.features_per_split == FeaturesPerSplit::kAll) return features;
    const auto m = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(x.cols())))));
    for (std::size_t i = 0; i < m; ++i) {
      std::swap(features[i], features[i + feature_rng->index(features.size() - i)]);
    }
    features.resize(m);
    std::sort(features.begin(), features.end());
    return features;
  }

  int build(std::vector<std::size_t> idx, int depth) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    tree.nodes[node_id].class_counts = histogram(idx);
    const auto& counts = tree.nodes[node_id].class_counts;

    const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }) <= 1;
    const bool depth_limit = config.max_depth && depth >= *config.max_depth;
    const auto n = idx.size();
    if (pure || depth_limit || n < static_cast<std::size_t>(config.min_leaf)) return node_id;

    const double parent_entropy = entropy_bits(counts);
    const auto min_leaf = static_cast<std::size_t>(std::max(1, config.min_leaf));
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, int>> column(n);
    std::vector<double> left(n_classes), right(n_classes);
    for (auto f : candidate_features()) {
      for (std::size_t i = 0; i < n; ++i) column[i] = {x(idx[i], f), y[idx[i]]};
      std::sort(column.begin(), column.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (column.front().first == column.back().first) continue;
      std::fill(left.begin(), left.end(), 0.0);
      right = counts;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left[static_cast<std::size_t>(column[i].second)] += 1.0;
        right[static_cast<std::size_t>(column[i].second)] -= 1.0;
        if (column[i].first == column[i + 1].first) continue;
        const std::size_t n_left = i + 1;
        if (n_left < min_leaf || n - n_left < min_leaf) continue;
        const double nl = static_cast<double>(n_left);
        const double nr = static_cast<double>(n - n_left);
        const double total = static_cast<double>(n);
        const double gain =
            parent_entropy - (nl / total) * entropy_bits(left) - (nr / total) * entropy_bits(right);
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (column[i].first + column[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return node_id;

    std::vector<std::size_t> left_idx, right_idx;
    for (auto i : idx) {
      (x(i, static_cast<std::size_t>(best_feature)) <= best_threshold ? left_idx : right_idx)
          .push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();
    const int l = build(std::move(left_idx), depth + 1);
    const int r = build(std::move(right_idx), depth + 1);
    auto& node = tree.nodes[node_id];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    return node_id;
  }
};

DecisionTree grow_tree(const Matrix& x, std::span<const int> y, std::size_t n_classes,
                       const TrainConfig& config, std::vector<std::size_t> idx, Rng* rng) {
  TreeBuilder builder{x, y, n_classes, config, rng, {}};
  builder.build(std::move(idx), 0);
  return std::move(builder.tree);
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

}  // namespace

std::string_view to_string(Algorithm a) { return kAlgorithmNames[static_cast<int>(a)]; }

Algorithm parse_algorithm(std::string_view s) {
  for (std::size_t i = 0; i < kAlgorithmNames.size(); ++i) {
    if (kAlgorithmNames[i] == s) return static_cast<Algorithm>(i);
  }
  throw config_error("bad_value", fmt::format("unknown algorithm '{}'", s));
}

std::string_view to_string(FeaturesPerSplit f) {
  return f == FeaturesPerSplit::kSqrt ? "sqrt" : "all";
}

FeaturesPerSplit parse_features_per_split(std::string_view s) {
  if (s == "sqrt") return FeaturesPerSplit::kSqrt;
  if (s == "all") return FeaturesPerSplit::kAll;
  throw config_error("bad_value", fmt::format("unknown features_per_split '{}'", s));
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { return config_error("bad_value", m); };
  if (k_neighbors < 1) throw fail("k_neighbors must be at least 1");
  if (epochs < 1) throw fail("epochs must be at least 1");
  if (n_trees < 1) throw fail("n_trees must be at least 1");
  if (!(learning_rate > 0)) throw fail("learning_rate must be positive");
  if (!(l2_penalty > 0)) throw fail("l2_penalty must be positive");
  if (!(svm_c > 0)) throw fail("svm_c must be positive");
  if (min_leaf < 1) throw fail("min_leaf must be at least 1");
  if (max_depth && *max_depth < 0) throw fail("max_depth must be non-negative");
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j = {{"algorithm", to_string(algorithm)},
                      {"k_neighbors", k_neighbors},
                      {"learning_rate", learning_rate},
                      {"epochs", epochs},
                      {"l2_penalty", l2_penalty},
                      {"min_leaf", min_leaf},
                      {"n_trees", n_trees},
                      {"bootstrap", bootstrap},
                      {"features_per_split", to_string(features_per_split)},
                      {"svm_c", svm_c},
                      {"seed", seed}};
  j["max_depth"] = max_depth ? nlohmann::json(*max_depth) : nlohmann::json(nullptr);
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
  c.k_neighbors = j.at("k_neighbors").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.l2_penalty = j.at("l2_penalty").get<double>();
  c.min_leaf = j.at("min_leaf").get<int>();
  c.n_trees = j.at("n_trees").get<int>();
  c.bootstrap = j.at("bootstrap").get<bool>();
  c.features_per_split = parse_features_per_split(j.at("features_per_split").get<std::string>());
  c.svm_c = j.at("svm_c").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("max_depth").is_null()) c.max_depth = j.at("max_depth").get<int>();
  return c;
}

// ---- KNN --------------------------------------------------------------------

std::vector<int> knn_classify(const Matrix& train, std::span<const int> train_labels,
                              std::size_t n_classes, const Matrix& queries, int k) {
  if (train.rows() == 0) throw data_error("empty_input", "KNN training set is empty");
  if (k < 1 || static_cast<std::size_t>(k) > train.rows()) {
    throw data_error("precondition", fmt::format("k={} must lie in [1, {}] (training rows)", k,
                                                 train.rows()));
  }
  if (queries.rows() > 0 && queries.cols() != train.cols()) {
    throw data_error("dimension", fmt::format("query width {} differs from training width {}",
                                              queries.cols(), train.cols()));
  }
  std::vector<int> out;
  out.reserve(queries.rows());
  std::vector<std::pair<double, std::size_t>> dist(train.rows());
  std::vector<double> votes(n_classes);
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    const auto query = queries.row(q);
    for (std::size_t i = 0; i < train.rows(); ++i) {
      const auto row = train.row(i);
      double d = 0;
      for (std::size_t c = 0; c < row.size(); ++c) {
        const double diff = row[c] - query[c];
        d += diff * diff;
      }
      dist[i] = {d, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    std::fill(votes.begin(), votes.end(), 0.0);
    for (int j = 0; j < k; ++j) votes[static_cast<std::size_t>(train_labels[dist[j].second])] += 1;
    out.push_back(argmax_lowest(votes));
  }
  return out;
}

TrainedModel fit_knn(const Matrix& x, std::span<const int> y,
                     const std::vector<std::string>& label_set, const TrainConfig& config) {
  config.validate();
  check_training_data(x, y, label_set);
  if (static_cast<std::size_t>(config.k_neighbors) > x.rows()) {
    throw data_error("precondition", fmt::format("k={} exceeds the {} training rows",
                                                 config.k_neighbors, x.rows()));
  }
  TrainedModel model{Algorithm::kKnn, label_set, x.cols(), config,
                     KnnParams{x, std::vector<int>(y.begin(), y.end())}};
  model.config.algorithm = Algorithm::kKnn;
  return model;
}

// ---- entropy ----------------------------------------------------------------

double entropy_bits(std::span<const double> counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total <= 0) return 0.0;
  double h = 0;
  for (double c : counts) {
    if (c <= 0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return h;
}

double information_gain(std::span<const int> parent,
                        const std::vector<std::vector<int>>& partition) {
  if (parent.empty()) throw data_error("empty_input", "information gain of an empty parent");
  std::vector<int> sorted_parent(parent.begin(), parent.end());
  std::vector<int> sorted_cells;
  for (const auto& cell : partition) sorted_cells.insert(sorted_cells.end(), cell.begin(), cell.end());
  std::sort(sorted_parent.begin(), sorted_parent.end());
  std::sort(sorted_cells.begin(), sorted_cells.end());
  if (sorted_parent != sorted_cells) {
    throw data_error("precondition", "partition cells do not add up to the parent labels");
  }
  const int n_classes = sorted_parent.back() + 1;
  auto hist = [&](std::span<const int> labels) {
    std::vector<double> counts(static_cast<std::size_t>(std::max(n_classes, 1)), 0.0);
    for (int l : labels) {
      if (l < 0) throw data_error("bad_label", "negative class label");
      counts[static_cast<std::size_t>(l)] += 1.0;
    }
    return counts;
  };
  const double n = static_cast<double>(parent.size());
  double gain = entropy_bits(hist(parent));
  for (const auto& cell : partition) {
    if (cell.empty()) continue;
    gain -= (static_cast<double>(cell.size()) / n) * entropy_bits(hist(cell));
  }
  return gain;
}

// ---- logistic regression ----------------------------------------------------

Matrix softmax_probabilities(const Matrix& weights, std::span<const double> bias,
                             const Matrix& x) {
  const std::size_t k = weights.rows();
  Matrix p(x.rows(), k);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    auto row = p.row(i);
    for (std::size_t c = 0; c < k; ++c) row[c] = dot(weights.row(c), x.row(i)) + bias[c];
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0;
    for (auto& v : row) {
      v = std::exp(v - mx);
      z += v;
    }
    for (auto& v : row) v /= z;
  }
  return p;
}

LogisticObjective logistic_objective(const Matrix& weights, std::span<const double> bias,
                                     const Matrix& x, std::span<const int> y, double l2_penalty) {
  const std::size_t k = weights.rows();
  const double n = static_cast<double>(x.rows());
  LogisticObjective out{0.0, Matrix(k, weights.cols()), std::vector<double>(k, 0.0)};
  const Matrix p = softmax_probabilities(weights, bias, x);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto yi = static_cast<std::size_t>(y[i]);
    out.loss -= std::log(std::max(p(i, yi), 1e-300));
    const auto xi = x.row(i);
    for (std::size_t c = 0; c < k; ++c) {
      const double r = (p(i, c) - (c == yi ? 1.0 : 0.0)) / n;
      if (r == 0) continue;
      auto g = out.grad_weights.row(c);
      for (std::size_t f = 0; f < xi.size(); ++f) g[f] += r * xi[f];
      out.grad_bias[c] += r;
    }
  }
  out.loss /= n;
  double sq = 0;
  for (double w : weights.data()) sq += w * w;
  out.loss += 0.5 * l2_penalty * sq;
  for (std::size_t j = 0; j < weights.data().size(); ++j) {
    out.grad_weights.data()[j] += l2_penalty * weights.data()[j];
  }
  return out;
}

TrainedModel fit_logistic_regression(const Matrix& x, std::span<const int> y,
                                     const std::vector<std::string>& label_set,
                                     const TrainConfig& config) {
  config.validate();
  check_training_data(x, y, label_set);
  require_two_classes(y);
  const std::size_t k = label_set.size();
  LogRegParams params{Matrix(k, x.cols()), std::vector<double>(k, 0.0), {}};
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    auto obj = logistic_objective(params.weights, params.bias, x, y, config.l2_penalty);
    params.loss_history.push_back(obj.loss);
    for (std::size_t j = 0; j < obj.grad_weights.data().size(); ++j) {
      params.weights.data()[j] -= config.learning_rate * obj.grad_weights.data()[j];
    }
    for (std::size_t c = 0; c < k; ++c) params.bias[c] -= config.learning_rate * obj.grad_bias[c];
  }
  params.loss_history.push_back(
      logistic_objective(params.weights, params.bias, x, y, config.l2_penalty).loss);
  TrainedModel model{Algorithm::kLogReg, label_set, x.cols(), config, std::move(params)};
  model.config.algorithm = Algorithm::kLogReg;
  return model;
}

// ---- trees ------------------------------------------------------------------

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf()) {
    node = &nodes[static_cast<std::size_t>(
        x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left : node->right)];
  }
  return *node;
}

int DecisionTree::predict(std::span<const double> x) const {
  return argmax_lowest(leaf_for(x).class_counts);
}

int DecisionTree::depth() const {
  std::vector<std::pair<int, int>> stack = {{0, 0}};
  int best = 0;
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    const auto& n = nodes[static_cast<std::size_t>(id)];
    if (!n.is_leaf()) {
      stack.push_back({n.left, d + 1});
      stack.push_back({n.right, d + 1});
    }
  }
  return best;
}

TrainedModel fit_decision_tree(const Matrix& x, std::span<const int> y,
                               const std::vector<std::string>& label_set,
                               const TrainConfig& config) {
  config.validate();
  check_training_data(x, y, label_set);
  TrainedModel model{Algorithm::kDecisionTree, label_set, x.cols(), config,
                     grow_tree(x, y, label_set.size(), config, all_rows(x.rows()), nullptr)};
  model.config.algorithm = Algorithm::kDecisionTree;
  return model;
}

TrainedModel fit_random_forest(const Matrix& x, std::span<const int> y,
                               const std::vector<std::string>& label_set,
                               const TrainConfig& config) {
  config.validate();
  check_training_data(x, y, label_set);
  ForestParams params;
  for (int t = 0; t < config.n_trees; ++t) {
    const std::uint64_t tree_seed = derive_seed(config.seed, {static_cast<std::uint64_t>(t)});
    Rng rng(tree_seed);
    std::vector<std::size_t> idx;
    if (config.bootstrap) {
      idx.resize(x.rows());
      for (auto& i : idx) i = rng.index(x.rows());
      std::sort(idx.begin(), idx.end());
    } else {
      idx = all_rows(x.rows());
    }
    params.trees.push_back(grow_tree(x, y, label_set.size(), config, std::move(idx), &rng));
    params.tree_seeds.push_back(tree_seed);
  }
  TrainedModel model{Algorithm::kRandomForest, label_set, x.cols(), config, std::move(params)};
  model.config.algorithm = Algorithm::kRandomForest;
  return model;
}

// ---- linear SVM -------------------------------------------------------------

double hinge_loss(std::span<const double> margins) {
  if (margins.empty()) return 0.0;
  double s = 0;
  for (double m : margins) s += std::max(0.0, 1.0 - m);
  return s / static_cast<double>(margins.size());
}

TrainedModel fit_linear_svm(const Matrix& x, std::span<const int> y,
                            const std::vector<std::string>& label_set, const TrainConfig& config) {
  config.validate();
  check_training_data(x, y, label_set);
  require_two_classes(y);
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const std::size_t k = label_set.size();
  const double lambda = 1.0 / (config.svm_c * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);

  SvmParams params{Matrix(k, d), std::vector<double>(k, 0.0)};
  // Pegasos on the bias-augmented problem: the bias is the weight of a
  // constant-1 feature and is regularized with the rest.
  std::vector<double> w(d + 1);
  std::vector<std::size_t> order = all_rows(n);
  for (std::size_t c = 0; c < k; ++c) {
    std::fill(w.begin(), w.end(), 0.0);
    Rng rng(derive_seed(config.seed, {c}));
    std::uint64_t t = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      rng.shuffle(order);
      for (auto i : order) {
        ++t;
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const double target = y[i] == static_cast<int>(c) ? 1.0 : -1.0;
        const auto xi = x.row(i);
        const double margin = target * (dot(std::span<const double>(w).first(d), xi) + w[d]);
        const double shrink = 1.0 - eta * lambda;
        for (auto& v : w) v *= shrink;
        if (margin < 1.0) {
          for (std::size_t f = 0; f < d; ++f) w[f] += eta * target * xi[f];
          w[d] += eta * target;
        }
        double sq = 0;
        for (double v : w) sq += v * v;
        if (sq > radius * radius) {
          const double s = radius / std::sqrt(sq);
          for (auto& v : w) v *= s;
        }
      }
    }
    std::copy(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(d), params.weights.row(c).begin());
    params.bias[c] = w[d];
  }
  TrainedModel model{Algorithm::kSvm, label_set, d, config, std::move(params)};
  model.config.algorithm = Algorithm::kSvm;
  return model;
}

TrainedModel fit_classical(const Matrix& x, std::span<const int> y,
                           const std::vector<std::string>& label_set, const TrainConfig& config) {
  switch (config.algorithm) {
    case Algorithm::kKnn:
      return fit_knn(x, y, label_set, config);
    case Algorithm::kLogReg:
      return fit_logistic_regression(x, y, label_set, config);
    case Algorithm::kDecisionTree:
      return fit_decision_tree(x, y, label_set, config);
    case Algorithm::kRandomForest:
      return fit_random_forest(x, y, label_set, config);
    case Algorithm::kSvm:
      return fit_linear_svm(x, y, label_set, config);
  }
  throw internal_error("unreachable", "bad algorithm");
}

// ---- prediction -------------------------------------------------------------

Matrix decision_scores(const TrainedModel& model, const Matrix& x) {
  if (x.rows() > 0 && x.cols() != model.n_features) {
    throw data_error("dimension", fmt::format("input has {} features, model expects {}", x.cols(),
                                              model.n_features));
  }
  const std::size_t k = model.label_set.size();
  Matrix scores(x.rows(), k);
  if (x.rows() == 0) return scores;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, KnnParams>) {
          const int kn = model.config.k_neighbors;
          // Vote counts, recomputed from the neighbor scan.
          for (std::size_t q = 0; q < x.rows(); ++q) {
            std::vector<std::pair<double, std::size_t>> dist(p.train.rows());
            for (std::size_t i = 0; i < p.train.rows(); ++i) {
              double d = 0;
              for (std::size_t c = 0; c < x.cols(); ++c) {
                const double diff = p.train(i, c) - x(q, c);
                d += diff * diff;
              }
              dist[i] = {d, i};
            }
            std::partial_sort(dist.begin(), dist.begin() + kn, dist.end());
            for (int j = 0; j < kn; ++j) {
              scores(q, static_cast<std::size_t>(p.labels[dist[j].second])) += 1.0;
            }
          }
        } else if constexpr (std::is_same_v<P, LogRegParams>) {
          scores = softmax_probabilities(p.weights, p.bias, x);
        } else if constexpr (std::is_same_v<P, DecisionTree>) {
          for (std::size_t q = 0; q < x.rows(); ++q) {
            const auto& counts = p.leaf_for(x.row(q)).class_counts;
            const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
            for (std::size_t c = 0; c < k; ++c) scores(q, c) = counts[c] / total;
          }
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          for (std::size_t q = 0; q < x.rows(); ++q) {
            for (const auto& tree : p.trees) {
              scores(q, static_cast<std::size_t>(tree.predict(x.row(q)))) += 1.0;
            }
          }
        } else {
          for (std::size_t q = 0; q < x.rows(); ++q) {
            for (std::size_t c = 0; c < k; ++c) {
              scores(q, c) = dot(p.weights.row(c), x.row(q)) + p.bias[c];
            }
          }
        }
      },
      model.params);
  return scores;
}

std::vector<int> predict_classical(const TrainedModel& model, const Matrix& x) {
  if (x.rows() > 0 && x.cols() != model.n_features) {
    throw data_error("dimension", fmt::format("input has {} features, model expects {}", x.cols(),
                                              model.n_features));
  }
  if (const auto* knn = std::get_if<KnnParams>(&model.params)) {
    return knn_classify(knn->train, knn->labels, model.label_set.size(), x,
                        model.config.k_neighbors);
  }
  if (const auto* tree = std::get_if<DecisionTree>(&model.params)) {
    std::vector<int> out;
    for (std::size_t q = 0; q < x.rows(); ++q) out.push_back(tree->predict(x.row(q)));
    return out;
  }
  const Matrix scores = decision_scores(model, x);
  std::vector<int> out;
  out.reserve(x.rows());
  for (std::size_t q = 0; q < x.rows(); ++q) out.push_back(argmax_lowest(scores.row(q)));
  return out;
}

// ---- persistence ------------------------------------------------------------

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != m.data().size()) throw data_error("corrupt", "matrix payload size mismatch");
  m.data() = std::move(data);
  return m;
}

json tree_to_json(const DecisionTree& tree) {
  json nodes = json::array();
  for (const auto& n : tree.nodes) {
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"class_counts", n.class_counts}});
  }
  return nodes;
}

DecisionTree tree_from_json(const json& j, std::size_t n_features) {
  DecisionTree tree;
  for (const auto& nj : j) {
    TreeNode n;
    n.feature = nj.at("feature").get<int>();
    n.threshold = nj.at("threshold").get<double>();
    n.left = nj.at("left").get<int>();
    n.right = nj.at("right").get<int>();
    n.class_counts = nj.at("class_counts").get<std::vector<double>>();
    tree.nodes.push_back(std::move(n));
  }
  const auto size = static_cast<int>(tree.nodes.size());
  if (size == 0) throw data_error("corrupt", "empty decision tree");
  for (const auto& n : tree.nodes) {
    if (!n.is_leaf() && (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size ||
                         static_cast<std::size_t>(n.feature) >= n_features)) {
      throw data_error("corrupt", "decision tree node references are out of range");
    }
  }
  return tree;
}

}  // namespace

json model_to_json(const TrainedModel& model) {
  json j = {{"algorithm", to_string(model.algorithm)},
            {"label_set", model.label_set},
            {"n_features", model.n_features},
            {"config", model.config.to_json()}};
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, KnnParams>) {
          j["parameters"] = {{"train", matrix_to_json(p.train)}, {"labels", p.labels}};
        } else if constexpr (std::is_same_v<P, LogRegParams>) {
          j["parameters"] = {{"weights", matrix_to_json(p.weights)},
                             {"bias", p.bias},
                             {"loss_history", p.loss_history}};
        } else if constexpr (std::is_same_v<P, DecisionTree>) {
          j["parameters"] = {{"nodes", tree_to_json(p)}};
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          json trees = json::array();
          for (const auto& t : p.trees) trees.push_back(tree_to_json(t));
          j["parameters"] = {{"trees", std::move(trees)}, {"tree_seeds", p.tree_seeds}};
        } else {
          j["parameters"] = {{"weights", matrix_to_json(p.weights)}, {"bias", p.bias}};
        }
      },
      model.params);
  return j;
}

TrainedModel model_from_json(const json& j) {
  try {
    TrainedModel m;
    m.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    m.label_set = j.at("label_set").get<std::vector<std::string>>();
    m.n_features = j.at("n_features").get<std::size_t>();
    m.config = TrainConfig::from_json(j.at("config"));
    const auto& p = j.at("parameters");
    switch (m.algorithm) {
      case Algorithm::kKnn:
        m.params = KnnParams{matrix_from_json(p.at("train")), p.at("labels").get<std::vector<int>>()};
        break;
      case Algorithm::kLogReg:
        m.params = LogRegParams{matrix_from_json(p.at("weights")),
                                p.at("bias").get<std::vector<double>>(),
                                p.at("loss_history").get<std::vector<double>>()};
        break;
      case Algorithm::kDecisionTree:
        m.params = tree_from_json(p.at("nodes"), m.n_features);
        break;
      case Algorithm::kRandomForest: {
        ForestParams fp;
        for (const auto& t : p.at("trees")) fp.trees.push_back(tree_from_json(t, m.n_features));
        fp.tree_seeds = p.at("tree_seeds").get<std::vector<std::uint64_t>>();
        m.params = std::move(fp);
        break;
      }
      case Algorithm::kSvm:
        m.params = SvmParams{matrix_from_json(p.at("weights")), p.at("bias").get<std::vector<double>>()};
        break;
    }
    return m;
  } catch (const json::exception& e) {
    throw data_error("corrupt", fmt::format("model file is corrupted: {}", e.what()));
  }
}

}  // namespace celebprof
