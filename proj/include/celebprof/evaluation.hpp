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

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "celebprof/classical.hpp"
#include "celebprof/corpus.hpp"
#include "celebprof/features.hpp"
#include "celebprof/neural.hpp"
#include "celebprof/preprocess.hpp"
#include "json.hpp"

namespace celebprof {

// ---- metrics ----------------------------------------------------------------

enum class F1Variant { kStandard, kHalf };

std::string_view to_string(F1Variant v);
F1Variant parse_f1_variant(std::string_view s);

struct ConfusionMatrix {
  std::vector<std::string> class_order;
  std::vector<std::int64_t> counts;  // K x K, row = true class, column = prediction

  std::size_t size() const { return class_order.size(); }
  std::int64_t at(std::size_t truth, std::size_t predicted) const {
    return counts[truth * size() + predicted];
  }
  std::int64_t total() const;
};

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 std::vector<std::string> class_order);
ConfusionMatrix confusion_matrix(std::span<const std::string> y_true,
                                 std::span<const std::string> y_pred,
                                 std::vector<std::string> class_order);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  F1Variant f1_variant = F1Variant::kStandard;
};

// One-vs-rest precision/recall per class with 0/0 taken as 0; macro values are
// unweighted class means. The half variant reports PR/(P+R).
MetricsReport classification_metrics(const ConfusionMatrix& cm,
                                     F1Variant variant = F1Variant::kStandard);

// Harmonic mean of the four macro F1 values; 0 when any of them is 0.
double crank(std::span<const double, 4> f1_by_demographic);

// ---- splitting --------------------------------------------------------------

struct SplitSpec {
  double test_fraction = 0.2;
  Demographic stratify_on = Demographic::kOccupation;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Split {
  std::vector<std::size_t> train;  // document indices, ascending
  std::vector<std::size_t> test;
  bool stratified = true;
  std::string warning;  // set when stratification had to be dropped
};

Split stratified_split(std::span<const LabeledDocument> documents, const SplitSpec& spec);

// ---- experiment grid ----------------------------------------------------------

enum class ModelKind { kKnn, kLogReg, kDecisionTree, kRandomForest, kSvm, kCnn, kLstm };

inline constexpr std::array<ModelKind, 7> kAllModels = {
    ModelKind::kKnn, ModelKind::kLogReg, ModelKind::kDecisionTree, ModelKind::kRandomForest,
    ModelKind::kSvm, ModelKind::kCnn,    ModelKind::kLstm};

std::string_view to_string(ModelKind m);
ModelKind parse_model_kind(std::string_view s);
// Name used in report tables, e.g. "Random Forest".
std::string_view display_name(ModelKind m);
bool is_neural(ModelKind m);

struct ExperimentConfig {
  FeatureOptions features;
  // Indexed by Algorithm; the algorithm field of each entry is fixed.
  std::array<TrainConfig, 5> classical = default_classical();
  NeuralConfig neural;
  SplitSpec split;
  F1Variant f1_variant = F1Variant::kStandard;
  std::vector<ModelKind> models{kAllModels.begin(), kAllModels.end()};
  int jobs = 1;
  std::uint64_t seed = 0;

  const TrainConfig& train_config(Algorithm a) const {
    return classical[static_cast<std::size_t>(a)];
  }
  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static std::array<TrainConfig, 5> default_classical();
};

// Seed of one grid cell, derived from the master seed.
std::uint64_t cell_seed(std::uint64_t master, Demographic d, ModelKind m);

struct TrainedCell {
  Demographic demographic = Demographic::kOccupation;
  ModelKind model = ModelKind::kKnn;
  std::uint64_t seed = 0;
  std::variant<TrainedModel, NeuralModel> fitted;
};

struct ModelBundle {
  ExperimentConfig config;
  std::string fingerprint;  // corpus fingerprint combined with the config
  std::string corpus_fingerprint;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
  std::string split_warning;
  // Flat key/value echo of the configuration that produced the bundle.
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::optional<FeaturePipeline> pipeline;  // present when a classical model is trained
  std::optional<TokenIndex> tokens;         // present when a neural model is trained
  std::vector<TrainedCell> cells;           // demographic-major, model order of config

  const TrainedCell& cell(Demographic d, ModelKind m) const;
};

// Splits the corpus, fits the shared feature pipeline and token index on the
// training side, and trains every (demographic, model) cell. Cells run on up
// to config.jobs threads; results do not depend on the thread count.
ModelBundle train_models(const CleanCorpus& corpus, const ExperimentConfig& config);

// Predicted class indices for each document.
std::vector<int> predict_cell(const ModelBundle& bundle, const TrainedCell& cell,
                              std::span<const CleanDocument> documents);

struct CellResult {
  Demographic demographic = Demographic::kOccupation;
  ModelKind model = ModelKind::kKnn;
  std::uint64_t seed = 0;
  ConfusionMatrix confusion;
  MetricsReport metrics;
  double majority_rate = 0.0;  // share of the most frequent true class in the test set
};

struct ModelCRank {
  ModelKind model = ModelKind::kKnn;
  std::array<double, 4> f1{};  // kAllDemographics order
  double crank = 0.0;
};

struct EvaluationReport {
  // Flat key/value echo of the effective configuration.
  std::vector<std::pair<std::string, std::string>> config_echo;
  std::string fingerprint;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::string split_warning;
  F1Variant f1_variant = F1Variant::kStandard;
  std::vector<CellResult> cells;
  std::vector<ModelCRank> cranks;

  const CellResult& cell(Demographic d, ModelKind m) const;
};

EvaluationReport evaluate_models(const ModelBundle& bundle, const CleanCorpus& corpus);

// train_models followed by evaluate_models.
EvaluationReport run_experiment(const CleanCorpus& corpus, const ExperimentConfig& config);

std::string format_text_report(const EvaluationReport& report);
nlohmann::json report_to_json(const EvaluationReport& report);

nlohmann::json bundle_to_json(const ModelBundle& bundle);
ModelBundle bundle_from_json(const nlohmann::json& j);

}  // namespace celebprof
