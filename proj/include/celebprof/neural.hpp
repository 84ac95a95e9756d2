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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "celebprof/autograd.hpp"
#include "json.hpp"

namespace celebprof {

enum class Architecture { kCnn, kLstm };

std::string_view to_string(Architecture a);
Architecture parse_architecture(std::string_view s);

struct NeuralConfig {
  int vocab_cap = 200;
  int embed_dim = 32;
  int max_seq_len = 100;
  int cnn_filters = 64;
  int cnn_kernel = 3;
  int lstm_hidden = 32;
  int epochs = 20;
  int batch_size = 8;
  double learning_rate = 0.5;
  // Global gradient-norm clip applied before each step; 0 disables it.
  double clip_norm = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static NeuralConfig from_json(const nlohmann::json& j);
};

// Token -> id mapping with pad = 0 and unk = 1; known tokens start at 2.
class TokenIndex {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  TokenIndex() = default;
  explicit TokenIndex(std::vector<std::string> tokens);

  // Keeps the `cap` most frequent tokens; frequency ties break
  // lexicographically.
  static TokenIndex build(std::span<const std::vector<std::string>> documents, int cap);

  int id(const std::string& token) const;
  // Ids for the last `max_len` tokens (no padding).
  std::vector<int> encode(std::span<const std::string> tokens, std::size_t max_len) const;
  const std::vector<std::string>& tokens() const { return tokens_; }
  // Number of embedding rows needed, including pad and unk.
  std::size_t table_rows() const { return tokens_.size() + 2; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct NeuralModel {
  Architecture architecture = Architecture::kCnn;
  NeuralConfig config;
  std::vector<std::string> label_set;
  TokenIndex index;
  // Embedding table first, then layer weights/biases, output layer last.
  std::vector<std::string> parameter_names;
  std::vector<autograd::Tensor> parameters;
  double initial_loss = 0.0;
  std::vector<double> epoch_losses;  // full training loss after each epoch

  const autograd::Tensor& parameter(std::string_view name) const;
};

// Randomly initialized, untrained model. Embedding rows are sized by
// config.vocab_cap so the table shape is fixed regardless of the index.
NeuralModel init_neural_model(Architecture architecture, const NeuralConfig& config,
                              TokenIndex index, std::vector<std::string> label_set);

// Logits [B x K]. Trailing pad ids are ignored; sequences longer than
// max_seq_len keep their last max_seq_len ids.
autograd::Tensor neural_logits(const NeuralModel& model,
                               const std::vector<std::vector<int>>& sequences);

// Mean softmax cross-entropy of the model on the given batch.
autograd::Tensor neural_loss(const NeuralModel& model,
                             const std::vector<std::vector<int>>& sequences, std::span<const int> y);

struct LstmTrace {
  // One [1 x H] row per consumed step.
  std::vector<std::vector<double>> input_gate, forget_gate, output_gate;
  std::vector<double> final_hidden;
};

// Runs the recurrence over a single sequence and records the gates.
LstmTrace lstm_trace(const NeuralModel& model, std::span<const int> sequence);

NeuralModel fit_neural(Architecture architecture, const TokenIndex& index,
                       const std::vector<std::vector<int>>& sequences, std::span<const int> y,
                       const std::vector<std::string>& label_set, const NeuralConfig& config);
NeuralModel fit_text_cnn(const TokenIndex& index, const std::vector<std::vector<int>>& sequences,
                         std::span<const int> y, const std::vector<std::string>& label_set,
                         const NeuralConfig& config);
NeuralModel fit_text_lstm(const TokenIndex& index, const std::vector<std::vector<int>>& sequences,
                          std::span<const int> y, const std::vector<std::string>& label_set,
                          const NeuralConfig& config);

std::vector<int> predict_neural(const NeuralModel& model,
                                const std::vector<std::vector<int>>& sequences);
// Class probabilities [B x K], row-major.
std::vector<double> predict_proba_neural(const NeuralModel& model,
                                         const std::vector<std::vector<int>>& sequences);

nlohmann::json neural_model_to_json(const NeuralModel& model);
NeuralModel neural_model_from_json(const nlohmann::json& j);

}  // namespace celebprof
