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

#include "celebprof/neural.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "celebprof/error.hpp"
#include "celebprof/random.hpp"

namespace celebprof {

namespace ag = autograd;
using ag::Tensor;

namespace {

constexpr double kEmbeddingInitScale = 1.0;

// Parameter slots, in storage order.
enum CnnSlot { kCnnEmbedding, kConvWeight, kConvBias, kCnnOutWeight, kCnnOutBias };
enum LstmSlot { kLstmEmbedding, kInputWeight, kRecurrentWeight, kLstmBias, kLstmOutWeight,
                kLstmOutBias };

Tensor glorot(Rng& rng, std::size_t rows, std::size_t cols, std::size_t fan_in,
              std::size_t fan_out) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = rng.uniform(-a, a);
  return Tensor::from(rows, cols, std::move(v), true);
}

// Trailing pads are not part of the sequence; overlong input keeps its last
// max_len ids, so the recurrence always ends on the most recent tokens.
std::span<const int> effective(std::span<const int> seq, std::size_t max_len) {
  std::size_t n = seq.size();
  while (n > 0 && seq[n - 1] == TokenIndex::kPad) --n;
  return seq.first(n).last(std::min(n, max_len));
}

void check_ids(std::span<const int> seq, std::size_t table_rows) {
  for (int id : seq) {
    if (id < 0 || static_cast<std::size_t>(id) >= table_rows) {
      throw data_error("dimension", fmt::format("token id {} outside embedding table of {} rows",
                                                id, table_rows));
    }
  }
}

Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b) {
  return ag::add_bias(ag::matmul(x, w), b);
}

Tensor cnn_logits(const NeuralModel& m, const std::vector<std::vector<int>>& seqs) {
  const auto& p = m.parameters;
  const std::size_t k = static_cast<std::size_t>(m.config.cnn_kernel);
  std::vector<Tensor> pooled;
  pooled.reserve(seqs.size());
  for (const auto& raw : seqs) {
    auto seq = effective(raw, static_cast<std::size_t>(m.config.max_seq_len));
    std::vector<int> ids(seq.begin(), seq.end());
    // Short documents are padded up to one window; the pool sees that window.
    if (ids.size() < k) ids.resize(k, TokenIndex::kPad);
    Tensor x = ag::embedding(p[kCnnEmbedding], ids, TokenIndex::kPad);
    Tensor conv = ag::relu(ag::conv1d(x, p[kConvWeight], p[kConvBias]));
    pooled.push_back(ag::max_pool_rows(conv, conv.rows()));
  }
  return dense(ag::concat_rows(pooled), p[kCnnOutWeight], p[kCnnOutBias]);
}

struct LstmState {
  Tensor h, c, i, f, o;
};

LstmState lstm_step(const NeuralModel& m, const Tensor& x, const Tensor& h, const Tensor& c) {
  const auto& p = m.parameters;
  const std::size_t hd = static_cast<std::size_t>(m.config.lstm_hidden);
  Tensor z = ag::add_bias(ag::add(ag::matmul(x, p[kInputWeight]), ag::matmul(h, p[kRecurrentWeight])),
                          p[kLstmBias]);
  LstmState s;
  s.i = ag::sigmoid(ag::slice_cols(z, 0, hd));
  s.f = ag::sigmoid(ag::slice_cols(z, hd, hd));
  Tensor g = ag::tanh(ag::slice_cols(z, 2 * hd, hd));
  s.o = ag::sigmoid(ag::slice_cols(z, 3 * hd, hd));
  s.c = ag::add(ag::mul(s.f, c), ag::mul(s.i, g));
  s.h = ag::mul(s.o, ag::tanh(s.c));
  return s;
}

Tensor lstm_logits(const NeuralModel& m, const std::vector<std::vector<int>>& seqs) {
  const auto& p = m.parameters;
  const std::size_t b = seqs.size();
  const std::size_t hd = static_cast<std::size_t>(m.config.lstm_hidden);
  std::vector<std::span<const int>> eff;
  std::size_t steps = 0;
  for (const auto& s : seqs) {
    eff.push_back(effective(s, static_cast<std::size_t>(m.config.max_seq_len)));
    steps = std::max(steps, eff.back().size());
  }
  Tensor h(b, hd);
  Tensor c(b, hd);
  std::vector<int> ids(b);
  std::vector<bool> keep(b);
  for (std::size_t t = 0; t < steps; ++t) {
    bool all = true;
    for (std::size_t r = 0; r < b; ++r) {
      keep[r] = t < eff[r].size();
      ids[r] = keep[r] ? eff[r][t] : TokenIndex::kPad;
      all = all && keep[r];
    }
    Tensor x = ag::embedding(p[kLstmEmbedding], ids, TokenIndex::kPad);
    LstmState s = lstm_step(m, x, h, c);
    if (all) {
      h = s.h;
      c = s.c;
    } else {
      h = ag::select_rows(s.h, h, keep);
      c = ag::select_rows(s.c, c, keep);
    }
  }
  return dense(h, p[kLstmOutWeight], p[kLstmOutBias]);
}

void check_labels(std::size_t n, std::span<const int> y, std::size_t n_classes) {
  if (n == 0) throw data_error("empty_input", "no training sequences");
  if (y.size() != n) {
    throw data_error("dimension", fmt::format("{} sequences with {} labels", n, y.size()));
  }
  for (int label : y) {
    if (label < 0 || static_cast<std::size_t>(label) >= n_classes) {
      throw data_error("bad_label", fmt::format("label {} outside {} classes", label, n_classes));
    }
  }
  if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y[0]; })) {
    throw data_error("degenerate_labels", "training labels contain a single class");
  }
}

double full_loss(const NeuralModel& m, const std::vector<std::vector<int>>& seqs,
                 std::span<const int> y, std::size_t batch) {
  ag::NoGradGuard guard;
  double total = 0;
  for (std::size_t start = 0; start < seqs.size(); start += batch) {
    const std::size_t end = std::min(seqs.size(), start + batch);
    std::vector<std::vector<int>> part(seqs.begin() + static_cast<std::ptrdiff_t>(start),
                                       seqs.begin() + static_cast<std::ptrdiff_t>(end));
    total += neural_loss(m, part, y.subspan(start, end - start)).item() *
             static_cast<double>(end - start);
  }
  return total / static_cast<double>(seqs.size());
}

nlohmann::json tensor_to_json(const std::string& name, const Tensor& t) {
  return {{"name", name},
          {"rows", t.rows()},
          {"cols", t.cols()},
          {"values", std::vector<double>(t.values().begin(), t.values().end())}};
}

}  // namespace

std::string_view to_string(Architecture a) { return a == Architecture::kCnn ? "cnn" : "lstm"; }

Architecture parse_architecture(std::string_view s) {
  if (s == "cnn") return Architecture::kCnn;
  if (s == "lstm") return Architecture::kLstm;
  throw config_error("bad_value", fmt::format("unknown architecture '{}'", s));
}

void NeuralConfig::validate() const {
  const std::pair<const char*, int> ints[] = {
      {"vocab_cap", vocab_cap},     {"embed_dim", embed_dim},     {"max_seq_len", max_seq_len},
      {"cnn_filters", cnn_filters}, {"cnn_kernel", cnn_kernel},   {"lstm_hidden", lstm_hidden},
      {"epochs", epochs},           {"batch_size", batch_size}};
  for (const auto& [name, value] : ints) {
    if (value <= 0) throw config_error("bad_value", fmt::format("neural.{} must be positive", name));
  }
  if (cnn_kernel > max_seq_len) {
    throw config_error("bad_value", "neural.cnn_kernel must not exceed neural.max_seq_len");
  }
  if (!(learning_rate > 0) || !std::isfinite(learning_rate)) {
    throw config_error("bad_value", "neural.learning_rate must be positive");
  }
  if (!(clip_norm >= 0) || !std::isfinite(clip_norm)) {
    throw config_error("bad_value", "neural.clip_norm must be non-negative");
  }
}

nlohmann::json NeuralConfig::to_json() const {
  return {{"vocab_cap", vocab_cap},     {"embed_dim", embed_dim},
          {"max_seq_len", max_seq_len}, {"cnn_filters", cnn_filters},
          {"cnn_kernel", cnn_kernel},   {"lstm_hidden", lstm_hidden},
          {"epochs", epochs},           {"batch_size", batch_size},
          {"learning_rate", learning_rate}, {"clip_norm", clip_norm},
          {"seed", seed}};
}

NeuralConfig NeuralConfig::from_json(const nlohmann::json& j) {
  NeuralConfig c;
  c.vocab_cap = j.at("vocab_cap").get<int>();
  c.embed_dim = j.at("embed_dim").get<int>();
  c.max_seq_len = j.at("max_seq_len").get<int>();
  c.cnn_filters = j.at("cnn_filters").get<int>();
  c.cnn_kernel = j.at("cnn_kernel").get<int>();
  c.lstm_hidden = j.at("lstm_hidden").get<int>();
  c.epochs = j.at("epochs").get<int>();
  c.batch_size = j.at("batch_size").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.clip_norm = j.at("clip_norm").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

TokenIndex::TokenIndex(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<int>(i) + 2).second) {
      throw data_error("duplicate_id", fmt::format("token '{}' listed twice", tokens_[i]));
    }
  }
}

TokenIndex TokenIndex::build(std::span<const std::vector<std::string>> documents, int cap) {
  std::map<std::string, std::size_t> freq;
  for (const auto& doc : documents) {
    for (const auto& tok : doc) ++freq[tok];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  // Stable sort on an already lexicographic list keeps the tie order.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (ranked.size() > static_cast<std::size_t>(std::max(cap, 0))) {
    ranked.resize(static_cast<std::size_t>(std::max(cap, 0)));
  }
  std::vector<std::string> tokens;
  tokens.reserve(ranked.size());
  for (auto& [tok, count] : ranked) tokens.push_back(tok);
  return TokenIndex(std::move(tokens));
}

int TokenIndex::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnk : it->second;
}

std::vector<int> TokenIndex::encode(std::span<const std::string> tokens,
                                    std::size_t max_len) const {
  std::vector<int> out;
  const std::size_t start = tokens.size() > max_len ? tokens.size() - max_len : 0;
  out.reserve(tokens.size() - start);
  for (std::size_t i = start; i < tokens.size(); ++i) out.push_back(id(tokens[i]));
  return out;
}

const Tensor& NeuralModel::parameter(std::string_view name) const {
  for (std::size_t i = 0; i < parameter_names.size(); ++i) {
    if (parameter_names[i] == name) return parameters[i];
  }
  throw internal_error("precondition", fmt::format("model has no parameter '{}'", name));
}

NeuralModel init_neural_model(Architecture architecture, const NeuralConfig& config,
                              TokenIndex index, std::vector<std::string> label_set) {
  config.validate();
  if (label_set.size() < 2) throw data_error("degenerate_labels", "need at least two classes");
  if (index.tokens().size() > static_cast<std::size_t>(config.vocab_cap)) {
    throw data_error("dimension", fmt::format("token index has {} entries, vocab_cap is {}",
                                              index.tokens().size(), config.vocab_cap));
  }
  NeuralModel m;
  m.architecture = architecture;
  m.config = config;
  m.label_set = std::move(label_set);
  m.index = std::move(index);

  Rng rng(derive_seed(config.seed, {0}));
  const std::size_t v = static_cast<std::size_t>(config.vocab_cap) + 2;
  const std::size_t d = static_cast<std::size_t>(config.embed_dim);
  const std::size_t k = m.label_set.size();
  Tensor emb(v, d, true);
  auto ev = emb.values();
  for (std::size_t i = d; i < ev.size(); ++i) ev[i] = rng.uniform(-kEmbeddingInitScale, kEmbeddingInitScale);

  if (architecture == Architecture::kCnn) {
    const std::size_t f = static_cast<std::size_t>(config.cnn_filters);
    const std::size_t w = static_cast<std::size_t>(config.cnn_kernel) * d;
    m.parameter_names = {"embedding", "conv_weight", "conv_bias", "output_weight", "output_bias"};
    m.parameters = {emb, glorot(rng, w, f, w, f), Tensor(1, f, true), glorot(rng, f, k, f, k),
                    Tensor(1, k, true)};
  } else {
    const std::size_t h = static_cast<std::size_t>(config.lstm_hidden);
    Tensor bias(1, 4 * h, true);
    // Gate blocks are ordered i, f, g, o; the forget block starts open.
    for (std::size_t j = h; j < 2 * h; ++j) bias.values()[j] = 1.0;
    m.parameter_names = {"embedding",   "lstm_input_weight", "lstm_recurrent_weight",
                         "lstm_bias",   "output_weight",     "output_bias"};
    m.parameters = {emb, glorot(rng, d, 4 * h, d, h), glorot(rng, h, 4 * h, h, h), bias,
                    glorot(rng, h, k, h, k), Tensor(1, k, true)};
  }
  return m;
}

Tensor neural_logits(const NeuralModel& model, const std::vector<std::vector<int>>& sequences) {
  const std::size_t rows = model.parameters.front().rows();
  for (const auto& s : sequences) check_ids(s, rows);
  if (sequences.empty()) return Tensor(0, model.label_set.size());
  return model.architecture == Architecture::kCnn ? cnn_logits(model, sequences)
                                                  : lstm_logits(model, sequences);
}

Tensor neural_loss(const NeuralModel& model, const std::vector<std::vector<int>>& sequences,
                   std::span<const int> y) {
  return ag::softmax_cross_entropy(neural_logits(model, sequences), y);
}

LstmTrace lstm_trace(const NeuralModel& model, std::span<const int> sequence) {
  if (model.architecture != Architecture::kLstm) {
    throw internal_error("precondition", "lstm_trace needs an LSTM model");
  }
  check_ids(sequence, model.parameters.front().rows());
  ag::NoGradGuard guard;
  const std::size_t hd = static_cast<std::size_t>(model.config.lstm_hidden);
  auto seq = effective(sequence, static_cast<std::size_t>(model.config.max_seq_len));
  Tensor h(1, hd);
  Tensor c(1, hd);
  LstmTrace trace;
  auto as_vec = [](const Tensor& t) { return std::vector<double>(t.values().begin(), t.values().end()); };
  for (int id : seq) {
    const int ids[] = {id};
    LstmState s = lstm_step(model, ag::embedding(model.parameters[kLstmEmbedding], ids), h, c);
    trace.input_gate.push_back(as_vec(s.i));
    trace.forget_gate.push_back(as_vec(s.f));
    trace.output_gate.push_back(as_vec(s.o));
    h = s.h;
    c = s.c;
  }
  trace.final_hidden = as_vec(h);
  return trace;
}

NeuralModel fit_neural(Architecture architecture, const TokenIndex& index,
                       const std::vector<std::vector<int>>& sequences, std::span<const int> y,
                       const std::vector<std::string>& label_set, const NeuralConfig& config) {
  check_labels(sequences.size(), y, label_set.size());
  NeuralModel m = init_neural_model(architecture, config, index, label_set);
  const std::size_t rows = m.parameters.front().rows();
  for (const auto& s : sequences) check_ids(s, rows);

  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  m.initial_loss = full_loss(m, sequences, y, batch);
  Rng order_rng(derive_seed(config.seed, {1}));
  std::vector<std::size_t> order(sequences.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    order_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      std::vector<std::vector<int>> xb;
      std::vector<int> yb;
      for (std::size_t i = start; i < end; ++i) {
        xb.push_back(sequences[order[i]]);
        yb.push_back(y[order[i]]);
      }
      for (auto& p : m.parameters) p.zero_grad();
      Tensor loss = neural_loss(m, xb, yb);
      if (!std::isfinite(loss.item())) {
        throw data_error("non_finite", fmt::format("training loss diverged in epoch {}", epoch + 1));
      }
      ag::backward(loss);
      loss = Tensor();  // release the graph before updating

      double norm2 = 0;
      for (auto& p : m.parameters) {
        for (double g : p.grad()) norm2 += g * g;
      }
      const double norm = std::sqrt(norm2);
      const double scale =
          config.clip_norm > 0 && norm > config.clip_norm ? config.clip_norm / norm : 1.0;
      const double step = config.learning_rate * scale;
      for (auto& p : m.parameters) {
        if (p.grad().empty()) continue;
        auto v = p.values();
        auto g = p.grad();
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= step * g[i];
      }
    }
    m.epoch_losses.push_back(full_loss(m, sequences, y, batch));
  }
  for (auto& p : m.parameters) p.zero_grad();
  return m;
}

NeuralModel fit_text_cnn(const TokenIndex& index, const std::vector<std::vector<int>>& sequences,
                         std::span<const int> y, const std::vector<std::string>& label_set,
                         const NeuralConfig& config) {
  return fit_neural(Architecture::kCnn, index, sequences, y, label_set, config);
}

NeuralModel fit_text_lstm(const TokenIndex& index, const std::vector<std::vector<int>>& sequences,
                          std::span<const int> y, const std::vector<std::string>& label_set,
                          const NeuralConfig& config) {
  return fit_neural(Architecture::kLstm, index, sequences, y, label_set, config);
}

std::vector<double> predict_proba_neural(const NeuralModel& model,
                                         const std::vector<std::vector<int>>& sequences) {
  ag::NoGradGuard guard;
  if (sequences.empty()) return {};
  return ag::softmax_rows(neural_logits(model, sequences));
}

std::vector<int> predict_neural(const NeuralModel& model,
                                const std::vector<std::vector<int>>& sequences) {
  const std::vector<double> probs = predict_proba_neural(model, sequences);
  const std::size_t k = model.label_set.size();
  std::vector<int> out(sequences.size());
  for (std::size_t r = 0; r < out.size(); ++r) {
    auto first = probs.begin() + static_cast<std::ptrdiff_t>(r * k);
    out[r] = static_cast<int>(std::max_element(first, first + static_cast<std::ptrdiff_t>(k)) - first);
  }
  return out;
}

nlohmann::json neural_model_to_json(const NeuralModel& model) {
  nlohmann::json params = nlohmann::json::array();
  for (std::size_t i = 0; i < model.parameters.size(); ++i) {
    params.push_back(tensor_to_json(model.parameter_names[i], model.parameters[i]));
  }
  return {{"architecture", to_string(model.architecture)},
          {"config", model.config.to_json()},
          {"label_set", model.label_set},
          {"tokens", model.index.tokens()},
          {"parameters", params},
          {"initial_loss", model.initial_loss},
          {"epoch_losses", model.epoch_losses}};
}

NeuralModel neural_model_from_json(const nlohmann::json& j) {
  try {
    NeuralModel m = init_neural_model(parse_architecture(j.at("architecture").get<std::string>()),
                                      NeuralConfig::from_json(j.at("config")),
                                      TokenIndex(j.at("tokens").get<std::vector<std::string>>()),
                                      j.at("label_set").get<std::vector<std::string>>());
    const auto& params = j.at("parameters");
    if (params.size() != m.parameters.size()) {
      throw data_error("corrupt", "neural model parameter count mismatch");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto values = params[i].at("values").get<std::vector<double>>();
      auto& p = m.parameters[i];
      if (params[i].at("name").get<std::string>() != m.parameter_names[i] ||
          params[i].at("rows").get<std::size_t>() != p.rows() ||
          params[i].at("cols").get<std::size_t>() != p.cols() || values.size() != p.size()) {
        throw data_error("corrupt", fmt::format("parameter '{}' has the wrong shape",
                                                m.parameter_names[i]));
      }
      std::copy(values.begin(), values.end(), p.values().begin());
    }
    m.initial_loss = j.at("initial_loss").get<double>();
    m.epoch_losses = j.at("epoch_losses").get<std::vector<double>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw data_error("corrupt", fmt::format("malformed neural model: {}", e.what()));
  }
}

}  // namespace celebprof
