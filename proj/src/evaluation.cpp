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

#include "celebprof/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>

#include "celebprof/error.hpp"
#include "celebprof/fingerprint.hpp"
#include "celebprof/random.hpp"

namespace celebprof {

using json = nlohmann::json;

// ---- metrics ----------------------------------------------------------------

std::string_view to_string(F1Variant v) { return v == F1Variant::kStandard ? "standard" : "half"; }

F1Variant parse_f1_variant(std::string_view s) {
  if (s == "standard") return F1Variant::kStandard;
  if (s == "half") return F1Variant::kHalf;
  throw config_error("bad_value", fmt::format("unknown f1 variant '{}'", s));
}

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 std::vector<std::string> class_order) {
  if (y_true.size() != y_pred.size()) {
    throw data_error("dimension", fmt::format("{} true labels but {} predictions", y_true.size(),
                                              y_pred.size()));
  }
  const std::size_t k = class_order.size();
  ConfusionMatrix cm{std::move(class_order), std::vector<std::int64_t>(k * k, 0)};
  auto check = [k](int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= k) {
      throw data_error("bad_label", fmt::format("label index {} outside {} classes", label, k));
    }
    return static_cast<std::size_t>(label);
  };
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    ++cm.counts[check(y_true[i]) * k + check(y_pred[i])];
  }
  return cm;
}

ConfusionMatrix confusion_matrix(std::span<const std::string> y_true,
                                 std::span<const std::string> y_pred,
                                 std::vector<std::string> class_order) {
  auto to_index = [&](std::span<const std::string> labels) {
    std::vector<int> out;
    out.reserve(labels.size());
    for (const auto& label : labels) {
      auto it = std::find(class_order.begin(), class_order.end(), label);
      if (it == class_order.end()) {
        throw data_error("bad_label", fmt::format("unknown label '{}'", label));
      }
      out.push_back(static_cast<int>(it - class_order.begin()));
    }
    return out;
  };
  const auto t = to_index(y_true);
  const auto p = to_index(y_pred);
  return confusion_matrix(t, p, std::move(class_order));
}

MetricsReport classification_metrics(const ConfusionMatrix& cm, F1Variant variant) {
  const std::size_t k = cm.size();
  const std::int64_t total = cm.total();
  if (k == 0 || total == 0) throw data_error("empty_input", "confusion matrix is empty");
  auto ratio = [](double num, double den) { return den > 0 ? num / den : 0.0; };

  MetricsReport r;
  r.f1_variant = variant;
  std::int64_t trace = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::int64_t row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += cm.at(c, j);
      col += cm.at(j, c);
    }
    const double tp = static_cast<double>(cm.at(c, c));
    trace += cm.at(c, c);
    ClassMetrics m;
    m.precision = ratio(tp, static_cast<double>(col));
    m.recall = ratio(tp, static_cast<double>(row));
    const double pr = m.precision * m.recall;
    m.f1 = ratio(variant == F1Variant::kStandard ? 2 * pr : pr, m.precision + m.recall);
    r.per_class.push_back(m);
    r.macro_precision += m.precision;
    r.macro_recall += m.recall;
    r.macro_f1 += m.f1;
  }
  const double kd = static_cast<double>(k);
  r.macro_precision /= kd;
  r.macro_recall /= kd;
  r.macro_f1 /= kd;
  r.accuracy = static_cast<double>(trace) / static_cast<double>(total);
  return r;
}

double crank(std::span<const double, 4> f1) {
  double inv = 0;
  for (double v : f1) {
    if (!(v > 0)) return 0.0;
    inv += 1.0 / v;
  }
  return 4.0 / inv;
}

// ---- splitting --------------------------------------------------------------

void SplitSpec::validate() const {
  if (!(test_fraction > 0 && test_fraction < 1)) {
    throw config_error("bad_value", "split.test_fraction must lie strictly between 0 and 1");
  }
}

Split stratified_split(std::span<const LabeledDocument> documents, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = documents.size();
  const auto n_test = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test >= n) {
    throw data_error("empty_split", fmt::format("test_fraction {} leaves an empty side with {} documents",
                                                spec.test_fraction, n));
  }

  std::map<int, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < n; ++i) {
    strata[label_index(documents[i].labels, spec.stratify_on)].push_back(i);
  }
  Split split;
  std::vector<bool> in_test(n, false);
  const bool can_stratify = std::all_of(strata.begin(), strata.end(),
                                        [](const auto& s) { return s.second.size() >= 2; });
  if (can_stratify) {
    // Largest-remainder allocation of n_test across strata; remainder ties go
    // to the lower class index.
    std::vector<std::pair<int, std::size_t>> alloc;
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (const auto& [cls, members] : strata) {
      const double exact = spec.test_fraction * static_cast<double>(members.size());
      const auto base = static_cast<std::size_t>(std::floor(exact));
      remainders.emplace_back(exact - static_cast<double>(base), alloc.size());
      alloc.emplace_back(cls, base);
      assigned += base;
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < n_test && i < remainders.size(); ++i, ++assigned) {
      ++alloc[remainders[i].second].second;
    }
    for (const auto& [cls, count] : alloc) {
      std::vector<std::size_t> members = strata[cls];
      Rng rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(cls)}));
      rng.shuffle(members);
      for (std::size_t i = 0; i < count; ++i) in_test[members[i]] = true;
    }
  } else {
    split.stratified = false;
    split.warning = fmt::format("a {} class has fewer than 2 members; split is not stratified",
                                to_string(spec.stratify_on));
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    Rng rng(spec.seed);
    rng.shuffle(all);
    for (std::size_t i = 0; i < n_test; ++i) in_test[all[i]] = true;
  }
  for (std::size_t i = 0; i < n; ++i) (in_test[i] ? split.test : split.train).push_back(i);
  return split;
}

// ---- model kinds ------------------------------------------------------------

namespace {

struct ModelInfo {
  ModelKind kind;
  std::string_view key;
  std::string_view display;
};

constexpr ModelInfo kModelInfo[] = {
    {ModelKind::kKnn, "knn", "KNN"},
    {ModelKind::kLogReg, "logreg", "Logistic Regression"},
    {ModelKind::kDecisionTree, "dtree", "Decision Tree"},
    {ModelKind::kRandomForest, "rforest", "Random Forest"},
    {ModelKind::kSvm, "svm", "SVM"},
    {ModelKind::kCnn, "cnn", "CNN"},
    {ModelKind::kLstm, "lstm", "LSTM"},
};

Algorithm algorithm_of(ModelKind m) {
  switch (m) {
    case ModelKind::kKnn: return Algorithm::kKnn;
    case ModelKind::kLogReg: return Algorithm::kLogReg;
    case ModelKind::kDecisionTree: return Algorithm::kDecisionTree;
    case ModelKind::kRandomForest: return Algorithm::kRandomForest;
    case ModelKind::kSvm: return Algorithm::kSvm;
    default: throw internal_error("unreachable", "neural model has no classical algorithm");
  }
}

}  // namespace

std::string_view to_string(ModelKind m) { return kModelInfo[static_cast<std::size_t>(m)].key; }

std::string_view display_name(ModelKind m) {
  return kModelInfo[static_cast<std::size_t>(m)].display;
}

ModelKind parse_model_kind(std::string_view s) {
  for (const auto& info : kModelInfo) {
    if (info.key == s) return info.kind;
  }
  throw config_error("bad_value", fmt::format("unknown model '{}'", s));
}

bool is_neural(ModelKind m) { return m == ModelKind::kCnn || m == ModelKind::kLstm; }

// ---- experiment config --------------------------------------------------------

std::array<TrainConfig, 5> ExperimentConfig::default_classical() {
  std::array<TrainConfig, 5> out;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].algorithm = static_cast<Algorithm>(i);
  // A single tree considers every feature; subsampling is the forest's job.
  out[static_cast<std::size_t>(Algorithm::kDecisionTree)].features_per_split = FeaturesPerSplit::kAll;
  return out;
}

void ExperimentConfig::validate() const {
  for (std::size_t i = 0; i < classical.size(); ++i) {
    if (classical[i].algorithm != static_cast<Algorithm>(i)) {
      throw internal_error("precondition", "classical configs are out of order");
    }
    classical[i].validate();
  }
  neural.validate();
  split.validate();
  if (features.min_df < 1) throw config_error("bad_value", "features.min_df must be at least 1");
  if (!(features.length_weight >= 0.0) || !std::isfinite(features.length_weight)) {
    throw config_error("bad_value", "features.length_weight must be non-negative");
  }
  if (models.empty()) throw config_error("bad_value", "no models selected");
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (std::find(models.begin(), models.begin() + static_cast<std::ptrdiff_t>(i), models[i]) !=
        models.begin() + static_cast<std::ptrdiff_t>(i)) {
      throw config_error("bad_value", fmt::format("model '{}' listed twice", to_string(models[i])));
    }
  }
  if (jobs < 1) throw config_error("bad_value", "jobs must be at least 1");
}

json ExperimentConfig::to_json() const {
  json classical_json = json::array();
  for (const auto& c : classical) classical_json.push_back(c.to_json());
  json model_names = json::array();
  for (auto m : models) model_names.push_back(to_string(m));
  return {{"features",
           {{"set", to_string(features.set)},
            {"min_df", features.min_df},
            {"sublinear_tf", features.sublinear_tf},
            {"length_weight", features.length_weight}}},
          {"classical", classical_json},
          {"neural", neural.to_json()},
          {"split",
           {{"test_fraction", split.test_fraction},
            {"stratify_on", to_string(split.stratify_on)},
            {"seed", split.seed}}},
          {"f1_variant", to_string(f1_variant)},
          {"models", model_names},
          {"seed", seed}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  const auto& f = j.at("features");
  c.features.set = parse_feature_set(f.at("set").get<std::string>());
  c.features.min_df = f.at("min_df").get<int>();
  c.features.sublinear_tf = f.at("sublinear_tf").get<bool>();
  c.features.length_weight = f.at("length_weight").get<double>();
  const auto& cl = j.at("classical");
  if (cl.size() != c.classical.size()) throw data_error("corrupt", "classical config count mismatch");
  for (std::size_t i = 0; i < c.classical.size(); ++i) c.classical[i] = TrainConfig::from_json(cl[i]);
  c.neural = NeuralConfig::from_json(j.at("neural"));
  const auto& s = j.at("split");
  c.split.test_fraction = s.at("test_fraction").get<double>();
  c.split.stratify_on = parse_demographic(s.at("stratify_on").get<std::string>());
  c.split.seed = s.at("seed").get<std::uint64_t>();
  c.f1_variant = parse_f1_variant(j.at("f1_variant").get<std::string>());
  c.models.clear();
  for (const auto& m : j.at("models")) c.models.push_back(parse_model_kind(m.get<std::string>()));
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

std::uint64_t cell_seed(std::uint64_t master, Demographic d, ModelKind m) {
  return derive_seed(master, {0x63656c6cULL, static_cast<std::uint64_t>(d),
                              static_cast<std::uint64_t>(m)});
}

// ---- training ---------------------------------------------------------------

const TrainedCell& ModelBundle::cell(Demographic d, ModelKind m) const {
  for (const auto& c : cells) {
    if (c.demographic == d && c.model == m) return c;
  }
  throw data_error("missing_model", fmt::format("bundle has no {} model for {}", to_string(m),
                                                to_string(d)));
}

namespace {

std::vector<CleanDocument> select_documents(const CleanCorpus& corpus,
                                            std::span<const std::size_t> indices) {
  std::vector<CleanDocument> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(corpus.documents[i].document);
  return out;
}

std::vector<std::vector<int>> encode_all(const TokenIndex& index,
                                         std::span<const CleanDocument> docs, int max_len) {
  std::vector<std::vector<int>> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(index.encode(d.tokens, static_cast<std::size_t>(max_len)));
  return out;
}

// Runs task(i) for i in [0, n) on up to `jobs` threads. The first failure by
// index is rethrown after every worker has finished.
template <typename Task>
void parallel_for(std::size_t n, int jobs, Task task) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Error annotate(const Error& e, Demographic d, ModelKind m) {
  return Error(e.kind(), e.code(), fmt::format("{}/{}: {}", to_string(d), to_string(m), e.what()));
}

std::string bundle_fingerprint(const std::string& corpus_fingerprint, const ExperimentConfig& c) {
  json j = c.to_json();
  return fingerprint(corpus_fingerprint + "\n" + j.dump());
}

}  // namespace

ModelBundle train_models(const CleanCorpus& corpus, const ExperimentConfig& config) {
  config.validate();
  if (corpus.documents.empty()) throw data_error("empty_input", "corpus has no documents");
  const Split split = stratified_split(corpus.documents, config.split);

  ModelBundle bundle;
  bundle.config = config;
  bundle.corpus_fingerprint = corpus.config_fingerprint;
  bundle.fingerprint = bundle_fingerprint(corpus.config_fingerprint, config);
  bundle.split_warning = split.warning;
  for (auto i : split.train) bundle.train_ids.push_back(corpus.documents[i].document.celebrity_id);
  for (auto i : split.test) bundle.test_ids.push_back(corpus.documents[i].document.celebrity_id);

  const auto train_docs = select_documents(corpus, split.train);
  const bool any_classical = std::any_of(config.models.begin(), config.models.end(),
                                         [](ModelKind m) { return !is_neural(m); });
  const bool any_neural = std::any_of(config.models.begin(), config.models.end(), is_neural);
  Matrix x_train;
  std::vector<std::vector<int>> seq_train;
  if (any_classical) {
    bundle.pipeline = FeaturePipeline::fit(train_docs, config.features);
    x_train = bundle.pipeline->transform(train_docs);
  }
  if (any_neural) {
    std::vector<std::vector<std::string>> token_lists;
    for (const auto& d : train_docs) token_lists.push_back(d.tokens);
    bundle.tokens = TokenIndex::build(token_lists, config.neural.vocab_cap);
    seq_train = encode_all(*bundle.tokens, train_docs, config.neural.max_seq_len);
  }

  for (auto d : kAllDemographics) {
    for (auto m : config.models) bundle.cells.push_back({d, m, cell_seed(config.seed, d, m), {}});
  }
  parallel_for(bundle.cells.size(), config.jobs, [&](std::size_t i) {
    TrainedCell& cell = bundle.cells[i];
    std::vector<int> y;
    y.reserve(split.train.size());
    for (auto idx : split.train) y.push_back(label_index(corpus.documents[idx].labels, cell.demographic));
    const auto& labels = class_names(cell.demographic);
    try {
      if (is_neural(cell.model)) {
        NeuralConfig nc = config.neural;
        nc.seed = cell.seed;
        const auto arch = cell.model == ModelKind::kCnn ? Architecture::kCnn : Architecture::kLstm;
        cell.fitted = fit_neural(arch, *bundle.tokens, seq_train, y, labels, nc);
      } else {
        TrainConfig tc = config.train_config(algorithm_of(cell.model));
        tc.seed = cell.seed;
        cell.fitted = fit_classical(x_train, y, labels, tc);
      }
    } catch (const Error& e) {
      throw annotate(e, cell.demographic, cell.model);
    }
  });
  return bundle;
}

std::vector<int> predict_cell(const ModelBundle& bundle, const TrainedCell& cell,
                              std::span<const CleanDocument> documents) {
  if (const auto* nm = std::get_if<NeuralModel>(&cell.fitted)) {
    return predict_neural(*nm, encode_all(nm->index, documents, nm->config.max_seq_len));
  }
  if (!bundle.pipeline) throw data_error("corrupt", "bundle has no feature pipeline");
  return predict_classical(std::get<TrainedModel>(cell.fitted), bundle.pipeline->transform(documents));
}

// ---- evaluation -------------------------------------------------------------

const CellResult& EvaluationReport::cell(Demographic d, ModelKind m) const {
  for (const auto& c : cells) {
    if (c.demographic == d && c.model == m) return c;
  }
  throw data_error("missing_model", fmt::format("report has no {} cell for {}", to_string(m),
                                                to_string(d)));
}

EvaluationReport evaluate_models(const ModelBundle& bundle, const CleanCorpus& corpus) {
  if (bundle.corpus_fingerprint != corpus.config_fingerprint) {
    throw data_error("fingerprint_mismatch",
                     fmt::format("models were trained on corpus {} but got corpus {}",
                                 bundle.corpus_fingerprint, corpus.config_fingerprint));
  }
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
    by_id.emplace(corpus.documents[i].document.celebrity_id, i);
  }
  std::vector<std::size_t> test;
  for (const auto& id : bundle.test_ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw data_error("missing_document", fmt::format("test document '{}' not in corpus", id));
    test.push_back(it->second);
  }
  if (test.empty()) throw data_error("empty_input", "bundle has no test documents");
  const auto test_docs = select_documents(corpus, test);

  Matrix x_test;
  if (bundle.pipeline) x_test = bundle.pipeline->transform(test_docs);
  std::vector<std::vector<int>> seq_test;
  if (bundle.tokens) {
    seq_test = encode_all(*bundle.tokens, test_docs, bundle.config.neural.max_seq_len);
  }

  EvaluationReport report;
  report.fingerprint = bundle.fingerprint;
  report.config_echo = bundle.config_echo;
  report.n_train = bundle.train_ids.size();
  report.n_test = test.size();
  report.split_warning = bundle.split_warning;
  report.f1_variant = bundle.config.f1_variant;
  report.cells.resize(bundle.cells.size());
  parallel_for(bundle.cells.size(), bundle.config.jobs, [&](std::size_t i) {
    const TrainedCell& cell = bundle.cells[i];
    try {
      std::vector<int> truth;
      for (auto idx : test) truth.push_back(label_index(corpus.documents[idx].labels, cell.demographic));
      std::vector<int> pred;
      if (const auto* nm = std::get_if<NeuralModel>(&cell.fitted)) {
        pred = predict_neural(*nm, seq_test);
      } else {
        pred = predict_classical(std::get<TrainedModel>(cell.fitted), x_test);
      }
      CellResult& r = report.cells[i];
      r.demographic = cell.demographic;
      r.model = cell.model;
      r.seed = cell.seed;
      r.confusion = confusion_matrix(truth, pred, class_names(cell.demographic));
      r.metrics = classification_metrics(r.confusion, bundle.config.f1_variant);
      std::int64_t majority = 0;
      for (std::size_t t = 0; t < r.confusion.size(); ++t) {
        std::int64_t row = 0;
        for (std::size_t p = 0; p < r.confusion.size(); ++p) row += r.confusion.at(t, p);
        majority = std::max(majority, row);
      }
      r.majority_rate = static_cast<double>(majority) / static_cast<double>(truth.size());
    } catch (const Error& e) {
      throw annotate(e, cell.demographic, cell.model);
    }
  });

  for (auto m : bundle.config.models) {
    ModelCRank c;
    c.model = m;
    for (std::size_t di = 0; di < kAllDemographics.size(); ++di) {
      c.f1[di] = report.cell(kAllDemographics[di], m).metrics.macro_f1;
    }
    c.crank = crank(c.f1);
    report.cranks.push_back(c);
  }
  return report;
}

EvaluationReport run_experiment(const CleanCorpus& corpus, const ExperimentConfig& config) {
  return evaluate_models(train_models(corpus, config), corpus);
}

// ---- report formatting --------------------------------------------------------

namespace {

std::string title_case(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

json confusion_to_json(const ConfusionMatrix& cm) {
  json rows = json::array();
  for (std::size_t t = 0; t < cm.size(); ++t) {
    json row = json::array();
    for (std::size_t p = 0; p < cm.size(); ++p) row.push_back(cm.at(t, p));
    rows.push_back(row);
  }
  return {{"class_order", cm.class_order}, {"counts", rows}};
}

}  // namespace

std::string format_text_report(const EvaluationReport& report) {
  std::string out = "Celebrity profiling evaluation\n";
  out += fmt::format("fingerprint: {}\n", report.fingerprint);
  out += fmt::format("documents: train {} / test {}\n", report.n_train, report.n_test);
  out += fmt::format("metrics: macro-averaged, f1_variant={}\n", to_string(report.f1_variant));
  if (!report.split_warning.empty()) out += fmt::format("warning: {}\n", report.split_warning);
  if (!report.config_echo.empty()) {
    out += "\n[config]\n";
    for (const auto& [key, value] : report.config_echo) out += fmt::format("{} = {}\n", key, value);
  }

  std::vector<ModelKind> models;
  for (const auto& c : report.cranks) models.push_back(c.model);
  std::size_t name_width = 5;
  for (auto m : models) name_width = std::max(name_width, display_name(m).size());

  for (auto d : kAllDemographics) {
    out += fmt::format("\n{}\n", title_case(to_string(d)));
    out += fmt::format("{:<{}}  {:>8}  {:>8}\n", "Model", name_width, "F1-Score", "Accuracy");
    out += fmt::format("{:-<{}}  {:->8}  {:->8}\n", "", name_width, "", "");
    for (auto m : models) {
      const auto& c = report.cell(d, m);
      out += fmt::format("{:<{}}  {:>8.4f}  {:>8.4f}\n", display_name(m), name_width,
                         c.metrics.macro_f1, c.metrics.accuracy);
    }
  }

  out += "\ncRank\n";
  out += fmt::format("{:<{}}", "Model", name_width);
  for (auto d : kAllDemographics) out += fmt::format("  {:>10}", title_case(to_string(d)));
  out += fmt::format("  {:>8}\n", "cRank");
  out += fmt::format("{:-<{}}", "", name_width);
  for (std::size_t i = 0; i < kAllDemographics.size(); ++i) out += fmt::format("  {:->10}", "");
  out += fmt::format("  {:->8}\n", "");
  for (const auto& c : report.cranks) {
    out += fmt::format("{:<{}}", display_name(c.model), name_width);
    for (double f : c.f1) out += fmt::format("  {:>10.4f}", f);
    out += fmt::format("  {:>8.4f}\n", c.crank);
  }
  return out;
}

json report_to_json(const EvaluationReport& report) {
  json config = json::array();
  for (const auto& [key, value] : report.config_echo) config.push_back({key, value});
  json cells = json::array();
  for (const auto& c : report.cells) {
    json per_class = json::array();
    for (std::size_t i = 0; i < c.metrics.per_class.size(); ++i) {
      const auto& m = c.metrics.per_class[i];
      per_class.push_back({{"class", c.confusion.class_order[i]},
                           {"precision", m.precision},
                           {"recall", m.recall},
                           {"f1", m.f1}});
    }
    cells.push_back({{"demographic", to_string(c.demographic)},
                     {"model", to_string(c.model)},
                     {"seed", c.seed},
                     {"accuracy", c.metrics.accuracy},
                     {"macro_precision", c.metrics.macro_precision},
                     {"macro_recall", c.metrics.macro_recall},
                     {"macro_f1", c.metrics.macro_f1},
                     {"majority_rate", c.majority_rate},
                     {"per_class", per_class},
                     {"confusion", confusion_to_json(c.confusion)}});
  }
  json cranks = json::array();
  for (const auto& c : report.cranks) {
    json f1 = json::object();
    for (std::size_t i = 0; i < kAllDemographics.size(); ++i) {
      f1[std::string(to_string(kAllDemographics[i]))] = c.f1[i];
    }
    cranks.push_back({{"model", to_string(c.model)}, {"f1_by_demographic", f1}, {"crank", c.crank}});
  }
  return {{"format_version", kCorpusFormatVersion},
          {"kind", "report"},
          {"fingerprint", report.fingerprint},
          {"f1_variant", to_string(report.f1_variant)},
          {"averaging", "macro"},
          {"n_train", report.n_train},
          {"n_test", report.n_test},
          {"split_warning", report.split_warning},
          {"config", config},
          {"cells", cells},
          {"crank", cranks}};
}

// ---- bundle persistence -------------------------------------------------------

json bundle_to_json(const ModelBundle& bundle) {
  json cells = json::array();
  for (const auto& c : bundle.cells) {
    json entry = {{"demographic", to_string(c.demographic)},
                  {"model", to_string(c.model)},
                  {"seed", c.seed}};
    if (const auto* nm = std::get_if<NeuralModel>(&c.fitted)) {
      entry["neural"] = neural_model_to_json(*nm);
    } else {
      entry["classical"] = model_to_json(std::get<TrainedModel>(c.fitted));
    }
    cells.push_back(std::move(entry));
  }
  return {{"format_version", kCorpusFormatVersion},
          {"kind", "models"},
          {"config", bundle.config.to_json()},
          {"fingerprint", bundle.fingerprint},
          {"corpus_fingerprint", bundle.corpus_fingerprint},
          {"train_ids", bundle.train_ids},
          {"test_ids", bundle.test_ids},
          {"split_warning", bundle.split_warning},
          {"config_echo", bundle.config_echo},
          {"pipeline", bundle.pipeline ? bundle.pipeline->to_json() : json(nullptr)},
          {"tokens", bundle.tokens ? json(bundle.tokens->tokens()) : json(nullptr)},
          {"cells", cells}};
}

ModelBundle bundle_from_json(const json& j) {
  try {
    ModelBundle b;
    b.config = ExperimentConfig::from_json(j.at("config"));
    b.fingerprint = j.at("fingerprint").get<std::string>();
    b.corpus_fingerprint = j.at("corpus_fingerprint").get<std::string>();
    b.train_ids = j.at("train_ids").get<std::vector<std::string>>();
    b.test_ids = j.at("test_ids").get<std::vector<std::string>>();
    b.split_warning = j.at("split_warning").get<std::string>();
    b.config_echo =
        j.at("config_echo").get<std::vector<std::pair<std::string, std::string>>>();
    if (!j.at("pipeline").is_null()) b.pipeline = FeaturePipeline::from_json(j.at("pipeline"));
    if (!j.at("tokens").is_null()) {
      b.tokens = TokenIndex(j.at("tokens").get<std::vector<std::string>>());
    }
    for (const auto& c : j.at("cells")) {
      TrainedCell cell;
      cell.demographic = parse_demographic(c.at("demographic").get<std::string>());
      cell.model = parse_model_kind(c.at("model").get<std::string>());
      cell.seed = c.at("seed").get<std::uint64_t>();
      if (c.contains("neural")) {
        cell.fitted = neural_model_from_json(c.at("neural"));
      } else {
        cell.fitted = model_from_json(c.at("classical"));
      }
      b.cells.push_back(std::move(cell));
    }
    return b;
  } catch (const json::exception& e) {
    throw data_error("corrupt", fmt::format("malformed model bundle: {}", e.what()));
  }
}

}  // namespace celebprof
