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

#include "celebprof/config.hpp"

#include <charconv>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "celebprof/error.hpp"

namespace celebprof {

namespace {

Error bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  return config_error("bad_value", fmt::format("{} = '{}': expected {}", key, value, expected));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw bad_value(key, value, std::is_integral_v<T> ? "an integer" : "a number");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw bad_value(key, value, "true or false");
}

std::optional<int> parse_optional_int(std::string_view key, std::string_view value) {
  if (value == "none") return std::nullopt;
  return parse_number<int>(key, value);
}

std::string format_optional_int(const std::optional<int>& v) {
  return v ? std::to_string(*v) : "none";
}

std::string format_bool(bool b) { return b ? "true" : "false"; }

std::vector<double> parse_list(std::string_view key, std::string_view value) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const std::size_t comma = std::min(value.find(',', start), value.size());
    std::string_view item = value.substr(start, comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    out.push_back(parse_number<double>(key, item));
    start = comma + 1;
  }
  return out;
}

std::string format_list(const std::vector<double>& values) { return fmt::format("{}", fmt::join(values, ",")); }

struct Key {
  std::string_view name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
  bool echoed = true;
};

#define CP_INT(NAME, FIELD)                                                               \
  Key {                                                                                   \
    NAME, [](const RunConfig& c) { return std::to_string(c.FIELD); },                     \
        [](RunConfig& c, std::string_view k, std::string_view v) {                        \
          c.FIELD = parse_number<std::remove_reference_t<decltype(c.FIELD)>>(k, v);       \
        }                                                                                 \
  }
#define CP_DOUBLE(NAME, FIELD)                                                            \
  Key {                                                                                   \
    NAME, [](const RunConfig& c) { return fmt::format("{}", c.FIELD); },                  \
        [](RunConfig& c, std::string_view k, std::string_view v) {                        \
          c.FIELD = parse_number<double>(k, v);                                           \
        }                                                                                 \
  }
#define CP_BOOL(NAME, FIELD)                                                              \
  Key {                                                                                   \
    NAME, [](const RunConfig& c) { return format_bool(c.FIELD); },                        \
        [](RunConfig& c, std::string_view k, std::string_view v) { c.FIELD = parse_bool(k, v); } \
  }
#define CP_OPT_INT(NAME, FIELD)                                                           \
  Key {                                                                                   \
    NAME, [](const RunConfig& c) { return format_optional_int(c.FIELD); },                \
        [](RunConfig& c, std::string_view k, std::string_view v) {                        \
          c.FIELD = parse_optional_int(k, v);                                             \
        }                                                                                 \
  }
#define CP_LIST(NAME, FIELD)                                                              \
  Key {                                                                                   \
    NAME, [](const RunConfig& c) { return format_list(c.FIELD); },                        \
        [](RunConfig& c, std::string_view k, std::string_view v) { c.FIELD = parse_list(k, v); } \
  }
#define CP_PATH(NAME, FIELD)                                                              \
  Key {                                                                                   \
    NAME, [](const RunConfig& c) { return c.FIELD.string(); },                            \
        [](RunConfig& c, std::string_view, std::string_view v) { c.FIELD = std::string(v); } \
  }
#define CP_ENUM(NAME, FIELD, PARSE)                                                       \
  Key {                                                                                   \
    NAME, [](const RunConfig& c) { return std::string(to_string(c.FIELD)); },             \
        [](RunConfig& c, std::string_view, std::string_view v) { c.FIELD = PARSE(v); }    \
  }

constexpr std::size_t kKnn = static_cast<std::size_t>(Algorithm::kKnn);
constexpr std::size_t kLogReg = static_cast<std::size_t>(Algorithm::kLogReg);
constexpr std::size_t kTree = static_cast<std::size_t>(Algorithm::kDecisionTree);
constexpr std::size_t kForest = static_cast<std::size_t>(Algorithm::kRandomForest);
constexpr std::size_t kSvm = static_cast<std::size_t>(Algorithm::kSvm);

std::string_view boundary_name(AgeBoundary b) {
  return b == AgeBoundary::kLowerGroup ? "lower" : "upper";
}

AgeBoundary parse_boundary(std::string_view v) {
  if (v == "lower") return AgeBoundary::kLowerGroup;
  if (v == "upper") return AgeBoundary::kUpperGroup;
  throw bad_value("corpus.age_boundary", v, "lower or upper");
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      CP_ENUM("data.source", source, parse_data_source),
      CP_PATH("data.input_dir", input_dir),
      CP_PATH("data.labels_file", labels_file),
      CP_PATH("data.archive", archive),

      CP_INT("corpus.followers_per_celebrity", corpus.followers_per_celebrity),
      CP_INT("corpus.reference_year", corpus.labels.reference_year),
      Key{"corpus.age_boundary",
          [](const RunConfig& c) { return std::string(boundary_name(c.corpus.labels.boundary)); },
          [](RunConfig& c, std::string_view, std::string_view v) {
            c.corpus.labels.boundary = parse_boundary(v);
          }},

      CP_INT("synth.celebrities", synth.n_celebrities),
      CP_INT("synth.followers", synth.followers_per_celebrity),
      CP_INT("synth.min_tweets", synth.min_tweets),
      CP_INT("synth.vocab_size", synth.vocab_size),
      CP_DOUBLE("synth.signal", synth.class_signal_strength),
      CP_INT("synth.reference_year", synth.reference_year),
      CP_INT("synth.min_tokens", synth.min_tokens_per_tweet),
      CP_INT("synth.max_tokens", synth.max_tokens_per_tweet),
      CP_LIST("synth.age_weights", synth.age_weights),
      CP_LIST("synth.gender_weights", synth.gender_weights),
      CP_LIST("synth.occupation_weights", synth.occupation_weights),
      CP_LIST("synth.fame_weights", synth.fame_weights),

      CP_DOUBLE("preprocess.urdu_threshold", preprocess.urdu_ratio_threshold),
      Key{"preprocess.ranges",
          [](const RunConfig& c) { return format_ranges(c.preprocess.urdu_ranges); },
          [](RunConfig& c, std::string_view, std::string_view v) {
            c.preprocess.urdu_ranges = parse_ranges(v);
          }},
      CP_BOOL("preprocess.strip_diacritics", preprocess.strip_diacritics),
      CP_BOOL("preprocess.keep_digits", preprocess.keep_digits),
      CP_INT("preprocess.min_tweets", preprocess.min_tweets),
      CP_BOOL("preprocess.keep_empty_documents", preprocess.keep_empty_documents),

      CP_ENUM("features.set", experiment.features.set, parse_feature_set),
      CP_INT("features.min_df", experiment.features.min_df),
      CP_BOOL("features.sublinear_tf", experiment.features.sublinear_tf),
      CP_DOUBLE("features.length_weight", experiment.features.length_weight),

      CP_INT("knn.k", experiment.classical[kKnn].k_neighbors),
      CP_DOUBLE("logreg.learning_rate", experiment.classical[kLogReg].learning_rate),
      CP_INT("logreg.epochs", experiment.classical[kLogReg].epochs),
      CP_DOUBLE("logreg.l2_penalty", experiment.classical[kLogReg].l2_penalty),
      CP_OPT_INT("dtree.max_depth", experiment.classical[kTree].max_depth),
      CP_INT("dtree.min_leaf", experiment.classical[kTree].min_leaf),
      CP_ENUM("dtree.features_per_split", experiment.classical[kTree].features_per_split,
              parse_features_per_split),
      CP_INT("rforest.n_trees", experiment.classical[kForest].n_trees),
      CP_BOOL("rforest.bootstrap", experiment.classical[kForest].bootstrap),
      CP_ENUM("rforest.features_per_split", experiment.classical[kForest].features_per_split,
              parse_features_per_split),
      CP_OPT_INT("rforest.max_depth", experiment.classical[kForest].max_depth),
      CP_INT("rforest.min_leaf", experiment.classical[kForest].min_leaf),
      CP_DOUBLE("svm.c", experiment.classical[kSvm].svm_c),
      CP_INT("svm.epochs", experiment.classical[kSvm].epochs),

      CP_INT("neural.vocab_cap", experiment.neural.vocab_cap),
      CP_INT("neural.embed_dim", experiment.neural.embed_dim),
      CP_INT("neural.max_seq_len", experiment.neural.max_seq_len),
      CP_INT("neural.cnn_filters", experiment.neural.cnn_filters),
      CP_INT("neural.cnn_kernel", experiment.neural.cnn_kernel),
      CP_INT("neural.lstm_hidden", experiment.neural.lstm_hidden),
      CP_INT("neural.epochs", experiment.neural.epochs),
      CP_INT("neural.batch_size", experiment.neural.batch_size),
      CP_DOUBLE("neural.learning_rate", experiment.neural.learning_rate),
      CP_DOUBLE("neural.clip_norm", experiment.neural.clip_norm),

      CP_DOUBLE("split.test_fraction", experiment.split.test_fraction),
      CP_ENUM("split.stratify_on", experiment.split.stratify_on, parse_demographic),

      CP_ENUM("evaluation.f1_variant", experiment.f1_variant, parse_f1_variant),
      Key{"evaluation.models",
          [](const RunConfig& c) {
            std::vector<std::string_view> names;
            for (auto m : c.experiment.models) names.push_back(to_string(m));
            return fmt::format("{}", fmt::join(names, ","));
          },
          [](RunConfig& c, std::string_view, std::string_view v) {
            c.experiment.models.clear();
            std::size_t start = 0;
            while (start <= v.size()) {
              const std::size_t comma = std::min(v.find(',', start), v.size());
              std::string_view item = v.substr(start, comma - start);
              while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
              while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
              c.experiment.models.push_back(parse_model_kind(item));
              start = comma + 1;
            }
          }},

      Key{"run.seed",
          [](const RunConfig& c) { return c.seed ? std::to_string(*c.seed) : std::string(); },
          [](RunConfig& c, std::string_view k, std::string_view v) {
            apply_seed(c, parse_number<std::uint64_t>(k, v));
          }},
      Key{"run.jobs", [](const RunConfig& c) { return std::to_string(c.experiment.jobs); },
          [](RunConfig& c, std::string_view k, std::string_view v) {
            c.experiment.jobs = parse_number<int>(k, v);
          },
          false},
      Key{"run.output_dir", [](const RunConfig& c) { return c.output_dir.string(); },
          [](RunConfig& c, std::string_view, std::string_view v) { c.output_dir = std::string(v); },
          false},
  };
  return table;
}

#undef CP_INT
#undef CP_DOUBLE
#undef CP_BOOL
#undef CP_OPT_INT
#undef CP_LIST
#undef CP_PATH
#undef CP_ENUM

}  // namespace

std::string_view to_string(DataSource s) {
  switch (s) {
    case DataSource::kDirectory: return "directory";
    case DataSource::kArchive: return "archive";
    case DataSource::kSynthetic: return "synthetic";
  }
  return "directory";
}

DataSource parse_data_source(std::string_view s) {
  if (s == "directory") return DataSource::kDirectory;
  if (s == "archive") return DataSource::kArchive;
  if (s == "synthetic") return DataSource::kSynthetic;
  throw bad_value("data.source", s, "directory, archive or synthetic");
}

void apply_seed(RunConfig& config, std::uint64_t seed) {
  config.seed = seed;
  config.synth.seed = seed;
  config.experiment.seed = seed;
  config.experiment.split.seed = seed;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  for (const auto& k : keys()) {
    if (k.name == key) {
      k.set(*this, key, value);
      return;
    }
  }
  throw config_error("unknown_key", fmt::format("unknown configuration key '{}'", key));
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& k : keys()) {
    if (k.echoed) out.emplace_back(std::string(k.name), k.get(*this));
  }
  return out;
}

std::string RunConfig::to_ini() const {
  std::string out;
  std::string section;
  for (const auto& [key, value] : entries()) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      out += fmt::format("{}[{}]\n", out.empty() ? "" : "\n", sec);
      section = sec;
    }
    out += fmt::format("{} = {}\n", key.substr(dot + 1), value);
  }
  return out;
}

void RunConfig::validate() const {
  if (!seed) throw config_error("missing_seed", "a seed is required (--seed or run.seed)");
  corpus.validate();
  preprocess.validate();
  experiment.validate();
  auto require = [](const std::filesystem::path& p, std::string_view key) {
    if (p.empty()) throw config_error("missing_path", fmt::format("{} is not set", key));
    if (!std::filesystem::exists(p)) {
      throw config_error("missing_path", fmt::format("{} '{}' does not exist", key, p.string()));
    }
  };
  switch (source) {
    case DataSource::kDirectory:
      require(input_dir, "data.input_dir");
      require(labels_file, "data.labels_file");
      break;
    case DataSource::kArchive:
      require(archive, "data.archive");
      break;
    case DataSource::kSynthetic:
      synth.validate();
      break;
  }
}

RunConfig parse_run_config(std::string_view ini_text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(ini_text)};
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw config_error("parse", fmt::format("config line {}: {}", e.line(), e.message()));
  }
  RunConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      config.set(section, body.data());
      continue;
    }
    for (const auto& [key, value] : body) config.set(section + "." + key, value.data());
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw config_error("missing_path", fmt::format("config file '{}' does not exist", path.string()));
  }
  return parse_run_config(read_text_file(path));
}

}  // namespace celebprof
