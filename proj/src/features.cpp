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

#include "celebprof/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "celebprof/error.hpp"

namespace celebprof {

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> document_frequency,
                       std::size_t n_documents)
    : terms_(std::move(terms)), df_(std::move(document_frequency)), n_documents_(n_documents) {
  if (terms_.size() != df_.size()) {
    throw internal_error("dimension", "vocabulary terms and frequencies differ in length");
  }
  index_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (i > 0 && !(terms_[i - 1] < terms_[i])) {
      throw data_error("corrupt", "vocabulary terms are not strictly increasing");
    }
    if (df_[i] < 1 || df_[i] > n_documents_) {
      throw data_error("corrupt", fmt::format("document frequency of '{}' out of range", terms_[i]));
    }
    index_.emplace(terms_[i], static_cast<std::uint32_t>(i));
  }
}

std::optional<std::uint32_t> Vocabulary::index_of(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary build_vocabulary(std::span<const std::vector<std::string>> documents, int min_df) {
  if (documents.empty()) throw data_error("empty_input", "cannot build a vocabulary from no documents");
  std::map<std::string, std::uint32_t> df;
  for (const auto& doc : documents) {
    std::set<std::string_view> seen(doc.begin(), doc.end());
    for (auto term : seen) ++df[std::string(term)];
  }
  std::vector<std::string> terms;
  std::vector<std::uint32_t> freqs;
  for (auto& [term, count] : df) {
    if (static_cast<int>(count) >= min_df) {
      terms.push_back(term);
      freqs.push_back(count);
    }
  }
  if (terms.empty()) {
    throw data_error("empty_vocabulary",
                     fmt::format("no term reaches min_df={} in {} documents", min_df,
                                 documents.size()));
  }
  return Vocabulary(std::move(terms), std::move(freqs), documents.size());
}

Vocabulary build_vocabulary(std::span<const CleanDocument> documents, int min_df) {
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(documents.size());
  for (const auto& d : documents) tokens.push_back(d.tokens);
  return build_vocabulary(tokens, min_df);
}

SparseRow count_vectorize(std::span<const std::string> tokens, const Vocabulary& vocabulary) {
  std::map<std::uint32_t, double> counts;
  for (const auto& t : tokens) {
    if (auto idx = vocabulary.index_of(t)) counts[*idx] += 1.0;
  }
  return {counts.begin(), counts.end()};
}

double TfidfModel::idf(std::uint32_t column) const {
  return std::log(static_cast<double>(vocabulary.n_documents()) /
                  static_cast<double>(vocabulary.document_frequency(column))) +
         1.0;
}

void l2_normalize_rows(FeatureMatrix& matrix) {
  for (auto& row : matrix.rows) {
    double sq = 0;
    for (const auto& [c, v] : row) sq += v * v;
    if (sq == 0) continue;
    const double norm = std::sqrt(sq);
    for (auto& [c, v] : row) v /= norm;
  }
}

FeatureMatrix tfidf_transform(const FeatureMatrix& counts, const TfidfModel& model,
                              bool l2_normalize) {
  if (counts.n_columns != model.vocabulary.size()) {
    throw data_error("dimension", fmt::format("count matrix has {} columns, vocabulary has {}",
                                              counts.n_columns, model.vocabulary.size()));
  }
  FeatureMatrix out;
  out.n_columns = counts.n_columns;
  out.row_ids = counts.row_ids;
  out.rows.reserve(counts.rows.size());
  for (const auto& row : counts.rows) {
    SparseRow weighted;
    weighted.reserve(row.size());
    for (const auto& [c, count] : row) {
      if (c >= counts.n_columns) {
        throw data_error("dimension", fmt::format("column {} out of range", c));
      }
      if (count <= 0) continue;
      const double tf = model.sublinear_tf ? 1.0 + std::log(count) : count;
      weighted.emplace_back(c, tf * model.idf(c));
    }
    out.rows.push_back(std::move(weighted));
  }
  if (l2_normalize) l2_normalize_rows(out);
  return out;
}

std::array<double, 6> tweet_length_features(const CleanDocument& document) {
  const auto& lengths = document.per_tweet_lengths;
  if (lengths.empty()) {
    throw data_error("precondition",
                     fmt::format("document '{}' has no retained tweets", document.celebrity_id));
  }
  std::array<double, 6> out{};
  auto summarize = [&](auto get, std::size_t offset) {
    double sum = 0, mx = get(lengths.front());
    for (const auto& l : lengths) {
      sum += get(l);
      mx = std::max(mx, static_cast<double>(get(l)));
    }
    const double n = static_cast<double>(lengths.size());
    const double mean = sum / n;
    double var = 0;
    for (const auto& l : lengths) var += (get(l) - mean) * (get(l) - mean);
    out[offset] = mean;
    out[offset + 1] = std::sqrt(var / n);
    out[offset + 2] = mx;
  };
  summarize([](const TweetLength& l) { return static_cast<double>(l.token_count); }, 0);
  summarize([](const TweetLength& l) { return static_cast<double>(l.char_count); }, 3);
  return out;
}

std::string format_sparse_dump(const FeatureMatrix& matrix) {
  std::string out;
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    out += r < matrix.row_ids.size() ? matrix.row_ids[r] : std::to_string(r);
    out.push_back('\t');
    bool first = true;
    for (const auto& [c, v] : matrix.rows[r]) {
      if (!first) out.push_back(' ');
      first = false;
      out += fmt::format("{}:{}", c, v);
    }
    out.push_back('\n');
  }
  return out;
}

std::string_view to_string(FeatureSet set) {
  switch (set) {
    case FeatureSet::kCounts:
      return "counts";
    case FeatureSet::kTfidf:
      return "tfidf";
    case FeatureSet::kTfidfLength:
      return "tfidf+length";
  }
  return "?";
}

FeatureSet parse_feature_set(std::string_view s) {
  if (s == "counts") return FeatureSet::kCounts;
  if (s == "tfidf") return FeatureSet::kTfidf;
  if (s == "tfidf+length") return FeatureSet::kTfidfLength;
  throw config_error("bad_value", fmt::format("unknown feature set '{}'", s));
}

FeaturePipeline FeaturePipeline::fit(std::span<const CleanDocument> train,
                                     const FeatureOptions& options) {
  FeaturePipeline p;
  p.options_ = options;
  p.tfidf_.vocabulary = build_vocabulary(train, options.min_df);
  p.tfidf_.sublinear_tf = options.sublinear_tf;
  if (options.set == FeatureSet::kTfidfLength) {
    std::vector<std::array<double, 6>> rows;
    for (const auto& d : train) rows.push_back(tweet_length_features(d));
    const double n = static_cast<double>(rows.size());
    for (std::size_t k = 0; k < 6; ++k) {
      double sum = 0;
      for (const auto& r : rows) sum += r[k];
      const double mean = sum / n;
      double var = 0;
      for (const auto& r : rows) var += (r[k] - mean) * (r[k] - mean);
      const double sd = std::sqrt(var / n);
      p.length_mean_[k] = mean;
      p.length_scale_[k] = sd > 1e-12 ? sd : 1.0;
    }
  }
  return p;
}

FeatureMatrix FeaturePipeline::text_features(std::span<const CleanDocument> documents) const {
  FeatureMatrix counts;
  counts.n_columns = tfidf_.vocabulary.size();
  for (const auto& d : documents) {
    counts.rows.push_back(count_vectorize(d.tokens, tfidf_.vocabulary));
    counts.row_ids.push_back(d.celebrity_id);
  }
  if (options_.set == FeatureSet::kCounts) {
    l2_normalize_rows(counts);
    return counts;
  }
  return tfidf_transform(counts, tfidf_);
}

std::size_t FeaturePipeline::width() const {
  return tfidf_.vocabulary.size() + (options_.set == FeatureSet::kTfidfLength ? 6 : 0);
}

Matrix FeaturePipeline::transform(std::span<const CleanDocument> documents) const {
  const FeatureMatrix text = text_features(documents);
  Matrix out(documents.size(), width());
  for (std::size_t r = 0; r < documents.size(); ++r) {
    auto row = out.row(r);
    for (const auto& [c, v] : text.rows[r]) row[c] = v;
    if (options_.set == FeatureSet::kTfidfLength) {
      const std::size_t base = tfidf_.vocabulary.size();
      if (documents[r].per_tweet_lengths.empty()) continue;  // kept empty documents
      const auto lengths = tweet_length_features(documents[r]);
      for (std::size_t k = 0; k < 6; ++k) {
        row[base + k] =
            options_.length_weight * (lengths[k] - length_mean_[k]) / length_scale_[k];
      }
    }
  }
  return out;
}

nlohmann::json FeaturePipeline::to_json() const {
  std::vector<std::uint32_t> df;
  for (std::uint32_t c = 0; c < tfidf_.vocabulary.size(); ++c) {
    df.push_back(tfidf_.vocabulary.document_frequency(c));
  }
  return {{"feature_set", to_string(options_.set)},
          {"min_df", options_.min_df},
          {"sublinear_tf", options_.sublinear_tf},
          {"length_weight", options_.length_weight},
          {"n_documents", tfidf_.vocabulary.n_documents()},
          {"terms", tfidf_.vocabulary.terms()},
          {"document_frequency", df},
          {"length_mean", length_mean_},
          {"length_scale", length_scale_}};
}

FeaturePipeline FeaturePipeline::from_json(const nlohmann::json& j) {
  FeaturePipeline p;
  p.options_.set = parse_feature_set(j.at("feature_set").get<std::string>());
  p.options_.min_df = j.at("min_df").get<int>();
  p.options_.sublinear_tf = j.at("sublinear_tf").get<bool>();
  p.options_.length_weight = j.at("length_weight").get<double>();
  p.tfidf_.sublinear_tf = p.options_.sublinear_tf;
  p.tfidf_.vocabulary = Vocabulary(j.at("terms").get<std::vector<std::string>>(),
                                   j.at("document_frequency").get<std::vector<std::uint32_t>>(),
                                   j.at("n_documents").get<std::size_t>());
  p.length_mean_ = j.at("length_mean").get<std::array<double, 6>>();
  p.length_scale_ = j.at("length_scale").get<std::array<double, 6>>();
  return p;
}

}  // namespace celebprof
