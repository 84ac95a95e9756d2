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
#include <unordered_map>
#include <utility>
#include <vector>

#include "celebprof/matrix.hpp"
#include "celebprof/preprocess.hpp"
#include "json.hpp"

namespace celebprof {

// (column, value) pairs sorted by column.
using SparseRow = std::vector<std::pair<std::uint32_t, double>>;

class Vocabulary {
 public:
  Vocabulary() = default;
  // `terms` must be strictly increasing; `document_frequency` parallels it.
  Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> document_frequency,
             std::size_t n_documents);

  std::size_t size() const { return terms_.size(); }
  std::size_t n_documents() const { return n_documents_; }
  const std::vector<std::string>& terms() const { return terms_; }
  std::uint32_t document_frequency(std::uint32_t column) const { return df_[column]; }
  std::optional<std::uint32_t> index_of(std::string_view term) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.terms_ == b.terms_ && a.df_ == b.df_ && a.n_documents_ == b.n_documents_;
  }

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> df_;
  std::size_t n_documents_ = 0;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Terms with DF >= min_df, indexed in lexicographic order.
Vocabulary build_vocabulary(std::span<const std::vector<std::string>> documents, int min_df);
Vocabulary build_vocabulary(std::span<const CleanDocument> documents, int min_df);

SparseRow count_vectorize(std::span<const std::string> tokens, const Vocabulary& vocabulary);

struct FeatureMatrix {
  std::vector<SparseRow> rows;
  std::size_t n_columns = 0;
  std::vector<std::string> row_ids;
};

struct TfidfModel {
  Vocabulary vocabulary;
  bool sublinear_tf = false;

  // ln(n / DF(t)) + 1
  double idf(std::uint32_t column) const;
};

// TF(t,d) * IDF(t) per entry, then (optionally) unit L2 norm per row.
FeatureMatrix tfidf_transform(const FeatureMatrix& counts, const TfidfModel& model,
                              bool l2_normalize = true);

void l2_normalize_rows(FeatureMatrix& matrix);

// [mean, std, max] of per-tweet token counts, then the same for char counts.
std::array<double, 6> tweet_length_features(const CleanDocument& document);

// Sparse text dump: `row_id<TAB>col:value ...`, one line per row.
std::string format_sparse_dump(const FeatureMatrix& matrix);

enum class FeatureSet { kCounts, kTfidf, kTfidfLength };
std::string_view to_string(FeatureSet set);
FeatureSet parse_feature_set(std::string_view s);

struct FeatureOptions {
  FeatureSet set = FeatureSet::kTfidfLength;
  int min_df = 2;
  bool sublinear_tf = false;
  // Multiplier on the z-scored length columns. Six unit-variance columns
  // would otherwise outweigh the unit-norm text row in distances and early
  // gradient steps.
  double length_weight = 0.2;
};

// Vocabulary, IDF and length standardization fitted on training documents
// only, then applied unchanged to any document.
class FeaturePipeline {
 public:
  static FeaturePipeline fit(std::span<const CleanDocument> train, const FeatureOptions& options);

  Matrix transform(std::span<const CleanDocument> documents) const;
  FeatureMatrix text_features(std::span<const CleanDocument> documents) const;
  std::size_t width() const;
  const FeatureOptions& options() const { return options_; }
  const TfidfModel& tfidf() const { return tfidf_; }

  nlohmann::json to_json() const;
  static FeaturePipeline from_json(const nlohmann::json& j);

 private:
  FeatureOptions options_;
  TfidfModel tfidf_;
  std::array<double, 6> length_mean_{};
  std::array<double, 6> length_scale_{};
};

}  // namespace celebprof
