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
#include <map>
#include <random>

#include "celebprof/error.hpp"
#include "celebprof/features.hpp"
#include "doctest.h"

namespace celebprof {
namespace {

using Docs = std::vector<std::vector<std::string>>;

FeatureMatrix counts_of(const Docs& docs, const Vocabulary& vocab) {
  FeatureMatrix m;
  m.n_columns = vocab.size();
  for (const auto& d : docs) m.rows.push_back(count_vectorize(d, vocab));
  m.row_ids.resize(docs.size());
  return m;
}

double value_at(const SparseRow& row, std::uint32_t col) {
  for (const auto& [c, v] : row) {
    if (c == col) return v;
  }
  return 0.0;
}

CleanDocument doc_with_lengths(std::vector<TweetLength> lengths) {
  CleanDocument d;
  d.celebrity_id = "x";
  d.per_tweet_lengths = std::move(lengths);
  return d;
}

TEST_CASE("vocabulary") {
  const Docs docs = {{"a", "b"}, {"b"}};
  Vocabulary v = build_vocabulary(docs, 1);
  CHECK(v.terms() == std::vector<std::string>{"a", "b"});
  CHECK(v.document_frequency(*v.index_of("a")) == 1);
  CHECK(v.document_frequency(*v.index_of("b")) == 2);
  CHECK(v.n_documents() == 2);

  Vocabulary v2 = build_vocabulary(docs, 2);
  CHECK(v2.terms() == std::vector<std::string>{"b"});
  CHECK(*v2.index_of("b") == 0);
  CHECK_FALSE(v2.index_of("a").has_value());

  CHECK(build_vocabulary(Docs{{"z", "z", "z"}, {"y"}}, 1).document_frequency(1) == 1);
  CHECK_THROWS_AS(build_vocabulary(Docs{{"a"}, {"b"}}, 2), Error);
  CHECK_THROWS_AS(build_vocabulary(Docs{}, 1), Error);
  CHECK(build_vocabulary(docs, 1) == v);
}

TEST_CASE("count vectorization") {
  Vocabulary v = build_vocabulary(Docs{{"a", "b"}}, 1);
  const std::vector<std::string> doc = {"b", "b", "a"};
  CHECK(count_vectorize(doc, v) == SparseRow{{0, 1.0}, {1, 2.0}});
  const std::vector<std::string> oov = {"q", "r"};
  CHECK(count_vectorize(oov, v).empty());
  CHECK(count_vectorize(std::vector<std::string>{}, v).empty());
}

TEST_CASE("tf-idf weights") {
  SUBCASE("term present in every document has idf 1") {
    Vocabulary v = build_vocabulary(Docs{{"a"}, {"a", "b"}, {"a"}}, 1);
    TfidfModel model{v, false};
    CHECK(model.idf(*v.index_of("a")) == 1.0);
  }
  SUBCASE("n = 4, DF = 1") {
    const Docs docs = {{"t"}, {"u"}, {"u"}, {"u"}};
    Vocabulary v = build_vocabulary(docs, 1);
    TfidfModel model{v, false};
    FeatureMatrix raw = tfidf_transform(counts_of(docs, v), model, false);
    CHECK(value_at(raw.rows[0], *v.index_of("t")) == doctest::Approx(2.3863).epsilon(1e-4));
    CHECK(value_at(raw.rows[0], *v.index_of("t")) == std::log(4.0) + 1.0);
  }
  SUBCASE("rows have unit norm, zero rows stay zero") {
    const Docs docs = {{"a", "b", "b"}, {"c"}, {}};
    Vocabulary v = build_vocabulary(docs, 1);
    FeatureMatrix m = tfidf_transform(counts_of(docs, v), TfidfModel{v, false});
    for (std::size_t r = 0; r < 2; ++r) {
      double sq = 0;
      for (const auto& [c, x] : m.rows[r]) sq += x * x;
      CHECK(std::abs(std::sqrt(sq) - 1.0) < 1e-12);
    }
    CHECK(m.rows[2].empty());
  }
  SUBCASE("column mismatch") {
    Vocabulary v = build_vocabulary(Docs{{"a"}}, 1);
    FeatureMatrix m;
    m.n_columns = 5;
    CHECK_THROWS_AS(tfidf_transform(m, TfidfModel{v, false}), Error);
  }
}

TEST_CASE("tf-idf agrees with a direct evaluation on random corpora") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<int> n_docs(1, 10), n_terms(1, 30), len(0, 12);
    const int t = n_terms(rng);
    std::uniform_int_distribution<int> term(0, t - 1);
    Docs docs(static_cast<std::size_t>(n_docs(rng)));
    for (auto& d : docs) {
      for (int i = len(rng); i > 0; --i) d.push_back("w" + std::to_string(term(rng)));
    }
    if (docs[0].empty()) docs[0].push_back("w0");
    const bool sublinear = trial % 2 == 1;
    Vocabulary v = build_vocabulary(docs, 1);
    FeatureMatrix m = tfidf_transform(counts_of(docs, v), TfidfModel{v, sublinear}, false);
    const double n = static_cast<double>(docs.size());
    for (std::size_t di = 0; di < docs.size(); ++di) {
      std::map<std::string, int> tf;
      for (const auto& w : docs[di]) ++tf[w];
      for (const auto& [w, count] : tf) {
        int df = 0;
        for (const auto& other : docs) df += std::find(other.begin(), other.end(), w) != other.end();
        const double tfv = sublinear ? 1.0 + std::log(double(count)) : double(count);
        const double expected = tfv * (std::log(n / df) + 1.0);
        CHECK(std::abs(value_at(m.rows[di], *v.index_of(w)) - expected) < 1e-12);
      }
      CHECK(m.rows[di].size() == tf.size());
    }
  }
}

TEST_CASE("uniform document frequency preserves the count argmax") {
  // Every term appears in every document, so IDF is constant.
  const Docs docs = {{"a", "b", "b", "c"}, {"a", "a", "a", "b", "c"}, {"c", "c", "a", "b"}};
  Vocabulary v = build_vocabulary(docs, 1);
  FeatureMatrix counts = counts_of(docs, v);
  FeatureMatrix m = tfidf_transform(counts, TfidfModel{v, false});
  for (std::size_t r = 0; r < docs.size(); ++r) {
    auto by_value = [](const auto& x, const auto& y) { return x.second < y.second; };
    CHECK(std::max_element(counts.rows[r].begin(), counts.rows[r].end(), by_value)->first ==
          std::max_element(m.rows[r].begin(), m.rows[r].end(), by_value)->first);
  }
}

TEST_CASE("tweet length features") {
  auto f = tweet_length_features(doc_with_lengths({{10, 50}, {20, 100}}));
  CHECK(f == std::array<double, 6>{15, 5, 20, 75, 25, 100});
  auto one = tweet_length_features(doc_with_lengths({{7, 30}}));
  CHECK(one[1] == 0.0);
  CHECK(one[4] == 0.0);
  auto same = tweet_length_features(doc_with_lengths({{4, 9}, {4, 9}, {4, 9}}));
  CHECK(same[1] == 0.0);
  CHECK(same[0] == same[2]);
  CHECK_THROWS_AS(tweet_length_features(doc_with_lengths({})), Error);
}

TEST_CASE("feature pipeline") {
  SynthSpec spec;
  spec.seed = 4;
  spec.n_celebrities = 12;
  const CleanCorpus clean = preprocess_corpus(generate_synthetic_corpus(spec), PreprocessConfig{});
  std::vector<CleanDocument> docs;
  for (const auto& d : clean.documents) docs.push_back(d.document);
  const std::span<const CleanDocument> train(docs.data(), 8);

  for (FeatureSet set : {FeatureSet::kCounts, FeatureSet::kTfidf, FeatureSet::kTfidfLength}) {
    FeatureOptions options;
    options.set = set;
    FeaturePipeline p = FeaturePipeline::fit(train, options);
    Matrix x = p.transform(docs);
    CHECK(x.rows() == docs.size());
    CHECK(x.cols() == p.width());
    CHECK(p.width() == p.tfidf().vocabulary.size() + (set == FeatureSet::kTfidfLength ? 6 : 0));
    for (double value : x.data()) CHECK(std::isfinite(value));
    // The vocabulary only sees the training documents.
    CHECK(p.tfidf().vocabulary.n_documents() == 8);
    FeaturePipeline back = FeaturePipeline::from_json(p.to_json());
    CHECK(back.transform(docs) == x);
    CHECK(parse_feature_set(to_string(set)) == set);
  }
}

TEST_CASE("length columns are standardized on train and weighted") {
  std::vector<CleanDocument> docs = {doc_with_lengths({{2, 10}}), doc_with_lengths({{4, 30}}),
                                     doc_with_lengths({{6, 20}})};
  for (std::size_t i = 0; i < docs.size(); ++i) docs[i].tokens = {"t", "u" + std::to_string(i % 2)};
  FeatureOptions options;
  options.min_df = 1;
  options.length_weight = 0.5;
  const FeaturePipeline p = FeaturePipeline::fit(docs, options);
  const Matrix x = p.transform(docs);
  const std::size_t base = p.tfidf().vocabulary.size();
  // Token mean: z = (x - 4) / sqrt(8/3), scaled by 0.5.
  const double sd = std::sqrt(8.0 / 3.0);
  CHECK(x(0, base) == doctest::Approx(0.5 * (2 - 4) / sd).epsilon(1e-12));
  CHECK(x(2, base) == doctest::Approx(0.5 * (6 - 4) / sd).epsilon(1e-12));
  // Constant columns (std, with one tweet each) stay at zero.
  CHECK(x(1, base + 1) == 0.0);
  options.length_weight = 0.0;
  const Matrix silent = FeaturePipeline::fit(docs, options).transform(docs);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t k = 0; k < 6; ++k) CHECK(silent(r, base + k) == 0.0);
  }
}

TEST_CASE("sparse dump format") {
  FeatureMatrix m;
  m.n_columns = 3;
  m.rows = {{{0, 0.5}, {2, 1.0}}, {}};
  m.row_ids = {"r1", "r2"};
  const std::string dump = format_sparse_dump(m);
  CHECK(dump.find("r1\t0:0.5 2:1") == 0);
  CHECK(dump.find("r2") != std::string::npos);
}

}  // namespace
}  // namespace celebprof
