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

#include <filesystem>
#include <map>
#include <set>

#include "celebprof/corpus.hpp"
#include "celebprof/error.hpp"
#include "doctest.h"

namespace celebprof {
namespace {

namespace fs = std::filesystem;

std::string export_header() {
  return "tweet_id,tweet_text,author_handle,timestamp,is_retweet,language_tag,urls,hashtags,"
         "media_type\n";
}

FollowerFeed small_feed(const std::string& handle) {
  RawTweetRecord r;
  r.tweet_id = handle + "_1";
  r.tweet_text = "سلام دنیا";
  r.author_handle = handle;
  return {handle, {r}};
}

std::vector<FollowerFeed> feeds(int n) {
  std::vector<FollowerFeed> out;
  for (int i = 0; i < n; ++i) out.push_back(small_feed("f" + std::to_string(i)));
  return out;
}

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("celebprof_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST_CASE("follower export parsing") {
  SUBCASE("header and two rows give two records") {
    const std::string csv = export_header() +
                            "1,سلام,ali,2021-01-01T00:00:00Z,false,ur,,,text\n"
                            "2,\"دنیا, اچھی\",ali,,true,,http://a|http://b,x|y,video\n";
    FollowerExport ex = parse_follower_export(csv);
    REQUIRE(ex.records.size() == 2);
    CHECK(ex.errors.empty());
    CHECK(ex.records[0].language_tag == std::optional<std::string>("ur"));
    CHECK(ex.records[0].timestamp == std::optional<std::string>("2021-01-01T00:00:00Z"));
    CHECK_FALSE(ex.records[1].language_tag.has_value());
    CHECK_FALSE(ex.records[1].timestamp.has_value());
    CHECK(ex.records[1].is_retweet);
    CHECK(ex.records[1].tweet_text == "دنیا, اچھی");
    CHECK(ex.records[1].urls == std::vector<std::string>{"http://a", "http://b"});
    CHECK(ex.records[1].hashtags == std::vector<std::string>{"x", "y"});
    CHECK(ex.records[1].media_type == MediaType::kVideo);
  }
  SUBCASE("header only is an empty list") {
    FollowerExport ex = parse_follower_export(export_header());
    CHECK(ex.records.empty());
    CHECK(ex.errors.empty());
  }
  SUBCASE("missing column names the column") {
    try {
      parse_follower_export("tweet_id,tweet_text\n1,x\n");
      FAIL("expected a schema error");
    } catch (const Error& e) {
      CHECK(e.code() == "schema");
      CHECK(std::string(e.what()).find("author_handle") != std::string::npos);
    }
  }
  SUBCASE("bad rows are collected with their index") {
    std::string csv = export_header();
    for (int i = 1; i <= 20; ++i) csv += std::to_string(i) + ",متن,a,,false,ur,,,text\n";
    csv += "21,,a,,false,ur,,,text\n";  // empty text
    FollowerExport ex = parse_follower_export(csv);
    CHECK(ex.records.size() == 20);
    REQUIRE(ex.errors.size() == 1);
    CHECK(ex.errors[0].row == 21);
  }
  SUBCASE("more than 10% bad rows is fatal") {
    std::string csv = export_header() + "1,متن,a,,false,ur,,,text\n2,,a,,false,ur,,,text\n";
    CHECK_THROWS_AS(parse_follower_export(csv), Error);
  }
  SUBCASE("format and parse round-trip") {
    RawTweetRecord r;
    r.tweet_id = "9";
    r.tweet_text = "کہا \"ہاں\"\nنئی سطر";
    r.author_handle = "h";
    r.urls = {"https://x.y"};
    r.language_tag = "ur";
    std::vector<RawTweetRecord> rs = {r};
    FollowerExport ex = parse_follower_export(format_follower_export(rs));
    REQUIRE(ex.records.size() == 1);
    CHECK(ex.records[0] == r);
  }
}

TEST_CASE("age groups") {
  CHECK(map_age_group(1987, 2022) == AgeGroup::kA20To40);
  CHECK(map_age_group(1982, 2022) == AgeGroup::kA20To40);  // age 40
  CHECK(map_age_group(1981, 2022) == AgeGroup::kA40To60);  // age 41
  CHECK(map_age_group(1962, 2022) == AgeGroup::kA40To60);  // age 60
  CHECK(map_age_group(1961, 2022) == AgeGroup::kA60To80);
  CHECK(map_age_group(1942, 2022) == AgeGroup::kA60To80);  // age 80
  CHECK_THROWS_AS(map_age_group(2003, 2022), Error);        // age 19
  CHECK_THROWS_AS(map_age_group(1941, 2022), Error);        // age 81
  CHECK(map_age_group(1982, 2022, AgeBoundary::kUpperGroup) == AgeGroup::kA40To60);
  CHECK(map_age_group(1962, 2022, AgeBoundary::kUpperGroup) == AgeGroup::kA60To80);

  SUBCASE("every integer age in [20, 80] lands in exactly one contiguous band") {
    std::map<AgeGroup, std::pair<int, int>> span;
    AgeGroup previous = AgeGroup::kA20To40;
    for (int age = 20; age <= 80; ++age) {
      const AgeGroup g = map_age_group(2022 - age, 2022);
      CHECK(static_cast<int>(g) >= static_cast<int>(previous));  // monotone => no overlap
      previous = g;
      auto [it, fresh] = span.try_emplace(g, age, age);
      if (!fresh) it->second.second = age;
    }
    CHECK(span.size() == 3);
    CHECK(span[AgeGroup::kA20To40] == std::pair(20, 40));
    CHECK(span[AgeGroup::kA40To60] == std::pair(41, 60));
    CHECK(span[AgeGroup::kA60To80] == std::pair(61, 80));
  }
}

TEST_CASE("fame tiers") {
  CHECK(map_fame(0) == Fame::kRising);
  CHECK(map_fame(1'000'000) == Fame::kRising);
  CHECK(map_fame(1'000'001) == Fame::kStar);
  CHECK(map_fame(2'500'000) == Fame::kStar);
  CHECK(map_fame(2'500'001) == Fame::kSuperstar);
  SUBCASE("monotone") {
    Fame last = Fame::kRising;
    for (std::int64_t c = 0; c <= 4'000'000; c += 12'345) {
      const Fame f = map_fame(c);
      CHECK(static_cast<int>(f) >= static_cast<int>(last));
      last = f;
    }
  }
}

TEST_CASE("celebrity assembly") {
  CelebrityLabels labels;
  labels.follower_count = 500'000;
  labels.birth_year = 1990;
  CorpusConfig config;
  CelebrityRecord rec = assemble_celebrity("c1", labels, feeds(10), config);
  CHECK(rec.feeds.size() == 10);
  CHECK(rec.feeds[3].follower_handle == "f3");

  try {
    assemble_celebrity("c1", labels, feeds(9), config);
    FAIL("expected cardinality error");
  } catch (const Error& e) {
    CHECK(e.code() == "cardinality");
  }

  CelebrityLabels bad = labels;
  bad.follower_count = 3'000'000;
  try {
    assemble_celebrity("c1", bad, feeds(10), config);
    FAIL("expected consistency error");
  } catch (const Error& e) {
    CHECK(e.code() == "label_consistency");
  }

  CelebrityLabels bad_age = labels;
  bad_age.age_group = AgeGroup::kA60To80;
  CHECK_THROWS_AS(assemble_celebrity("c1", bad_age, feeds(10), config), Error);

  CorpusConfig three;
  three.followers_per_celebrity = 3;
  CHECK(assemble_celebrity("c1", labels, feeds(3), three).feeds.size() == 3);
}

TEST_CASE("duplicate celebrity ids are rejected") {
  CorpusConfig config;
  CelebrityRecord a = assemble_celebrity("same", {}, feeds(10), config);
  CHECK_THROWS_AS(make_corpus({a, a}, "fp"), Error);
}

TEST_CASE("corpus archive round-trip") {
  SynthSpec spec;
  spec.n_celebrities = 3;
  spec.seed = 5;
  spec.min_tweets = 3;
  Corpus corpus = generate_synthetic_corpus(spec);
  const fs::path dir = temp_dir("archive");
  save_corpus(corpus, dir / "c.json");
  Corpus back = load_corpus(dir / "c.json");
  CHECK(back == corpus);
  CHECK(back.config_fingerprint == corpus.config_fingerprint);

  SUBCASE("truncated file is a corruption error") {
    const std::string text = read_text_file(dir / "c.json");
    write_text_file(dir / "t.json", text.substr(0, text.size() / 2));
    try {
      load_corpus(dir / "t.json");
      FAIL("expected corruption error");
    } catch (const Error& e) {
      CHECK(e.code() == "corrupt");
      CHECK(e.kind() == ErrorKind::kData);
    }
  }
  SUBCASE("version mismatch") {
    nlohmann::json j = corpus_to_json(corpus);
    j["format_version"] = 99;
    write_text_file(dir / "v.json", j.dump());
    try {
      load_corpus(dir / "v.json");
      FAIL("expected version error");
    } catch (const Error& e) {
      CHECK(e.code() == "version");
    }
  }
}

TEST_CASE("directory ingestion") {
  SynthSpec spec;
  spec.n_celebrities = 4;
  spec.followers_per_celebrity = 2;
  spec.min_tweets = 3;
  spec.seed = 11;
  Corpus synthetic = generate_synthetic_corpus(spec);
  const fs::path dir = temp_dir("ingest");
  std::vector<LabelRow> rows;
  for (const auto& rec : synthetic.records) {
    fs::create_directories(dir / rec.celebrity_id);
    for (const auto& f : rec.feeds) {
      write_text_file(dir / rec.celebrity_id / (f.follower_handle + ".csv"),
                      format_follower_export(f.records));
    }
    rows.push_back({rec.celebrity_id, *rec.labels.birth_year, rec.labels.gender,
                    rec.labels.occupation, *rec.labels.follower_count});
  }
  write_text_file(dir / "labels.csv", format_labels_file(rows));

  CorpusConfig config;
  config.followers_per_celebrity = 2;
  Corpus ingested = ingest_directory(dir, dir / "labels.csv", config);
  REQUIRE(ingested.records.size() == synthetic.records.size());
  for (std::size_t i = 0; i < ingested.records.size(); ++i) {
    CHECK(ingested.records[i].labels == synthetic.records[i].labels);
    CHECK(ingested.records[i].feeds == synthetic.records[i].feeds);
  }

  try {
    ingest_directory(dir, dir / "missing.csv", config);
    FAIL("expected missing path error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfig);
    CHECK(std::string(e.what()).find("missing.csv") != std::string::npos);
  }
}

TEST_CASE("synthetic corpus") {
  SynthSpec spec;
  spec.seed = 42;
  Corpus corpus = generate_synthetic_corpus(spec);
  CHECK(corpus.records.size() == 100);
  CHECK(corpus.tweet_count() >= 20'000);
  for (const auto& rec : corpus.records) {
    REQUIRE(rec.feeds.size() == 10);
    for (const auto& f : rec.feeds) CHECK(f.records.size() >= 20);
    // Stored raw values agree with the derived labels.
    CHECK(map_fame(*rec.labels.follower_count) == rec.labels.fame);
    CHECK(map_age_group(*rec.labels.birth_year, spec.reference_year) == rec.labels.age_group);
  }
  CHECK(generate_synthetic_corpus(spec) == corpus);

  SynthSpec other = spec;
  other.seed = 43;
  CHECK_FALSE(generate_synthetic_corpus(other) == corpus);

  SynthSpec tiny = spec;
  tiny.vocab_size = synthetic_marker_count() - 1;
  CHECK_THROWS_AS(generate_synthetic_corpus(tiny), Error);
}

TEST_CASE("synthetic markers identify labels exactly at full signal") {
  SynthSpec spec;
  spec.seed = 8;
  spec.n_celebrities = 30;
  spec.class_signal_strength = 1.0;
  Corpus corpus = generate_synthetic_corpus(spec);
  // Cross-tabulate marker presence against labels: each celebrity's text
  // contains its own class marker and no marker of another class.
  for (const auto& rec : corpus.records) {
    std::string text;
    for (const auto& f : rec.feeds) {
      for (const auto& r : f.records) text += " " + r.tweet_text + " ";
    }
    for (auto d : kAllDemographics) {
      const int own = label_index(rec.labels, d);
      for (int cls = 0; cls < static_cast<int>(class_names(d).size()); ++cls) {
        const bool present = text.find(" " + synthetic_marker(spec.seed, d, cls) + " ") != std::string::npos;
        CHECK(present == (cls == own));
      }
    }
  }
}

TEST_CASE("zero signal leaves no markers") {
  SynthSpec spec;
  spec.seed = 8;
  spec.n_celebrities = 10;
  spec.class_signal_strength = 0.0;
  Corpus corpus = generate_synthetic_corpus(spec);
  std::set<std::string> markers;
  for (auto d : kAllDemographics) {
    for (int cls = 0; cls < static_cast<int>(class_names(d).size()); ++cls) {
      markers.insert(synthetic_marker(spec.seed, d, cls));
    }
  }
  for (const auto& rec : corpus.records) {
    for (const auto& f : rec.feeds) {
      for (const auto& r : f.records) {
        for (const auto& m : markers) CHECK(r.tweet_text.find(m) == std::string::npos);
      }
    }
  }
}

}  // namespace
}  // namespace celebprof
