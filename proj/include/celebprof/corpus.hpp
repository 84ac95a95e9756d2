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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace celebprof {

enum class MediaType { kText, kAudio, kVideo };
enum class AgeGroup { kA20To40, kA40To60, kA60To80 };
enum class Gender { kMale, kFemale };
enum class Occupation { kPolitics, kEntertainment, kJournalism, kSports };
enum class Fame { kRising, kStar, kSuperstar };

// The four predicted attributes, in the order reports list them.
enum class Demographic { kOccupation, kAge, kGender, kFame };
inline constexpr std::array<Demographic, 4> kAllDemographics = {
    Demographic::kOccupation, Demographic::kAge, Demographic::kGender, Demographic::kFame};

std::string_view to_string(MediaType v);
std::string_view to_string(AgeGroup v);
std::string_view to_string(Gender v);
std::string_view to_string(Occupation v);
std::string_view to_string(Fame v);
std::string_view to_string(Demographic v);

MediaType parse_media_type(std::string_view s);
AgeGroup parse_age_group(std::string_view s);
Gender parse_gender(std::string_view s);
Occupation parse_occupation(std::string_view s);
Fame parse_fame(std::string_view s);
Demographic parse_demographic(std::string_view s);

// One row of a follower export.
struct RawTweetRecord {
  std::string tweet_id;
  std::string tweet_text;
  std::string author_handle;
  std::optional<std::string> timestamp;
  bool is_retweet = false;
  std::optional<std::string> language_tag;
  std::vector<std::string> urls;
  std::vector<std::string> hashtags;
  MediaType media_type = MediaType::kText;

  friend bool operator==(const RawTweetRecord&, const RawTweetRecord&) = default;
};

struct FollowerFeed {
  std::string follower_handle;
  std::vector<RawTweetRecord> records;

  friend bool operator==(const FollowerFeed&, const FollowerFeed&) = default;
};

struct CelebrityLabels {
  AgeGroup age_group = AgeGroup::kA20To40;
  Gender gender = Gender::kMale;
  Occupation occupation = Occupation::kPolitics;
  Fame fame = Fame::kRising;
  std::optional<int> birth_year;
  std::optional<std::int64_t> follower_count;

  friend bool operator==(const CelebrityLabels&, const CelebrityLabels&) = default;
};

// Class index of a label within class_names(d).
int label_index(const CelebrityLabels& labels, Demographic d);
const std::vector<std::string>& class_names(Demographic d);

struct CelebrityRecord {
  std::string celebrity_id;
  CelebrityLabels labels;
  std::vector<FollowerFeed> feeds;

  friend bool operator==(const CelebrityRecord&, const CelebrityRecord&) = default;
};

struct Corpus {
  std::vector<CelebrityRecord> records;
  std::string config_fingerprint;

  std::size_t tweet_count() const;
  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Overlapping age bands (20-40, 40-60, 60-80) share their boundary ages.
// kLowerGroup puts 40 in A20_40 and 60 in A40_60; kUpperGroup the reverse.
enum class AgeBoundary { kLowerGroup, kUpperGroup };

struct LabelScheme {
  int reference_year = 2022;
  AgeBoundary boundary = AgeBoundary::kLowerGroup;
};

struct CorpusConfig {
  int followers_per_celebrity = 10;
  LabelScheme labels;

  void validate() const;
  std::string canonical() const;
};

AgeGroup map_age_group(int birth_year, int reference_year,
                       AgeBoundary boundary = AgeBoundary::kLowerGroup);
Fame map_fame(std::int64_t follower_count);

// Validates cardinality and label consistency and returns the record with
// feeds in input order.
CelebrityRecord assemble_celebrity(std::string id, CelebrityLabels labels,
                                   std::vector<FollowerFeed> feeds, const CorpusConfig& config);

// Enforces unique celebrity ids.
Corpus make_corpus(std::vector<CelebrityRecord> records, std::string config_fingerprint);

// ---- follower export CSV -------------------------------------------------

inline constexpr std::array<std::string_view, 9> kFollowerExportColumns = {
    "tweet_id", "tweet_text", "author_handle", "timestamp", "is_retweet",
    "language_tag", "urls", "hashtags", "media_type"};

struct RowError {
  std::size_t row = 0;  // 1-based data row index
  std::string message;
};

struct FollowerExport {
  std::vector<RawTweetRecord> records;
  std::vector<RowError> errors;
};

// Parses a follower export. Malformed rows are collected in `errors`; the
// call throws only for a bad header or when more than 10% of rows fail.
FollowerExport parse_follower_export(std::string_view content);
std::string format_follower_export(std::span<const RawTweetRecord> records);

// ---- labels CSV ----------------------------------------------------------

struct LabelRow {
  std::string celebrity_id;
  int birth_year = 0;
  Gender gender = Gender::kMale;
  Occupation occupation = Occupation::kPolitics;
  std::int64_t follower_count = 0;
};

std::vector<LabelRow> parse_labels_file(std::string_view content);
std::string format_labels_file(std::span<const LabelRow> rows);
CelebrityLabels derive_labels(const LabelRow& row, const LabelScheme& scheme);

struct IngestReport {
  struct FileErrors {
    std::string path;
    std::vector<RowError> errors;
  };
  std::vector<FileErrors> files;
};

// Reads `input_dir/<celebrity_id>/*.csv` (one file per follower, feed order =
// filename order) for every celebrity in the labels file.
Corpus ingest_directory(const std::filesystem::path& input_dir,
                        const std::filesystem::path& labels_file, const CorpusConfig& config,
                        IngestReport* report = nullptr);

// ---- archive -------------------------------------------------------------

inline constexpr int kCorpusFormatVersion = 1;

nlohmann::json labels_to_json(const CelebrityLabels& labels);
CelebrityLabels labels_from_json(const nlohmann::json& j);
nlohmann::json corpus_to_json(const Corpus& corpus);
Corpus corpus_from_json(const nlohmann::json& j);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

// Reads a JSON artifact, checking `kind` and `format_version`.
nlohmann::json read_json_artifact(const std::filesystem::path& path, std::string_view kind);
void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

// ---- synthetic corpora ---------------------------------------------------

struct SynthSpec {
  int n_celebrities = 100;
  int followers_per_celebrity = 10;
  int min_tweets = 20;
  // Number of filler word types; label markers come on top of these.
  int vocab_size = 2000;
  double class_signal_strength = 0.5;
  std::uint64_t seed = 0;
  int reference_year = 2022;
  int min_tokens_per_tweet = 6;
  int max_tokens_per_tweet = 14;
  // Relative class frequencies, in class_names() order. Uniform by default.
  std::vector<double> age_weights = {1, 1, 1};
  std::vector<double> gender_weights = {1, 1};
  std::vector<double> occupation_weights = {1, 1, 1, 1};
  std::vector<double> fame_weights = {1, 1, 1};

  void validate() const;
  std::string canonical() const;
};

// One marker token per class per demographic.
int synthetic_marker_count();
// Marker token emitted for class `cls` of demographic `d`, for the given seed.
std::string synthetic_marker(std::uint64_t seed, Demographic d, int cls);

Corpus generate_synthetic_corpus(const SynthSpec& spec);

}  // namespace celebprof
