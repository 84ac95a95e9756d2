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

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "celebprof/corpus.hpp"
#include "json.hpp"

namespace celebprof {

struct CodePointRange {
  char32_t first = 0;
  char32_t last = 0;

  bool contains(char32_t cp) const { return cp >= first && cp <= last; }
  friend bool operator==(const CodePointRange&, const CodePointRange&) = default;
};

// Arabic, Arabic Presentation Forms-A and Presentation Forms-B.
std::vector<CodePointRange> default_urdu_ranges();

struct PreprocessConfig {
  double urdu_ratio_threshold = 0.5;
  std::vector<CodePointRange> urdu_ranges = default_urdu_ranges();
  bool strip_diacritics = true;
  bool keep_digits = false;
  int min_tweets = 20;
  // Keep celebrities whose cleaned document is empty instead of excluding them.
  bool keep_empty_documents = false;

  void validate() const;
  std::string canonical() const;
};

std::string format_ranges(std::span<const CodePointRange> ranges);
std::vector<CodePointRange> parse_ranges(std::string_view text);

struct TweetLength {
  int token_count = 0;
  int char_count = 0;

  friend bool operator==(const TweetLength&, const TweetLength&) = default;
};

// The classification unit: all retained tweets of one celebrity's followers,
// in feed order.
struct CleanDocument {
  std::string celebrity_id;
  std::vector<std::string> tokens;
  std::vector<TweetLength> per_tweet_lengths;
  // Cleaned, normalized text of each retained tweet.
  std::vector<std::string> tweets;

  friend bool operator==(const CleanDocument&, const CleanDocument&) = default;
};

struct LabeledDocument {
  CleanDocument document;
  CelebrityLabels labels;

  friend bool operator==(const LabeledDocument&, const LabeledDocument&) = default;
};

// ---- character classes ----------------------------------------------------

bool is_letter(char32_t cp);
bool is_whitespace(char32_t cp);
bool is_emoji(char32_t cp);
bool is_punctuation(char32_t cp);
bool is_digit(char32_t cp);  // ASCII, Arabic-Indic and extended Arabic-Indic
bool is_arabic_diacritic(char32_t cp);

// ---- tweet-level steps ----------------------------------------------------

bool is_retweet(const RawTweetRecord& record);

// Share of letters that fall in `ranges`; 0 for text without letters.
double urdu_ratio(std::string_view text,
                  std::span<const CodePointRange> ranges = default_urdu_ranges());

// Drops URL and @mention tokens, strips '#' from hashtags and removes emoji.
std::string strip_markup(std::string_view text);

// strip_markup, then restricts the alphabet to the Urdu ranges, whitespace,
// Urdu punctuation and (optionally) digits, collapsing whitespace.
std::string clean_tweet(std::string_view text, const PreprocessConfig& config);

std::string normalize_urdu(std::string_view text, bool strip_diacritics = true);

std::vector<std::string> tokenize(std::string_view text);

enum class DropReason { kNone, kRetweet, kLanguageTag, kLowUrduRatio, kEmpty };

struct ProcessedTweet {
  DropReason reason = DropReason::kNone;
  std::string text;  // cleaned and normalized
  std::vector<std::string> tokens;
};

ProcessedTweet preprocess_tweet(const RawTweetRecord& record, const PreprocessConfig& config);

// ---- corpus-level ---------------------------------------------------------

struct FeedRetention {
  std::string follower_handle;
  int raw = 0;
  int retweets = 0;
  int language = 0;
  int low_ratio = 0;
  int empty = 0;
  int retained = 0;

  friend bool operator==(const FeedRetention&, const FeedRetention&) = default;
};

struct CelebrityRetention {
  std::string celebrity_id;
  std::vector<FeedRetention> feeds;
  bool below_min_tweets = false;
  bool empty_document = false;
  bool excluded = false;

  bool flagged() const { return below_min_tweets || empty_document; }
  friend bool operator==(const CelebrityRetention&, const CelebrityRetention&) = default;
};

// Sorted by celebrity_id.
struct RetentionReport {
  std::vector<CelebrityRetention> celebrities;

  std::size_t flagged_count() const;
  std::string to_text() const;
  friend bool operator==(const RetentionReport&, const RetentionReport&) = default;
};

struct CleanCorpus {
  std::vector<LabeledDocument> documents;
  RetentionReport report;
  std::string config_fingerprint;

  friend bool operator==(const CleanCorpus&, const CleanCorpus&) = default;
};

// Cleans every feed of one celebrity and concatenates the retained tweets.
// Retention counts go to `retention` when given.
CleanDocument clean_document(std::string celebrity_id, std::span<const FollowerFeed> feeds,
                             const PreprocessConfig& config,
                             CelebrityRetention* retention = nullptr);

CleanCorpus preprocess_corpus(const Corpus& corpus, const PreprocessConfig& config);

nlohmann::json clean_corpus_to_json(const CleanCorpus& clean);
CleanCorpus clean_corpus_from_json(const nlohmann::json& j);
void save_clean_corpus(const CleanCorpus& clean, const std::filesystem::path& path);
CleanCorpus load_clean_corpus(const std::filesystem::path& path);

// One UTF-8 file per celebrity, one retained tweet per line.
void write_debug_dump(std::span<const LabeledDocument> documents,
                      const std::filesystem::path& dir);

}  // namespace celebprof
