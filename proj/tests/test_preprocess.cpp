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

#include <random>

#include "celebprof/preprocess.hpp"
#include "celebprof/utf8.hpp"
#include "doctest.h"

namespace celebprof {
namespace {

RawTweetRecord tweet(std::string text, bool retweet = false,
                     std::optional<std::string> lang = std::nullopt) {
  RawTweetRecord r;
  r.tweet_id = "1";
  r.tweet_text = std::move(text);
  r.author_handle = "h";
  r.is_retweet = retweet;
  r.language_tag = std::move(lang);
  return r;
}

std::string to_utf8(char32_t cp) { return utf8::encode(std::u32string(1, cp)); }

// Random text drawn from a mixed alphabet of Urdu letters, diacritics,
// mappable Arabic letters, Latin, digits, emoji, punctuation and markup.
std::string random_text(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces = {
      "ا", "ب", "ک", "ی", "ہ", "ي", "ى", "ك", "ه", "ِ", "ً", "ٰ", "a", "Z", "7", "۳", "٤",
      " ", " ", "  ", "\t", "؟", "۔", "،", "!", "😀", "🇵", "#", "@x", "http://t.co/z ", "RT"};
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::uniform_int_distribution<int> len(0, 30);
  std::string out;
  for (int i = len(rng); i > 0; --i) out += pieces[pick(rng)];
  return out;
}

TEST_CASE("retweet detection") {
  CHECK(is_retweet(tweet("سلام", true)));
  CHECK(is_retweet(tweet("RT @abc سلام")));
  CHECK_FALSE(is_retweet(tweet("سلام دنیا")));
  CHECK_FALSE(is_retweet(tweet("ART سلام")));
}

TEST_CASE("urdu ratio") {
  CHECK(urdu_ratio("hello world") == 0.0);
  CHECK(urdu_ratio("سلام دنیا") == 1.0);
  CHECK(urdu_ratio("hi سلام") == doctest::Approx(4.0 / 6.0).epsilon(1e-15));
  CHECK(urdu_ratio("") == 0.0);
  CHECK(urdu_ratio("123 !!") == 0.0);
  SUBCASE("emoji insertion does not change the ratio") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i) {
      const std::string s = random_text(rng);
      CHECK(urdu_ratio(s + "😀") == urdu_ratio(s));
      CHECK(urdu_ratio("🎉" + s) == urdu_ratio(s));
    }
  }
}

TEST_CASE("tweet cleaning") {
  PreprocessConfig config;
  CHECK(clean_tweet("سلام 😀", config) == "سلام");
  CHECK(clean_tweet("دیکھو https://t.co/abc یہ", config) == "دیکھو یہ");
  CHECK(clean_tweet("#پاکستان زندہ باد", config) == "پاکستان زندہ باد");
  CHECK(clean_tweet("@someone سلام", config) == "سلام");
  CHECK(clean_tweet("hello", config) == "");
  CHECK(clean_tweet("سال 2022", config) == "سال");
  PreprocessConfig digits = config;
  digits.keep_digits = true;
  CHECK(clean_tweet("سال 2022", digits) == "سال 2022");
}

TEST_CASE("urdu normalization") {
  CHECK(normalize_urdu("علي") == "علی");
  CHECK(normalize_urdu("کِتاب") == "کتاب");
  CHECK(normalize_urdu("کِتاب", false) == "کِتاب");
  CHECK(normalize_urdu(to_utf8(0x0643)) == to_utf8(0x06A9));
  CHECK(normalize_urdu("موسى") == "موسی");
  // Heh becomes Heh Goal only at the end of a word.
  CHECK(normalize_urdu(to_utf8(0x0627) + to_utf8(0x0647)) == to_utf8(0x0627) + to_utf8(0x06C1));
  CHECK(normalize_urdu(to_utf8(0x0647) + to_utf8(0x0627)) == to_utf8(0x0647) + to_utf8(0x0627));
  SUBCASE("idempotent on random text") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 300; ++i) {
      const std::string once = normalize_urdu(random_text(rng));
      CHECK(normalize_urdu(once) == once);
    }
  }
}

TEST_CASE("tokenization") {
  CHECK(tokenize("سلام دنیا") == std::vector<std::string>{"سلام", "دنیا"});
  CHECK(tokenize("کیا؟") == std::vector<std::string>{"کیا", "؟"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("   ").empty());
  CHECK(tokenize("ا۔ب") == std::vector<std::string>{"ا", "۔", "ب"});
}

TEST_CASE("tweet pipeline properties") {
  PreprocessConfig config;
  std::mt19937_64 rng(9);
  for (int i = 0; i < 500; ++i) {
    const std::string raw = random_text(rng);
    const ProcessedTweet first = preprocess_tweet(tweet(raw), config);
    if (first.reason != DropReason::kNone) continue;
    // Running the pipeline on its own output changes nothing.
    const ProcessedTweet second = preprocess_tweet(tweet(first.text), config);
    CHECK(second.reason == DropReason::kNone);
    CHECK(second.text == first.text);
    CHECK(second.tokens == first.tokens);
    // Alphabet restriction.
    for (const auto& tok : first.tokens) {
      CHECK_FALSE(tok.empty());
      for (char32_t cp : utf8::decode(tok)) {
        bool in_range = false;
        for (const auto& r : config.urdu_ranges) in_range = in_range || r.contains(cp);
        CHECK((in_range || is_punctuation(cp)));
        CHECK_FALSE(is_digit(cp));
        CHECK_FALSE(is_arabic_diacritic(cp));
      }
    }
  }
}

TEST_CASE("tweet drop reasons") {
  PreprocessConfig config;
  CHECK(preprocess_tweet(tweet("سلام", true), config).reason == DropReason::kRetweet);
  CHECK(preprocess_tweet(tweet("سلام", false, "en"), config).reason == DropReason::kLanguageTag);
  CHECK(preprocess_tweet(tweet("hello there سلام"), config).reason == DropReason::kLowUrduRatio);
  CHECK(preprocess_tweet(tweet("سلام", false, "ur"), config).reason == DropReason::kNone);
  CHECK(preprocess_tweet(tweet("سلام"), config).reason == DropReason::kNone);
}

FollowerFeed feed_of(const std::string& handle, int urdu, int retweets, int english = 0) {
  FollowerFeed f;
  f.follower_handle = handle;
  for (int i = 0; i < urdu; ++i) f.records.push_back(tweet("یہ اچھا دن ہے"));
  for (int i = 0; i < retweets; ++i) f.records.push_back(tweet("RT @x یہ اچھا دن ہے"));
  for (int i = 0; i < english; ++i) f.records.push_back(tweet("what a nice day", false, "en"));
  return f;
}

Corpus corpus_of(std::vector<std::vector<FollowerFeed>> per_celebrity) {
  CorpusConfig config;
  config.followers_per_celebrity = static_cast<int>(per_celebrity.front().size());
  std::vector<CelebrityRecord> records;
  for (std::size_t i = 0; i < per_celebrity.size(); ++i) {
    records.push_back(
        assemble_celebrity("c" + std::to_string(i), {}, std::move(per_celebrity[i]), config));
  }
  return make_corpus(std::move(records), "fp");
}

TEST_CASE("corpus preprocessing") {
  PreprocessConfig config;
  SUBCASE("25 tweets with 5 retweets retain 20") {
    CleanCorpus clean = preprocess_corpus(corpus_of({{feed_of("a", 20, 5)}}), config);
    REQUIRE(clean.report.celebrities.size() == 1);
    const auto& feed = clean.report.celebrities[0].feeds[0];
    CHECK(feed.raw == 25);
    CHECK(feed.retweets == 5);
    CHECK(feed.retained == 20);
    CHECK_FALSE(clean.report.celebrities[0].flagged());
    REQUIRE(clean.documents.size() == 1);
    CHECK(clean.documents[0].document.per_tweet_lengths.size() == 20);
  }
  SUBCASE("all-English feed retains nothing and flags the celebrity") {
    CleanCorpus clean =
        preprocess_corpus(corpus_of({{feed_of("a", 25, 0), feed_of("b", 0, 0, 25)}}), config);
    const auto& rep = clean.report.celebrities[0];
    CHECK(rep.feeds[1].retained == 0);
    CHECK(rep.feeds[1].language == 25);
    CHECK(rep.flagged());
    CHECK(clean.report.flagged_count() == 1);
  }
  SUBCASE("empty documents are excluded unless kept") {
    Corpus corpus = corpus_of({{feed_of("a", 0, 0, 3)}, {feed_of("b", 20, 0)}});
    CleanCorpus clean = preprocess_corpus(corpus, config);
    CHECK(clean.documents.size() == 1);
    CHECK(clean.report.celebrities[0].empty_document);
    CHECK(clean.report.celebrities[0].excluded);
    PreprocessConfig keep = config;
    keep.keep_empty_documents = true;
    CHECK(preprocess_corpus(corpus, keep).documents.size() == 2);
  }
  SUBCASE("tokens concatenate in feed order") {
    FollowerFeed a;
    a.follower_handle = "a";
    a.records = {tweet("اول")};
    FollowerFeed b;
    b.follower_handle = "b";
    b.records = {tweet("دوم سوم")};
    PreprocessConfig loose = config;
    loose.min_tweets = 1;
    CleanCorpus clean = preprocess_corpus(corpus_of({{a, b}}), loose);
    CHECK(clean.documents[0].document.tokens == std::vector<std::string>{"اول", "دوم", "سوم"});
  }
}

TEST_CASE("synthetic corpus passes preprocessing cleanly") {
  SynthSpec spec;
  spec.seed = 21;
  spec.n_celebrities = 20;
  const Corpus corpus = generate_synthetic_corpus(spec);
  const CleanCorpus clean = preprocess_corpus(corpus, PreprocessConfig{});
  CHECK(clean.report.flagged_count() == 0);
  CHECK(clean.documents.size() == 20);
  for (const auto& doc : clean.documents) {
    int total = 0;
    for (const auto& len : doc.document.per_tweet_lengths) total += len.token_count;
    CHECK(static_cast<std::size_t>(total) == doc.document.tokens.size());
    CHECK(doc.document.tweets.size() == doc.document.per_tweet_lengths.size());
  }
  CHECK(preprocess_corpus(corpus, PreprocessConfig{}) == clean);
  CHECK(clean_corpus_from_json(clean_corpus_to_json(clean)) == clean);
}

TEST_CASE("range parsing round-trip") {
  const auto ranges = default_urdu_ranges();
  CHECK(parse_ranges(format_ranges(ranges)) == ranges);
  CHECK(ranges.size() == 3);
  CHECK(ranges[0] == CodePointRange{0x0600, 0x06FF});
}

}  // namespace
}  // namespace celebprof
