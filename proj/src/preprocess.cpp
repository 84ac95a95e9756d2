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

#include "celebprof/preprocess.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "celebprof/error.hpp"
#include "celebprof/fingerprint.hpp"
#include "celebprof/utf8.hpp"

namespace celebprof {

namespace {

struct Range {
  char32_t lo, hi;
};

// Approximate letter classes (Unicode L*) for the scripts that show up in
// South Asian tweets. Arabic entries exclude marks, digits and punctuation.
constexpr Range kLetterRanges[] = {
    {0x0041, 0x005A}, {0x0061, 0x007A}, {0x00AA, 0x00AA}, {0x00B5, 0x00B5},
    {0x00BA, 0x00BA}, {0x00C0, 0x00D6}, {0x00D8, 0x00F6}, {0x00F8, 0x02C1},
    {0x0370, 0x0374}, {0x0376, 0x037D}, {0x0386, 0x0386}, {0x0388, 0x03FF},
    {0x0400, 0x0481}, {0x048A, 0x052F}, {0x0531, 0x0556}, {0x0561, 0x0587},
    {0x05D0, 0x05EA}, {0x0620, 0x064A}, {0x066E, 0x066F}, {0x0671, 0x06D3},
    {0x06D5, 0x06D5}, {0x06E5, 0x06E6}, {0x06EE, 0x06EF}, {0x06FA, 0x06FC},
    {0x06FF, 0x06FF}, {0x0750, 0x077F}, {0x08A0, 0x08C9}, {0x0904, 0x0939},
    {0x093D, 0x093D}, {0x0950, 0x0950}, {0x0958, 0x0961}, {0x0971, 0x0980},
    {0x0985, 0x09B9}, {0x0A05, 0x0A39}, {0x0A85, 0x0AB9}, {0x0B05, 0x0B39},
    {0x0B85, 0x0BB9}, {0x0C05, 0x0C39}, {0x0C85, 0x0CB9}, {0x0D05, 0x0D3A},
    {0x0E01, 0x0E30}, {0x10A0, 0x10FF}, {0x1E00, 0x1FBC}, {0x3041, 0x3096},
    {0x30A1, 0x30FA}, {0x3400, 0x4DBF}, {0x4E00, 0x9FFF}, {0xAC00, 0xD7A3},
    {0xFB50, 0xFBB1}, {0xFBD3, 0xFD3D}, {0xFD50, 0xFD8F}, {0xFD92, 0xFDC7},
    {0xFDF0, 0xFDFB}, {0xFE70, 0xFE74}, {0xFE76, 0xFEFC}, {0xFF21, 0xFF3A},
    {0xFF41, 0xFF5A}};

constexpr Range kEmojiRanges[] = {{0x1F300, 0x1FAFF}, {0x2600, 0x27BF}, {0xFE00, 0xFE0F}};

constexpr char32_t kUrduPunctuation[] = {0x06D4, 0x060C, 0x061F};

bool in_ranges(char32_t cp, std::span<const Range> ranges) {
  for (const auto& r : ranges) {
    if (cp >= r.lo && cp <= r.hi) return true;
  }
  return false;
}

bool in_ranges(char32_t cp, std::span<const CodePointRange> ranges) {
  for (const auto& r : ranges) {
    if (r.contains(cp)) return true;
  }
  return false;
}

// Combining marks that do not end a word.
bool is_arabic_mark(char32_t cp) {
  return (cp >= 0x0610 && cp <= 0x061A) || (cp >= 0x064B && cp <= 0x065F) || cp == 0x0670 ||
         (cp >= 0x06D6 && cp <= 0x06DC) || (cp >= 0x06DF && cp <= 0x06E4) ||
         (cp >= 0x06E7 && cp <= 0x06E8) || (cp >= 0x06EA && cp <= 0x06ED);
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string_view> split_whitespace_utf8(std::string_view text) {
  // ASCII whitespace only; non-ASCII spaces are collapsed by clean_tweet.
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

}  // namespace

std::vector<CodePointRange> default_urdu_ranges() {
  return {{0x0600, 0x06FF}, {0xFB50, 0xFDFF}, {0xFE70, 0xFEFF}};
}

void PreprocessConfig::validate() const {
  if (!(urdu_ratio_threshold >= 0.0 && urdu_ratio_threshold <= 1.0)) {
    throw config_error("bad_value", "urdu_ratio_threshold must lie in [0, 1]");
  }
  if (urdu_ranges.empty()) throw config_error("bad_value", "urdu_ranges must not be empty");
  for (std::size_t i = 0; i < urdu_ranges.size(); ++i) {
    if (urdu_ranges[i].first > urdu_ranges[i].last) {
      throw config_error("bad_value", "urdu_ranges entry has first > last");
    }
    if (i > 0 && urdu_ranges[i].first <= urdu_ranges[i - 1].last) {
      throw config_error("bad_value", "urdu_ranges must be sorted and non-overlapping");
    }
  }
  if (min_tweets < 0) throw config_error("bad_value", "min_tweets must be non-negative");
}

std::string PreprocessConfig::canonical() const {
  return fmt::format(
      "preprocess;threshold={};ranges={};strip_diacritics={};keep_digits={};min_tweets={};"
      "keep_empty={}",
      urdu_ratio_threshold, format_ranges(urdu_ranges), strip_diacritics, keep_digits, min_tweets,
      keep_empty_documents);
}

std::string format_ranges(std::span<const CodePointRange> ranges) {
  std::string out;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    out += fmt::format("{}{:04X}-{:04X}", i ? "," : "", static_cast<std::uint32_t>(ranges[i].first),
                       static_cast<std::uint32_t>(ranges[i].last));
  }
  return out;
}

std::vector<CodePointRange> parse_ranges(std::string_view text) {
  std::vector<CodePointRange> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    auto item = text.substr(start, end == std::string_view::npos ? text.npos : end - start);
    auto dash = item.find('-');
    auto parse_hex = [&](std::string_view s) -> char32_t {
      while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
      while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
      if (s.starts_with("U+") || s.starts_with("u+")) s.remove_prefix(2);
      if (s.empty()) throw config_error("bad_value", fmt::format("bad code point range '{}'", item));
      std::uint32_t v = 0;
      for (char c : s) {
        const int d = std::isdigit(static_cast<unsigned char>(c)) ? c - '0'
                      : (c >= 'a' && c <= 'f')                    ? c - 'a' + 10
                      : (c >= 'A' && c <= 'F')                    ? c - 'A' + 10
                                                                  : -1;
        if (d < 0) throw config_error("bad_value", fmt::format("bad code point range '{}'", item));
        v = v * 16 + static_cast<std::uint32_t>(d);
      }
      return v;
    };
    if (dash == std::string_view::npos) {
      const auto cp = parse_hex(item);
      out.push_back({cp, cp});
    } else {
      out.push_back({parse_hex(item.substr(0, dash)), parse_hex(item.substr(dash + 1))});
    }
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

bool is_letter(char32_t cp) { return in_ranges(cp, std::span<const Range>(kLetterRanges)); }

bool is_whitespace(char32_t cp) {
  return cp == 0x20 || (cp >= 0x09 && cp <= 0x0D) || cp == 0x85 || cp == 0xA0 ||
         cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 ||
         cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

bool is_emoji(char32_t cp) { return in_ranges(cp, std::span<const Range>(kEmojiRanges)); }

bool is_punctuation(char32_t cp) {
  if (cp < 0x80) return std::ispunct(static_cast<int>(cp)) != 0;
  return cp == 0x060C || cp == 0x060D || cp == 0x061B || cp == 0x061E || cp == 0x061F ||
         (cp >= 0x066A && cp <= 0x066D) || cp == 0x06D4 || cp == 0xFD3E || cp == 0xFD3F;
}

bool is_digit(char32_t cp) {
  return (cp >= '0' && cp <= '9') || (cp >= 0x0660 && cp <= 0x0669) ||
         (cp >= 0x06F0 && cp <= 0x06F9);
}

bool is_arabic_diacritic(char32_t cp) { return (cp >= 0x064B && cp <= 0x0652) || cp == 0x0670; }

bool is_retweet(const RawTweetRecord& record) {
  if (record.is_retweet) return true;
  std::string_view text = record.tweet_text;
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  return text.starts_with("RT @");
}

double urdu_ratio(std::string_view text, std::span<const CodePointRange> ranges) {
  std::size_t letters = 0;
  std::size_t urdu = 0;
  for (char32_t cp : utf8::decode(text)) {
    if (!is_letter(cp)) continue;
    ++letters;
    if (in_ranges(cp, ranges)) ++urdu;
  }
  return letters == 0 ? 0.0 : static_cast<double>(urdu) / static_cast<double>(letters);
}

std::string strip_markup(std::string_view text) {
  std::string out;
  for (auto token : split_whitespace_utf8(text)) {
    const std::string lower = lower_ascii(token);
    if (lower.find("http://") != std::string::npos || lower.find("https://") != std::string::npos ||
        lower.starts_with("www.")) {
      continue;
    }
    if (token.starts_with('@')) continue;
    while (token.starts_with('#')) token.remove_prefix(1);
    std::string kept;
    for (char32_t cp : utf8::decode(token)) {
      if (!is_emoji(cp)) utf8::append(kept, cp);
    }
    if (kept.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += kept;
  }
  return out;
}

std::string clean_tweet(std::string_view text, const PreprocessConfig& config) {
  const std::u32string cps = utf8::decode(strip_markup(text));
  std::u32string out;
  bool pending_space = false;
  for (char32_t cp : cps) {
    bool keep = false;
    if (is_whitespace(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (is_digit(cp)) {
      keep = config.keep_digits;
    } else if (in_ranges(cp, config.urdu_ranges)) {
      keep = true;
    } else {
      keep = std::find(std::begin(kUrduPunctuation), std::end(kUrduPunctuation), cp) !=
             std::end(kUrduPunctuation);
    }
    if (!keep) continue;
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(cp);
  }
  return utf8::encode(out);
}

std::string normalize_urdu(std::string_view text, bool strip_diacritics) {
  std::u32string cps = utf8::decode(text);
  if (strip_diacritics) std::erase_if(cps, is_arabic_diacritic);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    char32_t& cp = cps[i];
    switch (cp) {
      case 0x064A:
      case 0x0649:
        cp = 0x06CC;
        break;
      case 0x0643:
        cp = 0x06A9;
        break;
      case 0x0647: {
        std::size_t j = i + 1;
        while (j < cps.size() && is_arabic_mark(cps[j])) ++j;
        if (j == cps.size() || !is_letter(cps[j])) cp = 0x06C1;
        break;
      }
      default:
        break;
    }
  }
  return utf8::encode(cps);
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  for (char32_t cp : utf8::decode(text)) {
    if (is_whitespace(cp)) {
      flush();
    } else if (is_punctuation(cp)) {
      flush();
      utf8::append(current, cp);
      flush();
    } else {
      utf8::append(current, cp);
    }
  }
  flush();
  return tokens;
}

ProcessedTweet preprocess_tweet(const RawTweetRecord& record, const PreprocessConfig& config) {
  ProcessedTweet out;
  if (is_retweet(record)) {
    out.reason = DropReason::kRetweet;
    return out;
  }
  if (record.language_tag && lower_ascii(*record.language_tag) != "ur") {
    out.reason = DropReason::kLanguageTag;
    return out;
  }
  if (urdu_ratio(strip_markup(record.tweet_text), config.urdu_ranges) <
      config.urdu_ratio_threshold) {
    out.reason = DropReason::kLowUrduRatio;
    return out;
  }
  // Stripping a diacritic that stood alone can leave a doubled or edge space,
  // so whitespace is collapsed once more after normalization.
  const std::string normalized =
      normalize_urdu(clean_tweet(record.tweet_text, config), config.strip_diacritics);
  for (std::string_view word : split_whitespace_utf8(normalized)) {
    if (!out.text.empty()) out.text.push_back(' ');
    out.text += word;
  }
  out.tokens = tokenize(out.text);
  if (out.tokens.empty()) {
    out.reason = DropReason::kEmpty;
    out.text.clear();
  }
  return out;
}

std::size_t RetentionReport::flagged_count() const {
  return static_cast<std::size_t>(
      std::count_if(celebrities.begin(), celebrities.end(), [](const auto& c) { return c.flagged(); }));
}

std::string RetentionReport::to_text() const {
  std::string out =
      "celebrity_id\tfollower_handle\traw\tretweets\tlanguage\tlow_ratio\tempty\tretained\tflags\n";
  for (const auto& c : celebrities) {
    std::string flags;
    if (c.below_min_tweets) flags += "below_min_tweets";
    if (c.empty_document) flags += flags.empty() ? "empty_document" : ",empty_document";
    if (c.excluded) flags += flags.empty() ? "excluded" : ",excluded";
    if (flags.empty()) flags = "-";
    for (const auto& f : c.feeds) {
      out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n", c.celebrity_id, f.follower_handle,
                         f.raw, f.retweets, f.language, f.low_ratio, f.empty, f.retained, flags);
    }
  }
  out += fmt::format("# celebrities={} flagged={}\n", celebrities.size(), flagged_count());
  return out;
}

CleanDocument clean_document(std::string celebrity_id, std::span<const FollowerFeed> feeds,
                             const PreprocessConfig& config, CelebrityRetention* retention) {
  CleanDocument doc;
  doc.celebrity_id = std::move(celebrity_id);
  CelebrityRetention local;
  CelebrityRetention& r = retention ? *retention : local;
  r = CelebrityRetention{};
  r.celebrity_id = doc.celebrity_id;
  for (const auto& feed : feeds) {
    FeedRetention fr;
    fr.follower_handle = feed.follower_handle;
    for (const auto& tweet : feed.records) {
      ++fr.raw;
      auto processed = preprocess_tweet(tweet, config);
      switch (processed.reason) {
        case DropReason::kRetweet:
          ++fr.retweets;
          continue;
        case DropReason::kLanguageTag:
          ++fr.language;
          continue;
        case DropReason::kLowUrduRatio:
          ++fr.low_ratio;
          continue;
        case DropReason::kEmpty:
          ++fr.empty;
          continue;
        case DropReason::kNone:
          break;
      }
      ++fr.retained;
      doc.per_tweet_lengths.push_back(
          {static_cast<int>(processed.tokens.size()),
           static_cast<int>(utf8::length(processed.text))});
      doc.tweets.push_back(std::move(processed.text));
      for (auto& t : processed.tokens) doc.tokens.push_back(std::move(t));
    }
    if (fr.retained < config.min_tweets) r.below_min_tweets = true;
    r.feeds.push_back(std::move(fr));
  }
  r.empty_document = doc.tokens.empty();
  r.excluded = r.empty_document && !config.keep_empty_documents;
  return doc;
}

CleanCorpus preprocess_corpus(const Corpus& corpus, const PreprocessConfig& config) {
  config.validate();
  CleanCorpus out;
  for (const auto& record : corpus.records) {
    CelebrityRetention retention;
    CleanDocument doc = clean_document(record.celebrity_id, record.feeds, config, &retention);
    if (!retention.excluded) out.documents.push_back({std::move(doc), record.labels});
    out.report.celebrities.push_back(std::move(retention));
  }
  std::sort(out.report.celebrities.begin(), out.report.celebrities.end(),
            [](const auto& a, const auto& b) { return a.celebrity_id < b.celebrity_id; });
  out.config_fingerprint = fingerprint(corpus.config_fingerprint + ";" + config.canonical());
  return out;
}

using nlohmann::json;

json clean_corpus_to_json(const CleanCorpus& clean) {
  json docs = json::array();
  for (const auto& d : clean.documents) {
    json lengths = json::array();
    for (const auto& l : d.document.per_tweet_lengths) {
      lengths.push_back({l.token_count, l.char_count});
    }
    docs.push_back({{"celebrity_id", d.document.celebrity_id},
                    {"labels", labels_to_json(d.labels)},
                    {"tweets", d.document.tweets},
                    {"tokens", d.document.tokens},
                    {"per_tweet_lengths", std::move(lengths)}});
  }
  json report = json::array();
  for (const auto& c : clean.report.celebrities) {
    json feeds = json::array();
    for (const auto& f : c.feeds) {
      feeds.push_back({{"follower_handle", f.follower_handle},
                       {"raw", f.raw},
                       {"retweets", f.retweets},
                       {"language", f.language},
                       {"low_ratio", f.low_ratio},
                       {"empty", f.empty},
                       {"retained", f.retained}});
    }
    report.push_back({{"celebrity_id", c.celebrity_id},
                      {"feeds", std::move(feeds)},
                      {"below_min_tweets", c.below_min_tweets},
                      {"empty_document", c.empty_document},
                      {"excluded", c.excluded}});
  }
  return {{"format_version", kCorpusFormatVersion},
          {"kind", "clean"},
          {"config_fingerprint", clean.config_fingerprint},
          {"documents", std::move(docs)},
          {"retention", std::move(report)}};
}

CleanCorpus clean_corpus_from_json(const json& j) {
  try {
    CleanCorpus out;
    out.config_fingerprint = j.at("config_fingerprint").get<std::string>();
    for (const auto& dj : j.at("documents")) {
      LabeledDocument d;
      d.document.celebrity_id = dj.at("celebrity_id").get<std::string>();
      d.labels = labels_from_json(dj.at("labels"));
      d.document.tweets = dj.at("tweets").get<std::vector<std::string>>();
      d.document.tokens = dj.at("tokens").get<std::vector<std::string>>();
      for (const auto& l : dj.at("per_tweet_lengths")) {
        d.document.per_tweet_lengths.push_back({l.at(0).get<int>(), l.at(1).get<int>()});
      }
      out.documents.push_back(std::move(d));
    }
    for (const auto& cj : j.at("retention")) {
      CelebrityRetention c;
      c.celebrity_id = cj.at("celebrity_id").get<std::string>();
      c.below_min_tweets = cj.at("below_min_tweets").get<bool>();
      c.empty_document = cj.at("empty_document").get<bool>();
      c.excluded = cj.at("excluded").get<bool>();
      for (const auto& fj : cj.at("feeds")) {
        FeedRetention f;
        f.follower_handle = fj.at("follower_handle").get<std::string>();
        f.raw = fj.at("raw").get<int>();
        f.retweets = fj.at("retweets").get<int>();
        f.language = fj.at("language").get<int>();
        f.low_ratio = fj.at("low_ratio").get<int>();
        f.empty = fj.at("empty").get<int>();
        f.retained = fj.at("retained").get<int>();
        c.feeds.push_back(std::move(f));
      }
      out.report.celebrities.push_back(std::move(c));
    }
    return out;
  } catch (const json::exception& e) {
    throw data_error("corrupt", fmt::format("clean archive is corrupted: {}", e.what()));
  } catch (const Error& e) {
    throw data_error("corrupt", fmt::format("clean archive is corrupted: {}", e.what()));
  }
}

void save_clean_corpus(const CleanCorpus& clean, const std::filesystem::path& path) {
  write_text_file(path, clean_corpus_to_json(clean).dump(1) + "\n");
}

CleanCorpus load_clean_corpus(const std::filesystem::path& path) {
  return clean_corpus_from_json(read_json_artifact(path, "clean"));
}

void write_debug_dump(std::span<const LabeledDocument> documents,
                      const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& d : documents) {
    std::string text;
    for (const auto& t : d.document.tweets) {
      text += t;
      text.push_back('\n');
    }
    write_text_file(dir / (d.document.celebrity_id + ".txt"), text);
  }
}

}  // namespace celebprof
