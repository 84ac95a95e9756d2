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

#include "celebprof/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "celebprof/csv.hpp"
#include "celebprof/error.hpp"
#include "celebprof/fingerprint.hpp"
#include "celebprof/random.hpp"
#include "celebprof/utf8.hpp"

namespace celebprof {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view s, const std::array<std::string_view, N>& names,
                std::string_view what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  throw data_error("bad_label", fmt::format("unknown {} '{}'", what, s));
}

constexpr std::array<std::string_view, 3> kMediaNames = {"text", "audio", "video"};
constexpr std::array<std::string_view, 3> kAgeNames = {"A20_40", "A40_60", "A60_80"};
constexpr std::array<std::string_view, 2> kGenderNames = {"male", "female"};
constexpr std::array<std::string_view, 4> kOccupationNames = {"politics", "entertainment",
                                                              "journalism", "sports"};
constexpr std::array<std::string_view, 3> kFameNames = {"rising", "star", "superstar"};
constexpr std::array<std::string_view, 4> kDemographicNames = {"occupation", "age", "gender",
                                                               "fame"};

template <std::size_t N>
std::vector<std::string> to_vector(const std::array<std::string_view, N>& names) {
  return {names.begin(), names.end()};
}

std::vector<std::string> split_list(std::string_view cell) {
  std::vector<std::string> out;
  if (cell.empty()) return out;
  std::size_t start = 0;
  while (true) {
    auto pos = cell.find('|', start);
    auto item = cell.substr(start, pos == std::string_view::npos ? cell.npos : pos - start);
    if (!item.empty()) out.emplace_back(item);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out.push_back('|');
    out += items[i];
  }
  return out;
}

std::optional<bool> parse_bool(std::string_view s) {
  if (s.empty() || s == "false" || s == "0" || s == "FALSE" || s == "False") return false;
  if (s == "true" || s == "1" || s == "TRUE" || s == "True") return true;
  return std::nullopt;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  if (s.empty()) return std::nullopt;
  Int value = 0;
  bool negative = false;
  std::size_t i = 0;
  if (s[0] == '-') {
    negative = true;
    i = 1;
  }
  if (i == s.size()) return std::nullopt;
  for (; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
    value = value * 10 + (s[i] - '0');
  }
  return negative ? -value : value;
}

}  // namespace

std::string_view to_string(MediaType v) { return kMediaNames[static_cast<int>(v)]; }
std::string_view to_string(AgeGroup v) { return kAgeNames[static_cast<int>(v)]; }
std::string_view to_string(Gender v) { return kGenderNames[static_cast<int>(v)]; }
std::string_view to_string(Occupation v) { return kOccupationNames[static_cast<int>(v)]; }
std::string_view to_string(Fame v) { return kFameNames[static_cast<int>(v)]; }
std::string_view to_string(Demographic v) { return kDemographicNames[static_cast<int>(v)]; }

MediaType parse_media_type(std::string_view s) {
  return parse_enum<MediaType>(s, kMediaNames, "media_type");
}
AgeGroup parse_age_group(std::string_view s) {
  return parse_enum<AgeGroup>(s, kAgeNames, "age_group");
}
Gender parse_gender(std::string_view s) { return parse_enum<Gender>(s, kGenderNames, "gender"); }
Occupation parse_occupation(std::string_view s) {
  return parse_enum<Occupation>(s, kOccupationNames, "occupation");
}
Fame parse_fame(std::string_view s) { return parse_enum<Fame>(s, kFameNames, "fame"); }
Demographic parse_demographic(std::string_view s) {
  try {
    return parse_enum<Demographic>(s, kDemographicNames, "demographic");
  } catch (const Error& e) {
    throw config_error("bad_value", e.what());
  }
}

int label_index(const CelebrityLabels& labels, Demographic d) {
  switch (d) {
    case Demographic::kOccupation:
      return static_cast<int>(labels.occupation);
    case Demographic::kAge:
      return static_cast<int>(labels.age_group);
    case Demographic::kGender:
      return static_cast<int>(labels.gender);
    case Demographic::kFame:
      return static_cast<int>(labels.fame);
  }
  throw internal_error("unreachable", "bad demographic");
}

const std::vector<std::string>& class_names(Demographic d) {
  static const std::array<std::vector<std::string>, 4> names = {
      to_vector(kOccupationNames), to_vector(kAgeNames), to_vector(kGenderNames),
      to_vector(kFameNames)};
  return names[static_cast<int>(d)];
}

std::size_t Corpus::tweet_count() const {
  std::size_t n = 0;
  for (const auto& r : records) {
    for (const auto& f : r.feeds) n += f.records.size();
  }
  return n;
}

void CorpusConfig::validate() const {
  if (followers_per_celebrity < 1) {
    throw config_error("bad_value", "followers_per_celebrity must be positive");
  }
}

std::string CorpusConfig::canonical() const {
  return fmt::format("followers_per_celebrity={};reference_year={};age_boundary={}",
                     followers_per_celebrity, labels.reference_year,
                     labels.boundary == AgeBoundary::kLowerGroup ? "lower" : "upper");
}

AgeGroup map_age_group(int birth_year, int reference_year, AgeBoundary boundary) {
  const int age = reference_year - birth_year;
  if (age < 20 || age > 80) {
    throw data_error("out_of_range",
                     fmt::format("age {} (born {}, reference {}) is outside [20, 80]", age,
                                 birth_year, reference_year));
  }
  if (boundary == AgeBoundary::kLowerGroup) {
    if (age <= 40) return AgeGroup::kA20To40;
    if (age <= 60) return AgeGroup::kA40To60;
    return AgeGroup::kA60To80;
  }
  if (age < 40) return AgeGroup::kA20To40;
  if (age < 60) return AgeGroup::kA40To60;
  return AgeGroup::kA60To80;
}

Fame map_fame(std::int64_t follower_count) {
  if (follower_count <= 1'000'000) return Fame::kRising;
  if (follower_count <= 2'500'000) return Fame::kStar;
  return Fame::kSuperstar;
}

CelebrityRecord assemble_celebrity(std::string id, CelebrityLabels labels,
                                   std::vector<FollowerFeed> feeds, const CorpusConfig& config) {
  if (id.empty()) throw data_error("schema", "celebrity_id must be non-empty");
  if (static_cast<int>(feeds.size()) != config.followers_per_celebrity) {
    throw data_error("cardinality", fmt::format("celebrity '{}' has {} follower feeds, expected {}",
                                                id, feeds.size(), config.followers_per_celebrity));
  }
  if (labels.birth_year) {
    const int age = config.labels.reference_year - *labels.birth_year;
    if (age < 20 || age > 80) {
      throw data_error("label_consistency",
                       fmt::format("celebrity '{}': age {} is outside [20, 80]", id, age));
    }
    const auto expected = map_age_group(*labels.birth_year, config.labels.reference_year,
                                        config.labels.boundary);
    if (expected != labels.age_group) {
      throw data_error("label_consistency",
                       fmt::format("celebrity '{}': birth year {} implies {} but label is {}", id,
                                   *labels.birth_year, to_string(expected),
                                   to_string(labels.age_group)));
    }
  }
  if (labels.follower_count) {
    if (*labels.follower_count < 0) {
      throw data_error("label_consistency",
                       fmt::format("celebrity '{}': negative follower_count", id));
    }
    const auto expected = map_fame(*labels.follower_count);
    if (expected != labels.fame) {
      throw data_error("label_consistency",
                       fmt::format("celebrity '{}': follower_count {} implies {} but label is {}",
                                   id, *labels.follower_count, to_string(expected),
                                   to_string(labels.fame)));
    }
  }
  return CelebrityRecord{std::move(id), labels, std::move(feeds)};
}

Corpus make_corpus(std::vector<CelebrityRecord> records, std::string config_fingerprint) {
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (!seen.insert(r.celebrity_id).second) {
      throw data_error("duplicate_id", fmt::format("duplicate celebrity_id '{}'", r.celebrity_id));
    }
  }
  return Corpus{std::move(records), std::move(config_fingerprint)};
}

// ---- follower export CSV -------------------------------------------------

FollowerExport parse_follower_export(std::string_view content) {
  auto rows = csv::parse(content);
  FollowerExport out;
  if (rows.empty()) throw data_error("schema", "follower export is empty (no header row)");

  const auto& header = rows.front().fields;
  std::array<std::size_t, kFollowerExportColumns.size()> column{};
  for (std::size_t c = 0; c < kFollowerExportColumns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), kFollowerExportColumns[c]);
    if (it == header.end()) {
      throw data_error("schema",
                       fmt::format("follower export header is missing column '{}'",
                                   kFollowerExportColumns[c]));
    }
    column[c] = static_cast<std::size_t>(it - header.begin());
  }

  std::set<std::string> ids;
  const std::size_t data_rows = rows.size() - 1;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto fail = [&](std::string message) { out.errors.push_back({r, std::move(message)}); };
    if (row.malformed) {
      fail("malformed quoting");
      continue;
    }
    if (row.fields.size() != header.size()) {
      fail(fmt::format("expected {} fields, found {}", header.size(), row.fields.size()));
      continue;
    }
    auto cell = [&](std::size_t c) -> const std::string& { return row.fields[column[c]]; };
    RawTweetRecord rec;
    rec.tweet_id = cell(0);
    rec.tweet_text = cell(1);
    rec.author_handle = cell(2);
    if (rec.tweet_id.empty()) {
      fail("empty tweet_id");
      continue;
    }
    if (rec.tweet_text.empty()) {
      fail("empty tweet_text");
      continue;
    }
    if (!ids.insert(rec.tweet_id).second) {
      fail(fmt::format("duplicate tweet_id '{}'", rec.tweet_id));
      continue;
    }
    if (!cell(3).empty()) rec.timestamp = cell(3);
    auto retweet = parse_bool(cell(4));
    if (!retweet) {
      fail(fmt::format("bad is_retweet value '{}'", cell(4)));
      continue;
    }
    rec.is_retweet = *retweet;
    if (!cell(5).empty()) rec.language_tag = cell(5);
    rec.urls = split_list(cell(6));
    rec.hashtags = split_list(cell(7));
    if (!cell(8).empty()) {
      auto pos = std::find(kMediaNames.begin(), kMediaNames.end(), cell(8));
      if (pos == kMediaNames.end()) {
        fail(fmt::format("bad media_type '{}'", cell(8)));
        continue;
      }
      rec.media_type = static_cast<MediaType>(pos - kMediaNames.begin());
    }
    out.records.push_back(std::move(rec));
  }
  if (data_rows > 0 && out.errors.size() * 10 > data_rows) {
    throw data_error("row_errors",
                     fmt::format("{} of {} rows failed to parse (first: row {}: {})",
                                 out.errors.size(), data_rows, out.errors.front().row,
                                 out.errors.front().message));
  }
  return out;
}

std::string format_follower_export(std::span<const RawTweetRecord> records) {
  std::string out = csv::join_row({kFollowerExportColumns.begin(), kFollowerExportColumns.end()});
  out.push_back('\n');
  for (const auto& r : records) {
    out += csv::join_row({r.tweet_id, r.tweet_text, r.author_handle, r.timestamp.value_or(""),
                          r.is_retweet ? "true" : "false", r.language_tag.value_or(""),
                          join_list(r.urls), join_list(r.hashtags),
                          std::string(to_string(r.media_type))});
    out.push_back('\n');
  }
  return out;
}

// ---- labels CSV ----------------------------------------------------------

std::vector<LabelRow> parse_labels_file(std::string_view content) {
  static constexpr std::array<std::string_view, 5> kColumns = {
      "celebrity_id", "birth_year", "gender", "occupation", "follower_count"};
  auto rows = csv::parse(content);
  if (rows.empty()) throw data_error("schema", "labels file is empty (no header row)");
  const auto& header = rows.front().fields;
  std::array<std::size_t, kColumns.size()> column{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), kColumns[c]);
    if (it == header.end()) {
      throw data_error("schema",
                       fmt::format("labels header is missing column '{}'", kColumns[c]));
    }
    column[c] = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<LabelRow> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    auto fail = [&](const std::string& message) {
      return data_error("labels_row", fmt::format("labels row {}: {}", r, message));
    };
    if (row.malformed || row.fields.size() != header.size()) throw fail("malformed row");
    auto cell = [&](std::size_t c) -> const std::string& { return row.fields[column[c]]; };
    LabelRow lr;
    lr.celebrity_id = cell(0);
    if (lr.celebrity_id.empty()) throw fail("empty celebrity_id");
    auto year = parse_int<int>(cell(1));
    if (!year) throw fail(fmt::format("bad birth_year '{}'", cell(1)));
    lr.birth_year = *year;
    try {
      lr.gender = parse_gender(cell(2));
      lr.occupation = parse_occupation(cell(3));
    } catch (const Error& e) {
      throw fail(e.what());
    }
    auto followers = parse_int<std::int64_t>(cell(4));
    if (!followers || *followers < 0) throw fail(fmt::format("bad follower_count '{}'", cell(4)));
    lr.follower_count = *followers;
    out.push_back(std::move(lr));
  }
  return out;
}

std::string format_labels_file(std::span<const LabelRow> rows) {
  std::string out = "celebrity_id,birth_year,gender,occupation,follower_count\n";
  for (const auto& r : rows) {
    out += csv::join_row({r.celebrity_id, std::to_string(r.birth_year),
                          std::string(to_string(r.gender)), std::string(to_string(r.occupation)),
                          std::to_string(r.follower_count)});
    out.push_back('\n');
  }
  return out;
}

CelebrityLabels derive_labels(const LabelRow& row, const LabelScheme& scheme) {
  CelebrityLabels labels;
  labels.age_group = map_age_group(row.birth_year, scheme.reference_year, scheme.boundary);
  labels.gender = row.gender;
  labels.occupation = row.occupation;
  labels.fame = map_fame(row.follower_count);
  labels.birth_year = row.birth_year;
  labels.follower_count = row.follower_count;
  return labels;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("io", fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw config_error("io", fmt::format("cannot write '{}'", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw config_error("io", fmt::format("write failed for '{}'", path.string()));
}

Corpus ingest_directory(const std::filesystem::path& input_dir,
                        const std::filesystem::path& labels_file, const CorpusConfig& config,
                        IngestReport* report) {
  namespace fs = std::filesystem;
  config.validate();
  if (!fs::is_regular_file(labels_file)) {
    throw config_error("missing_path",
                       fmt::format("labels file '{}' does not exist", labels_file.string()));
  }
  if (!fs::is_directory(input_dir)) {
    throw config_error("missing_path",
                       fmt::format("input directory '{}' does not exist", input_dir.string()));
  }
  const auto label_rows = parse_labels_file(read_text_file(labels_file));

  std::vector<CelebrityRecord> records;
  for (const auto& row : label_rows) {
    const fs::path dir = input_dir / row.celebrity_id;
    if (!fs::is_directory(dir)) {
      throw data_error("missing_feeds", fmt::format("no follower directory '{}' for celebrity '{}'",
                                                    dir.string(), row.celebrity_id));
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    std::vector<FollowerFeed> feeds;
    for (const auto& file : files) {
      FollowerExport parsed;
      try {
        parsed = parse_follower_export(read_text_file(file));
      } catch (const Error& e) {
        throw Error(e.kind(), e.code(), fmt::format("{}: {}", file.string(), e.what()));
      }
      if (report && !parsed.errors.empty()) {
        report->files.push_back({file.string(), parsed.errors});
      }
      feeds.push_back({file.stem().string(), std::move(parsed.records)});
    }
    records.push_back(assemble_celebrity(row.celebrity_id, derive_labels(row, config.labels),
                                         std::move(feeds), config));
  }
  return make_corpus(std::move(records), fingerprint("ingest;" + config.canonical()));
}

// ---- archive -------------------------------------------------------------

using nlohmann::json;

json labels_to_json(const CelebrityLabels& labels) {
  json j = {{"age_group", to_string(labels.age_group)},
            {"gender", to_string(labels.gender)},
            {"occupation", to_string(labels.occupation)},
            {"fame", to_string(labels.fame)}};
  if (labels.birth_year) j["birth_year"] = *labels.birth_year;
  if (labels.follower_count) j["follower_count"] = *labels.follower_count;
  return j;
}

CelebrityLabels labels_from_json(const json& j) {
  CelebrityLabels labels;
  labels.age_group = parse_age_group(j.at("age_group").get<std::string>());
  labels.gender = parse_gender(j.at("gender").get<std::string>());
  labels.occupation = parse_occupation(j.at("occupation").get<std::string>());
  labels.fame = parse_fame(j.at("fame").get<std::string>());
  if (j.contains("birth_year")) labels.birth_year = j.at("birth_year").get<int>();
  if (j.contains("follower_count")) {
    labels.follower_count = j.at("follower_count").get<std::int64_t>();
  }
  return labels;
}

namespace {

json tweet_to_json(const RawTweetRecord& r) {
  json j = {{"tweet_id", r.tweet_id},
            {"tweet_text", r.tweet_text},
            {"author_handle", r.author_handle},
            {"is_retweet", r.is_retweet},
            {"urls", r.urls},
            {"hashtags", r.hashtags},
            {"media_type", to_string(r.media_type)}};
  if (r.timestamp) j["timestamp"] = *r.timestamp;
  if (r.language_tag) j["language_tag"] = *r.language_tag;
  return j;
}

RawTweetRecord tweet_from_json(const json& j) {
  RawTweetRecord r;
  r.tweet_id = j.at("tweet_id").get<std::string>();
  r.tweet_text = j.at("tweet_text").get<std::string>();
  r.author_handle = j.at("author_handle").get<std::string>();
  r.is_retweet = j.at("is_retweet").get<bool>();
  r.urls = j.at("urls").get<std::vector<std::string>>();
  r.hashtags = j.at("hashtags").get<std::vector<std::string>>();
  r.media_type = parse_media_type(j.at("media_type").get<std::string>());
  if (j.contains("timestamp")) r.timestamp = j.at("timestamp").get<std::string>();
  if (j.contains("language_tag")) r.language_tag = j.at("language_tag").get<std::string>();
  return r;
}

}  // namespace

json corpus_to_json(const Corpus& corpus) {
  json records = json::array();
  for (const auto& rec : corpus.records) {
    json feeds = json::array();
    for (const auto& feed : rec.feeds) {
      json tweets = json::array();
      for (const auto& t : feed.records) tweets.push_back(tweet_to_json(t));
      feeds.push_back({{"follower_handle", feed.follower_handle}, {"records", std::move(tweets)}});
    }
    records.push_back({{"celebrity_id", rec.celebrity_id},
                       {"labels", labels_to_json(rec.labels)},
                       {"feeds", std::move(feeds)}});
  }
  return {{"format_version", kCorpusFormatVersion},
          {"kind", "corpus"},
          {"config_fingerprint", corpus.config_fingerprint},
          {"records", std::move(records)}};
}

Corpus corpus_from_json(const json& j) {
  try {
    std::vector<CelebrityRecord> records;
    for (const auto& rj : j.at("records")) {
      CelebrityRecord rec;
      rec.celebrity_id = rj.at("celebrity_id").get<std::string>();
      rec.labels = labels_from_json(rj.at("labels"));
      for (const auto& fj : rj.at("feeds")) {
        FollowerFeed feed;
        feed.follower_handle = fj.at("follower_handle").get<std::string>();
        for (const auto& tj : fj.at("records")) feed.records.push_back(tweet_from_json(tj));
        rec.feeds.push_back(std::move(feed));
      }
      records.push_back(std::move(rec));
    }
    return make_corpus(std::move(records), j.at("config_fingerprint").get<std::string>());
  } catch (const json::exception& e) {
    throw data_error("corrupt", fmt::format("corpus archive is corrupted: {}", e.what()));
  } catch (const Error& e) {
    throw data_error("corrupt", fmt::format("corpus archive is corrupted: {}", e.what()));
  }
}

json read_json_artifact(const std::filesystem::path& path, std::string_view kind) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw data_error("corrupt", fmt::format("'{}' is not a valid archive: {}", path.string(),
                                            e.what()));
  }
  if (!j.is_object() || !j.contains("format_version") || !j["format_version"].is_number_integer()) {
    throw data_error("corrupt", fmt::format("'{}' has no format_version", path.string()));
  }
  if (j["format_version"].get<int>() != kCorpusFormatVersion) {
    throw data_error("version", fmt::format("'{}' has format_version {}, expected {}",
                                            path.string(), j["format_version"].get<int>(),
                                            kCorpusFormatVersion));
  }
  if (!j.contains("kind") || j["kind"] != kind) {
    throw data_error("corrupt", fmt::format("'{}' is not a {} artifact", path.string(), kind));
  }
  return j;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  write_text_file(path, corpus_to_json(corpus).dump(1) + "\n");
}

Corpus load_corpus(const std::filesystem::path& path) {
  return corpus_from_json(read_json_artifact(path, "corpus"));
}

// ---- synthetic corpora ---------------------------------------------------

namespace {

// Arabic-script letters used by Urdu that normalization leaves untouched
// (no Arabic yeh, kaf or heh).
constexpr char32_t kSynthLetters[] = {
    0x0627, 0x0628, 0x067E, 0x062A, 0x0679, 0x062C, 0x0686, 0x062D, 0x062E, 0x062F,
    0x0688, 0x0631, 0x0691, 0x0632, 0x0633, 0x0634, 0x0635, 0x0637, 0x0639, 0x063A,
    0x0641, 0x0642, 0x06A9, 0x06AF, 0x0644, 0x0645, 0x0646, 0x0648, 0x06CC, 0x06D2, 0x06C1};

std::string random_word(Rng& rng, int min_len, int max_len) {
  const auto len = rng.integer(min_len, max_len);
  std::u32string w;
  for (std::int64_t i = 0; i < len; ++i) {
    w.push_back(kSynthLetters[rng.index(std::size(kSynthLetters))]);
  }
  return utf8::encode(w);
}

struct Lexicon {
  std::array<std::vector<std::string>, 4> markers;  // indexed by Demographic
  std::vector<std::string> filler;
};

Lexicon make_lexicon(std::uint64_t seed, int filler_count) {
  Rng rng(derive_seed(seed, {1}));
  std::set<std::string> used;
  Lexicon lex;
  for (auto d : kAllDemographics) {
    for (std::size_t c = 0; c < class_names(d).size(); ++c) {
      std::string w;
      do {
        w = random_word(rng, 6, 8);
      } while (!used.insert(w).second);
      lex.markers[static_cast<int>(d)].push_back(w);
    }
  }
  while (static_cast<int>(lex.filler.size()) < filler_count) {
    std::string w = random_word(rng, 2, 6);
    if (used.insert(w).second) lex.filler.push_back(std::move(w));
  }
  return lex;
}

std::string csv_weights(const std::vector<double>& w) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) out += fmt::format("{}{}", i ? "," : "", w[i]);
  return out;
}

}  // namespace

int synthetic_marker_count() {
  int n = 0;
  for (auto d : kAllDemographics) n += static_cast<int>(class_names(d).size());
  return n;
}

std::string synthetic_marker(std::uint64_t seed, Demographic d, int cls) {
  return make_lexicon(seed, 0).markers[static_cast<int>(d)].at(cls);
}

void SynthSpec::validate() const {
  auto fail = [](const std::string& m) { return config_error("spec", m); };
  if (n_celebrities < 1) throw fail("n_celebrities must be positive");
  if (followers_per_celebrity < 1) throw fail("followers_per_celebrity must be positive");
  if (min_tweets < 1) throw fail("min_tweets must be positive");
  if (vocab_size < 1) throw fail("vocab_size must be positive");
  if (vocab_size < synthetic_marker_count()) {
    throw fail(fmt::format("vocab_size {} is smaller than the {} label marker tokens", vocab_size,
                           synthetic_marker_count()));
  }
  if (!(class_signal_strength >= 0.0 && class_signal_strength <= 1.0)) {
    throw fail("class_signal_strength must lie in [0, 1]");
  }
  if (min_tokens_per_tweet < 1 || max_tokens_per_tweet < min_tokens_per_tweet) {
    throw fail("invalid tokens-per-tweet range");
  }
  auto check_weights = [&](const std::vector<double>& w, Demographic d) {
    if (w.size() != class_names(d).size()) {
      throw fail(fmt::format("{} weights need {} entries", to_string(d), class_names(d).size()));
    }
    double total = 0;
    for (double x : w) {
      if (!(x >= 0.0)) throw fail(fmt::format("{} weights must be non-negative", to_string(d)));
      total += x;
    }
    if (total <= 0) throw fail(fmt::format("{} weights must not all be zero", to_string(d)));
  };
  check_weights(age_weights, Demographic::kAge);
  check_weights(gender_weights, Demographic::kGender);
  check_weights(occupation_weights, Demographic::kOccupation);
  check_weights(fame_weights, Demographic::kFame);
}

std::string SynthSpec::canonical() const {
  return fmt::format(
      "synth;n={};followers={};min_tweets={};vocab={};signal={};seed={};reference_year={};"
      "tokens={}-{};age={};gender={};occupation={};fame={}",
      n_celebrities, followers_per_celebrity, min_tweets, vocab_size, class_signal_strength, seed,
      reference_year, min_tokens_per_tweet, max_tokens_per_tweet, csv_weights(age_weights),
      csv_weights(gender_weights), csv_weights(occupation_weights), csv_weights(fame_weights));
}

Corpus generate_synthetic_corpus(const SynthSpec& spec) {
  spec.validate();
  const Lexicon lex = make_lexicon(spec.seed, spec.vocab_size);

  // Zipf-distributed filler words, sampled through the cumulative table.
  std::vector<double> cumulative(lex.filler.size());
  double acc = 0;
  for (std::size_t i = 0; i < lex.filler.size(); ++i) {
    acc += 1.0 / static_cast<double>(i + 1);
    cumulative[i] = acc;
  }
  auto draw_filler = [&](Rng& rng) -> const std::string& {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    return lex.filler[static_cast<std::size_t>(it - cumulative.begin())];
  };

  CorpusConfig config;
  config.followers_per_celebrity = spec.followers_per_celebrity;
  config.labels.reference_year = spec.reference_year;

  Rng label_rng(derive_seed(spec.seed, {2}));
  std::vector<CelebrityRecord> records;
  records.reserve(static_cast<std::size_t>(spec.n_celebrities));
  for (int c = 0; c < spec.n_celebrities; ++c) {
    CelebrityLabels labels;
    labels.occupation = static_cast<Occupation>(label_rng.categorical(spec.occupation_weights));
    labels.age_group = static_cast<AgeGroup>(label_rng.categorical(spec.age_weights));
    labels.gender = static_cast<Gender>(label_rng.categorical(spec.gender_weights));
    labels.fame = static_cast<Fame>(label_rng.categorical(spec.fame_weights));
    static constexpr int kAgeLo[] = {20, 41, 61};
    static constexpr int kAgeHi[] = {40, 60, 80};
    const int age = static_cast<int>(label_rng.integer(kAgeLo[static_cast<int>(labels.age_group)],
                                                       kAgeHi[static_cast<int>(labels.age_group)]));
    labels.birth_year = spec.reference_year - age;
    static constexpr std::int64_t kFameLo[] = {10'000, 1'000'001, 2'500'001};
    static constexpr std::int64_t kFameHi[] = {1'000'000, 2'500'000, 20'000'000};
    labels.follower_count = label_rng.integer(kFameLo[static_cast<int>(labels.fame)],
                                              kFameHi[static_cast<int>(labels.fame)]);

    const std::string id = fmt::format("celeb_{:04d}", c);
    const std::array<const std::string*, 4> markers = {
        &lex.markers[0][label_index(labels, Demographic::kOccupation)],
        &lex.markers[1][label_index(labels, Demographic::kAge)],
        &lex.markers[2][label_index(labels, Demographic::kGender)],
        &lex.markers[3][label_index(labels, Demographic::kFame)]};

    Rng text_rng(derive_seed(spec.seed, {3, static_cast<std::uint64_t>(c)}));
    std::vector<FollowerFeed> feeds;
    for (int f = 0; f < spec.followers_per_celebrity; ++f) {
      FollowerFeed feed;
      feed.follower_handle = fmt::format("{}_f{:02d}", id, f);
      for (int t = 0; t < spec.min_tweets; ++t) {
        std::vector<std::string> words;
        const auto n_words =
            text_rng.integer(spec.min_tokens_per_tweet, spec.max_tokens_per_tweet);
        for (std::int64_t w = 0; w < n_words; ++w) words.push_back(draw_filler(text_rng));
        for (const auto* marker : markers) {
          if (text_rng.bernoulli(spec.class_signal_strength)) {
            const auto pos = text_rng.index(words.size() + 1);
            words.insert(words.begin() + static_cast<std::ptrdiff_t>(pos), *marker);
          }
        }
        std::string text;
        for (std::size_t w = 0; w < words.size(); ++w) {
          if (w) text.push_back(' ');
          text += words[w];
        }
        if (text_rng.bernoulli(0.3)) text += " ۔";

        RawTweetRecord rec;
        rec.tweet_id = fmt::format("{}_t{:03d}", feed.follower_handle, t);
        rec.tweet_text = std::move(text);
        rec.author_handle = feed.follower_handle;
        rec.timestamp = fmt::format("{}-{:02d}-{:02d}T{:02d}:{:02d}:00Z", spec.reference_year,
                                    text_rng.integer(1, 12), text_rng.integer(1, 28),
                                    text_rng.integer(0, 23), text_rng.integer(0, 59));
        rec.language_tag = "ur";
        feed.records.push_back(std::move(rec));
      }
      feeds.push_back(std::move(feed));
    }
    records.push_back(assemble_celebrity(id, labels, std::move(feeds), config));
  }
  return make_corpus(std::move(records), fingerprint(spec.canonical() + ";" + config.canonical()));
}

}  // namespace celebprof
