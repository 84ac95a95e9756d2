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

#include "celebprof/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <ostream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "celebprof/config.hpp"
#include "celebprof/corpus.hpp"
#include "celebprof/error.hpp"
#include "celebprof/evaluation.hpp"
#include "celebprof/preprocess.hpp"
#include "json.hpp"

namespace celebprof {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::string out_dir;
};

void add_config_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "INI configuration file");
  cmd->add_option("--set", o.sets, "Override a configuration key (section.key=value)");
}

RunConfig build_config(const CommonOptions& o) {
  RunConfig rc = o.config_path.empty() ? RunConfig{} : load_run_config(o.config_path);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw config_error("bad_value", fmt::format("--set expects key=value, got '{}'", s));
    }
    rc.set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (o.seed) apply_seed(rc, *o.seed);
  if (o.jobs) rc.experiment.jobs = *o.jobs;
  return rc;
}

void require_seed(const RunConfig& rc) {
  if (!rc.seed) throw config_error("missing_seed", "a seed is required (--seed or run.seed)");
}

fs::path prepare_out_dir(const std::string& dir) {
  if (dir.empty()) throw config_error("missing_path", "--out is required");
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) {
    throw data_error("io", fmt::format("cannot create output directory '{}': {}", dir, ec.message()));
  }
  return p;
}

void require_file(const std::string& path, std::string_view flag) {
  if (path.empty()) throw config_error("missing_path", fmt::format("{} is required", flag));
  if (!fs::exists(path)) {
    throw config_error("missing_path", fmt::format("{} '{}' does not exist", flag, path));
  }
}

void write_json(const fs::path& path, const json& j, std::ostream& out) {
  write_text_file(path, j.dump(1) + "\n");
  out << "wrote " << path.string() << "\n";
}

void write_text(const fs::path& path, std::string_view text, std::ostream& out) {
  write_text_file(path, text);
  out << "wrote " << path.string() << "\n";
}

std::string ingest_errors_tsv(const IngestReport& report) {
  std::string text = "file\trow\tmessage\n";
  for (const auto& f : report.files) {
    for (const auto& e : f.errors) text += fmt::format("{}\t{}\t{}\n", f.path, e.row, e.message);
  }
  return text;
}

// Follower CSVs and a labels file laid out the way `ingest` reads them.
void export_corpus(const Corpus& corpus, const fs::path& dir) {
  std::vector<LabelRow> rows;
  for (const auto& rec : corpus.records) {
    const fs::path cdir = dir / rec.celebrity_id;
    fs::create_directories(cdir);
    for (const auto& feed : rec.feeds) {
      write_text_file(cdir / (feed.follower_handle + ".csv"), format_follower_export(feed.records));
    }
    if (!rec.labels.birth_year || !rec.labels.follower_count) {
      throw data_error("precondition", fmt::format("'{}' lacks raw label values", rec.celebrity_id));
    }
    rows.push_back({rec.celebrity_id, *rec.labels.birth_year, rec.labels.gender,
                    rec.labels.occupation, *rec.labels.follower_count});
  }
  write_text_file(dir / "labels.csv", format_labels_file(rows));
}

Corpus load_source(const RunConfig& rc) {
  switch (rc.source) {
    case DataSource::kSynthetic: return generate_synthetic_corpus(rc.synth);
    case DataSource::kArchive: return load_corpus(rc.archive);
    case DataSource::kDirectory: break;
  }
  return ingest_directory(rc.input_dir, rc.labels_file, rc.corpus);
}

EvaluationReport train_and_evaluate(const CleanCorpus& clean, const RunConfig& rc,
                                     ModelBundle* bundle_out) {
  ModelBundle bundle = train_models(clean, rc.experiment);
  bundle.config_echo = rc.entries();
  EvaluationReport report = evaluate_models(bundle, clean);
  if (bundle_out) *bundle_out = std::move(bundle);
  return report;
}

void write_reports(const fs::path& dir, const EvaluationReport& report, std::ostream& out) {
  write_text(dir / "report.txt", format_text_report(report), out);
  write_json(dir / "report.json", report_to_json(report), out);
}

// Reads input_dir/<celebrity_id>/*.csv without labels.
std::vector<std::pair<std::string, std::vector<FollowerFeed>>> read_unlabeled(
    const fs::path& input_dir, std::ostream& err) {
  if (!fs::is_directory(input_dir)) {
    throw config_error("missing_path",
                       fmt::format("input directory '{}' does not exist", input_dir.string()));
  }
  std::vector<fs::path> celeb_dirs;
  for (const auto& e : fs::directory_iterator(input_dir)) {
    if (e.is_directory()) celeb_dirs.push_back(e.path());
  }
  std::sort(celeb_dirs.begin(), celeb_dirs.end());
  std::vector<std::pair<std::string, std::vector<FollowerFeed>>> out;
  for (const auto& cdir : celeb_dirs) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(cdir)) {
      if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<FollowerFeed> feeds;
    for (const auto& f : files) {
      FollowerExport ex = parse_follower_export(read_text_file(f));
      for (const auto& e : ex.errors) {
        err << json{{"warning", "row_error"}, {"file", f.string()}, {"row", e.row},
                    {"message", e.message}}.dump()
            << "\n";
      }
      feeds.push_back({f.stem().string(), std::move(ex.records)});
    }
    out.emplace_back(cdir.filename().string(), std::move(feeds));
  }
  return out;
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return 1;
    case ErrorKind::kData: return 2;
    case ErrorKind::kInternal: return 3;
  }
  return 3;
}

std::string_view kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kData: return "data";
    case ErrorKind::kInternal: return "internal";
  }
  return "internal";
}

int report_error(std::ostream& err, std::string_view kind, std::string_view code,
                 std::string_view message, int status) {
  err << json{{"error", code}, {"kind", kind}, {"message", message}, {"exit", status}}.dump() << "\n";
  return status;
}

}  // namespace

int execute_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Predicts celebrity demographics from the Urdu tweets of their followers",
               "celebprof"};
  bool show_version = false;
  app.add_flag("--version", show_version, "Print tool and artifact format versions");
  app.require_subcommand(0, 1);

  CommonOptions common;

  SynthSpec synth_spec;
  bool synth_export = false;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled corpus archive");
  synth->add_option("--celebrities", synth_spec.n_celebrities, "Number of celebrities");
  synth->add_option("--followers", synth_spec.followers_per_celebrity, "Followers per celebrity");
  synth->add_option("--min-tweets", synth_spec.min_tweets, "Tweets per follower");
  synth->add_option("--vocab-size", synth_spec.vocab_size, "Filler vocabulary size");
  synth->add_option("--signal", synth_spec.class_signal_strength, "Class signal strength in [0,1]");
  synth->add_flag("--export", synth_export, "Also write follower CSVs and labels.csv under out/export");
  synth->add_option("--seed", common.seed, "Random seed (required)");
  synth->add_option("--out", common.out_dir, "Output directory");

  std::string input_dir, labels_file;
  auto* ingest = app.add_subcommand("ingest", "Build a corpus archive from follower CSVs");
  ingest->add_option("--input", input_dir, "Directory of <celebrity_id>/<follower>.csv files");
  ingest->add_option("--labels", labels_file, "Labels CSV");
  ingest->add_option("--out", common.out_dir, "Output directory");
  add_config_options(ingest, common);

  std::string corpus_path;
  auto* preprocess = app.add_subcommand("preprocess", "Clean a corpus archive");
  preprocess->add_option("--corpus", corpus_path, "Corpus archive");
  preprocess->add_option("--out", common.out_dir, "Output directory");
  add_config_options(preprocess, common);

  std::string clean_path;
  auto* train = app.add_subcommand("train", "Train every model on the training split");
  train->add_option("--clean", clean_path, "Cleaned corpus archive");
  train->add_option("--seed", common.seed, "Master seed (required)");
  train->add_option("--jobs", common.jobs, "Concurrent grid cells");
  train->add_option("--out", common.out_dir, "Output directory");
  add_config_options(train, common);

  std::string models_path;
  auto* evaluate = app.add_subcommand("evaluate", "Score trained models on the test split");
  evaluate->add_option("--models", models_path, "Model bundle");
  evaluate->add_option("--clean", clean_path, "Cleaned corpus archive");
  evaluate->add_option("--jobs", common.jobs, "Concurrent grid cells");
  evaluate->add_option("--out", common.out_dir, "Output directory");

  auto* run = app.add_subcommand("run", "Ingest, preprocess, train and evaluate in one go");
  run->add_option("--seed", common.seed, "Master seed (required unless run.seed is set)");
  run->add_option("--jobs", common.jobs, "Concurrent grid cells");
  run->add_option("--out", common.out_dir, "Output directory");
  add_config_options(run, common);

  std::string model_name = "logreg";
  auto* predict = app.add_subcommand("predict", "Predict demographics for unlabeled follower CSVs");
  predict->add_option("--models", models_path, "Model bundle");
  predict->add_option("--input", input_dir, "Directory of <celebrity_id>/<follower>.csv files");
  predict->add_option("--model", model_name, "Model to use (knn, logreg, dtree, rforest, svm, cnn, lstm)");
  predict->add_option("--out", common.out_dir, "Output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    return report_error(err, "config", "usage", e.what(), 1);
  }

  try {
    if (show_version) {
      out << fmt::format("celebprof {} (archive format {})\n", kVersion, kCorpusFormatVersion);
      return 0;
    }
    if (*synth) {
      if (!common.seed) throw config_error("missing_seed", "synth requires --seed");
      synth_spec.seed = *common.seed;
      synth_spec.validate();
      const fs::path dir = prepare_out_dir(common.out_dir);
      Corpus corpus = generate_synthetic_corpus(synth_spec);
      write_json(dir / "corpus.json", corpus_to_json(corpus), out);
      if (synth_export) {
        export_corpus(corpus, dir / "export");
        out << "wrote " << (dir / "export").string() << "\n";
      }
      out << fmt::format("{} celebrities, {} tweets\n", corpus.records.size(), corpus.tweet_count());
    } else if (*ingest) {
      RunConfig rc = build_config(common);
      if (input_dir.empty()) throw config_error("missing_path", "--input is required");
      if (labels_file.empty()) throw config_error("missing_path", "--labels is required");
      IngestReport report;
      Corpus corpus = ingest_directory(input_dir, labels_file, rc.corpus, &report);
      const fs::path dir = prepare_out_dir(common.out_dir);
      write_json(dir / "corpus.json", corpus_to_json(corpus), out);
      write_text(dir / "ingest_errors.tsv", ingest_errors_tsv(report), out);
      out << fmt::format("{} celebrities, {} tweets\n", corpus.records.size(), corpus.tweet_count());
    } else if (*preprocess) {
      RunConfig rc = build_config(common);
      require_file(corpus_path, "--corpus");
      CleanCorpus clean = preprocess_corpus(load_corpus(corpus_path), rc.preprocess);
      const fs::path dir = prepare_out_dir(common.out_dir);
      write_json(dir / "clean.json", clean_corpus_to_json(clean), out);
      write_text(dir / "retention.tsv", clean.report.to_text(), out);
      out << fmt::format("{} documents, {} flagged\n", clean.documents.size(),
                         clean.report.flagged_count());
    } else if (*train) {
      RunConfig rc = build_config(common);
      require_seed(rc);
      rc.experiment.validate();
      require_file(clean_path, "--clean");
      CleanCorpus clean = load_clean_corpus(clean_path);
      ModelBundle bundle = train_models(clean, rc.experiment);
      bundle.config_echo = rc.entries();
      const fs::path dir = prepare_out_dir(common.out_dir);
      write_json(dir / "models.json", bundle_to_json(bundle), out);
    } else if (*evaluate) {
      require_file(models_path, "--models");
      require_file(clean_path, "--clean");
      ModelBundle bundle = bundle_from_json(read_json_artifact(models_path, "models"));
      if (common.jobs) bundle.config.jobs = *common.jobs;
      bundle.config.validate();
      EvaluationReport report = evaluate_models(bundle, load_clean_corpus(clean_path));
      write_reports(prepare_out_dir(common.out_dir), report, out);
    } else if (*run) {
      RunConfig rc = build_config(common);
      rc.validate();
      const fs::path dir = prepare_out_dir(common.out_dir.empty() ? rc.output_dir.string()
                                                                  : common.out_dir);
      Corpus corpus = load_source(rc);
      write_json(dir / "corpus.json", corpus_to_json(corpus), out);
      CleanCorpus clean = preprocess_corpus(corpus, rc.preprocess);
      write_json(dir / "clean.json", clean_corpus_to_json(clean), out);
      write_text(dir / "retention.tsv", clean.report.to_text(), out);
      ModelBundle bundle;
      EvaluationReport report = train_and_evaluate(clean, rc, &bundle);
      write_json(dir / "models.json", bundle_to_json(bundle), out);
      write_text(dir / "config.ini", rc.to_ini(), out);
      write_reports(dir, report, out);
    } else if (*predict) {
      require_file(models_path, "--models");
      ModelBundle bundle = bundle_from_json(read_json_artifact(models_path, "models"));
      RunConfig rc;
      for (const auto& [key, value] : bundle.config_echo) rc.set(key, value);
      const ModelKind kind = parse_model_kind(model_name);
      if (input_dir.empty()) throw config_error("missing_path", "--input is required");
      auto celebrities = read_unlabeled(input_dir, err);

      std::vector<CleanDocument> docs;
      std::vector<std::size_t> usable;
      for (std::size_t i = 0; i < celebrities.size(); ++i) {
        CleanDocument doc = clean_document(celebrities[i].first, celebrities[i].second, rc.preprocess);
        if (doc.tokens.empty()) {
          err << json{{"warning", "empty_document"}, {"celebrity_id", celebrities[i].first}}.dump()
              << "\n";
          continue;
        }
        usable.push_back(i);
        docs.push_back(std::move(doc));
      }
      std::vector<std::vector<std::string>> cells(celebrities.size(),
                                                  std::vector<std::string>(4, "-"));
      for (std::size_t di = 0; di < kAllDemographics.size(); ++di) {
        if (docs.empty()) break;
        const auto pred = predict_cell(bundle, bundle.cell(kAllDemographics[di], kind), docs);
        for (std::size_t j = 0; j < usable.size(); ++j) {
          cells[usable[j]][di] = class_names(kAllDemographics[di])[static_cast<std::size_t>(pred[j])];
        }
      }
      std::string tsv = "celebrity_id";
      for (auto d : kAllDemographics) tsv += fmt::format("\t{}", to_string(d));
      tsv += "\n";
      for (std::size_t i = 0; i < celebrities.size(); ++i) {
        tsv += fmt::format("{}\t{}\n", celebrities[i].first, fmt::join(cells[i], "\t"));
      }
      write_text(prepare_out_dir(common.out_dir) / "predictions.tsv", tsv, out);
    } else {
      out << app.help();
    }
    return 0;
  } catch (const Error& e) {
    return report_error(err, kind_name(e.kind()), e.code(), e.what(), exit_code(e.kind()));
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error(err, "data", "io", e.what(), 2);
  } catch (const std::exception& e) {
    return report_error(err, "internal", "unexpected", e.what(), 3);
  }
}

}  // namespace celebprof
