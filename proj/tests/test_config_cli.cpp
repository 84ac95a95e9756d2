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
#include <sstream>

#include "celebprof/cli.hpp"
#include "celebprof/config.hpp"
#include "celebprof/error.hpp"
#include "doctest.h"

namespace celebprof {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int status = 0;
  std::string out, err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "celebprof");
  std::ostringstream out, err;
  Outcome o;
  o.status = execute_command(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("celebprof_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// A small but complete synthetic run.
const char* kSmallRun = R"(
[data]
source = synthetic
[synth]
celebrities = 24
followers = 3
min_tweets = 6
signal = 1
[corpus]
followers_per_celebrity = 3
[preprocess]
min_tweets = 6
[rforest]
n_trees = 10
[neural]
epochs = 2
max_seq_len = 40
embed_dim = 8
cnn_filters = 8
lstm_hidden = 8
)";

TEST_CASE("config parsing and round-trip") {
  RunConfig c = parse_run_config(kSmallRun);
  CHECK(c.source == DataSource::kSynthetic);
  CHECK(c.synth.n_celebrities == 24);
  CHECK(c.experiment.neural.lstm_hidden == 8);
  CHECK_FALSE(c.seed.has_value());
  apply_seed(c, 7);
  CHECK(c.synth.seed == 7);
  CHECK(c.experiment.split.seed == 7);

  c.set("features.set", "counts");
  c.set("dtree.max_depth", "5");
  c.set("evaluation.f1_variant", "half");
  c.set("evaluation.models", "svm,lstm");
  c.set("preprocess.urdu_threshold", "0.1");
  const RunConfig back = parse_run_config(c.to_ini());
  CHECK(back.entries() == c.entries());
  CHECK(back.to_ini() == c.to_ini());
  CHECK(back.experiment.models == std::vector<ModelKind>{ModelKind::kSvm, ModelKind::kLstm});
  CHECK(back.preprocess.urdu_ratio_threshold == 0.1);

  for (const auto& [key, value] : c.entries()) {
    CHECK(key.find("output") == std::string::npos);
    CHECK(key != "run.jobs");
  }

  try {
    c.set("knn.neighbours", "3");
    FAIL("expected unknown key");
  } catch (const Error& e) {
    CHECK(e.code() == "unknown_key");
    CHECK(e.kind() == ErrorKind::kConfig);
  }
  CHECK_THROWS_AS(c.set("knn.k", "three"), Error);
  CHECK_THROWS_AS(parse_run_config("[knn]\nk = 0\n").validate(), Error);

  RunConfig unseeded = parse_run_config(kSmallRun);
  CHECK_THROWS_AS(unseeded.validate(), Error);
}

TEST_CASE("cli basics") {
  Outcome v = cli({"--version"});
  CHECK(v.status == 0);
  CHECK(v.out.find(kVersion) != std::string::npos);

  Outcome no_seed = cli({"synth", "--out", scratch("noseed").string()});
  CHECK(no_seed.status == 1);
  CHECK(no_seed.err.find("\"exit\":1") != std::string::npos);

  const fs::path dir = scratch("labels");
  Outcome missing = cli({"ingest", "--input", dir.string(), "--labels",
                         (dir / "nowhere.csv").string(), "--out", (dir / "o").string()});
  CHECK(missing.status == 1);
  CHECK(missing.err.find("nowhere.csv") != std::string::npos);
  CHECK(std::count(missing.err.begin(), missing.err.end(), '\n') == 1);

  CHECK(cli({"frobnicate"}).status == 1);
}

TEST_CASE("synth matches the requested counts") {
  const fs::path dir = scratch("synth");
  Outcome o = cli({"synth", "--celebrities", "100", "--followers", "10", "--min-tweets", "20",
                   "--seed", "3", "--out", dir.string()});
  REQUIRE(o.status == 0);
  Corpus c = load_corpus(dir / "corpus.json");
  CHECK(c.records.size() == 100);
  for (const auto& r : c.records) {
    CHECK(r.feeds.size() == 10);
    for (const auto& f : r.feeds) CHECK(f.records.size() == 20);
  }
}

TEST_CASE("run is reproducible and its echoed config replays it") {
  const fs::path dir = scratch("run");
  write_text_file(dir / "cfg.ini", kSmallRun);
  const std::string cfg = (dir / "cfg.ini").string();
  Outcome a = cli({"run", "--config", cfg, "--seed", "7", "--out", (dir / "a").string()});
  REQUIRE_MESSAGE(a.status == 0, a.err);
  Outcome b = cli({"run", "--config", cfg, "--seed", "7", "--jobs", "2", "--out",
                   (dir / "b").string()});
  REQUIRE(b.status == 0);
  for (const char* f : {"report.txt", "report.json", "config.ini", "models.json"}) {
    CAPTURE(f);
    CHECK(read_text_file(dir / "a" / f) == read_text_file(dir / "b" / f));
  }
  const std::string report = read_text_file(dir / "a" / "report.txt");
  CHECK(report.find("run.seed = 7") != std::string::npos);

  Outcome replay =
      cli({"run", "--config", (dir / "a" / "config.ini").string(), "--out", (dir / "c").string()});
  REQUIRE(replay.status == 0);
  CHECK(read_text_file(dir / "c" / "report.txt") == report);

  Outcome other = cli({"run", "--config", cfg, "--seed", "8", "--out", (dir / "d").string()});
  REQUIRE(other.status == 0);
  CHECK(read_text_file(dir / "d" / "report.txt") != report);
}

TEST_CASE("staged commands reproduce the end-to-end run") {
  const fs::path dir = scratch("staged");
  write_text_file(dir / "cfg.ini", kSmallRun);
  const std::string cfg = (dir / "cfg.ini").string();
  REQUIRE(cli({"run", "--config", cfg, "--seed", "5", "--out", (dir / "run").string()}).status ==
          0);

  REQUIRE(cli({"preprocess", "--corpus", (dir / "run" / "corpus.json").string(), "--config", cfg,
               "--out", (dir / "pre").string()})
              .status == 0);
  CHECK(read_text_file(dir / "pre" / "clean.json") ==
        read_text_file(dir / "run" / "clean.json"));
  Outcome train = cli({"train", "--clean", (dir / "pre" / "clean.json").string(), "--config", cfg,
                       "--seed", "5", "--out", (dir / "train").string()});
  REQUIRE_MESSAGE(train.status == 0, train.err);
  Outcome eval = cli({"evaluate", "--models", (dir / "train" / "models.json").string(), "--clean",
                      (dir / "pre" / "clean.json").string(), "--out", (dir / "eval").string()});
  REQUIRE_MESSAGE(eval.status == 0, eval.err);
  CHECK(read_text_file(dir / "eval" / "report.txt") ==
        read_text_file(dir / "run" / "report.txt"));

  // predict over exported follower CSVs.
  REQUIRE(cli({"synth", "--celebrities", "4", "--followers", "3", "--min-tweets", "6", "--seed",
               "5", "--export", "--out", (dir / "fresh").string()})
              .status == 0);
  Outcome pred = cli({"predict", "--models", (dir / "train" / "models.json").string(), "--input",
                      (dir / "fresh" / "export").string(), "--model", "svm", "--out",
                      (dir / "pred").string()});
  REQUIRE_MESSAGE(pred.status == 0, pred.err);
  const std::string tsv = read_text_file(dir / "pred" / "predictions.tsv");
  CHECK(std::count(tsv.begin(), tsv.end(), '\n') == 5);  // header + 4 celebrities

  // The bundle refuses a corpus it was not trained on.
  REQUIRE(cli({"synth", "--celebrities", "24", "--followers", "3", "--min-tweets", "6", "--seed",
               "6", "--out", (dir / "other").string()})
              .status == 0);
  REQUIRE(cli({"preprocess", "--corpus", (dir / "other" / "corpus.json").string(), "--config", cfg,
               "--out", (dir / "otherpre").string()})
              .status == 0);
  Outcome mismatch = cli({"evaluate", "--models", (dir / "train" / "models.json").string(),
                          "--clean", (dir / "otherpre" / "clean.json").string(), "--out",
                          (dir / "bad").string()});
  CHECK(mismatch.status == 2);
}

}  // namespace
}  // namespace celebprof
