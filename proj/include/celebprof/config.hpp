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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "celebprof/corpus.hpp"
#include "celebprof/evaluation.hpp"
#include "celebprof/preprocess.hpp"

namespace celebprof {

enum class DataSource { kDirectory, kArchive, kSynthetic };

std::string_view to_string(DataSource s);
DataSource parse_data_source(std::string_view s);

// Everything a `run` needs. Keys are addressed as "section.key", matching the
// INI layout ([section] key = value).
struct RunConfig {
  DataSource source = DataSource::kDirectory;
  std::filesystem::path input_dir;
  std::filesystem::path labels_file;
  std::filesystem::path archive;
  std::filesystem::path output_dir;  // never echoed: it does not affect results

  CorpusConfig corpus;
  SynthSpec synth;
  PreprocessConfig preprocess;
  ExperimentConfig experiment;
  std::optional<std::uint64_t> seed;

  // Checks values and that the configured input paths exist.
  void validate() const;
  // Applies one key; throws a config error for unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  // Effective configuration as ordered key/value pairs (seed included, output
  // location and thread count excluded).
  std::vector<std::pair<std::string, std::string>> entries() const;
  std::string to_ini() const;
};

// Parses INI text on top of the defaults.
RunConfig parse_run_config(std::string_view ini_text);
RunConfig load_run_config(const std::filesystem::path& path);

// Propagates the master seed into the component configs that consume it.
void apply_seed(RunConfig& config, std::uint64_t seed);

}  // namespace celebprof
