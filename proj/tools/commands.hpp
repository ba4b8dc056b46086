// Copyright 2026 The meld Authors.
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
#include <string>
#include <vector>

#include "json.hpp"
#include "meld/corpus.hpp"

namespace meld::cli {

// Sidecar label-space file written next to every JSONL output.
std::string labels_path_for(const std::string& jsonl_path);
// explicit_path if given, else the sidecar if present, else inferred.
corpus::LabelSpace resolve_labels(const std::string& explicit_path, const std::string& jsonl_path);

void cmd_synth(const std::string& spec_path, const std::string& out_path);

struct TrainOutcome {
  std::uint64_t checkpoint_hash = 0;
  double final_val_auroc = 0.0;
  std::vector<std::int64_t> swa_steps;
};
TrainOutcome cmd_train(const std::string& config_path, const std::string& out_path,
                       const std::string& diagnostics_path = "");

struct AttackOptions {
  std::string in;
  std::string out;
  std::string kinds = "homoglyph,whitespace,synonym,zero_width,case_flip,digit_perturb";
  double rate = 0.05;
  std::uint64_t seed = 0;
  std::string labels;
  std::string lexicon;
  std::string homoglyphs;
  bool attacked_only = false;
  bool all_rows = false;
};
void cmd_attack(const AttackOptions& options);

struct EvalOptions {
  std::string checkpoint;
  std::string pool;
  std::string out;
  std::string labels;
  std::string scores_out;
  std::vector<double> fprs = {0.05, 0.01};
  std::size_t chunk_len = 512;
  std::size_t stride = 0;
  bool max_aggregation = false;
  std::size_t resamples = 5000;
  std::uint64_t seed = 2026;
};
nlohmann::json cmd_eval(const EvalOptions& options);

nlohmann::json cmd_ablate(const std::string& config_path, const std::string& out_dir);

struct ReportOptions {
  std::string a;
  std::string b;
  std::string out;
  std::vector<double> fprs = {0.05, 0.01};
  std::size_t resamples = 5000;
  std::uint64_t seed = 2026;
};
nlohmann::json cmd_report(const ReportOptions& options);

// Parses argv and dispatches. Exit codes: 0 success, 1 runtime error
// (one "error: ..." line on stderr), 2 usage error.
int run(int argc, char** argv);

}  // namespace meld::cli
