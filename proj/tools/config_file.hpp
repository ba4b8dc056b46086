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
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "meld/evalpipe.hpp"
#include "meld/synth.hpp"
#include "meld/trainer.hpp"

namespace meld::cli {

// Flat "key = value" file. '#' starts a comment; blank lines are skipped.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& origin = "config");
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::uint64_t> get_uint_list(const std::string& key,
                                           const std::vector<std::uint64_t>& fallback) const;

  // Throws on the first key that no getter has read.
  void reject_unused() const;
  // Directory of the file, for resolving relative paths ("" for parsed text).
  const std::string& base_dir() const { return base_dir_; }
  std::string path_value(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, std::size_t> lines_;
  mutable std::set<std::string> used_;
  std::string origin_;
  std::string base_dir_;
};

// Reads every training hyperparameter present in cfg over the defaults.
trainer::TrainConfig read_train_config(const KeyValueConfig& cfg,
                                       trainer::TrainConfig base = {});
// Synth keys, optionally namespaced ("synth_" in ablation files).
synth::SynthSpec read_synth_spec(const KeyValueConfig& cfg, const std::string& prefix = "");

struct TrainFiles {
  std::string train;
  std::string validation;
  std::string labels;    // empty: <train>.labels.json or inferred
  std::string mixture;   // empty: ratios proportional to source sizes
  std::string lexicon;   // optional synonym TSV
  std::string homoglyphs;  // optional homoglyph JSON
};

TrainFiles read_train_files(const KeyValueConfig& cfg);

evalpipe::AblationConfig read_ablation_config(const KeyValueConfig& cfg);

}  // namespace meld::cli
