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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "meld/common.hpp"
#include "meld/corpus.hpp"

namespace meld::synth {

// Style knobs of one synthetic generator.
struct GeneratorStyle {
  double temperature = 1.0;        // < 1 sharpens the character chain
  std::string bias_chars;          // letters whose weight is boosted
  double bias_strength = 0.0;      // multiplier 1 + bias_strength
  double sentence_len_mean = 16.0;  // words per sentence
  double sentence_len_spread = 0.5;  // sd as a fraction of the mean

  bool operator==(const GeneratorStyle&) const = default;
};

// Human text: the plain chain at temperature 1 with varied sentences.
GeneratorStyle human_style();
// n distinct styles spread over temperature, bias set and sentence length.
std::vector<GeneratorStyle> default_styles(std::size_t n);

struct SynthSpec {
  std::size_t n_generators = 4;
  std::size_t n_domains = 3;
  std::size_t rows_per_cell = 100;
  std::optional<std::size_t> human_rows_per_domain;  // defaults to rows_per_cell
  std::uint64_t seed = 2026;
  // Share of labeled-attack AI rows that receive one attacked copy.
  double attack_fraction = 0.25;
  double attack_rate = 0.05;
  std::size_t words_mean = 80;
  std::string id_prefix;
  std::vector<GeneratorStyle> styles;  // empty selects default_styles

  void validate() const;
  std::vector<GeneratorStyle> resolved_styles() const;
  std::size_t humans_per_domain() const {
    return human_rows_per_domain.value_or(rows_per_cell);
  }
};

inline constexpr std::size_t kMaxDomains = 5;

// Source names of the three synthetic sources.
inline constexpr const char* kSourceFull = "synth_full";  // all labels
inline constexpr const char* kSourceGen = "synth_gen";    // AI: gen and dom only
inline constexpr const char* kSourceWeb = "synth_web";    // human: dom only

std::vector<std::string> domain_names(std::size_t n_domains);
corpus::LabelSpace label_space(const SynthSpec& spec);
corpus::MixtureSpec default_mixture();

// Human rows per domain, then AI rows per (generator, domain), then one
// attacked copy for a fixed share of labeled-attack AI rows.
std::vector<corpus::TextRecord> generate(const SynthSpec& spec);

// Plain generated text; exposed for tests.
std::string generate_text(const GeneratorStyle& style, std::size_t domain,
                          std::size_t words_mean, Rng& rng);

struct DeskDataset {
  corpus::LabelSpace space;
  corpus::MixtureSpec mixture;
  std::vector<corpus::TextRecord> train;
  std::vector<corpus::TextRecord> validation;
  // Humans, clean AI rows, and one copy per evaluation attack of every
  // clean AI row. Deduplicated against train.
  std::vector<corpus::TextRecord> eval;
};

struct DeskSizes {
  std::size_t val_rows_per_cell = 25;
  std::size_t val_humans_per_domain = 100;
  std::size_t eval_rows_per_cell = 40;
  std::size_t eval_humans_per_domain = 200;
};

// Train, validation and eval splits from independent seeds derived from
// spec.seed.
DeskDataset make_desk_dataset(const SynthSpec& train_spec, const DeskSizes& sizes);

}  // namespace meld::synth
