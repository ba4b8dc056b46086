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

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "meld/common.hpp"
#include "meld/corpus.hpp"

namespace meld::attacks {

enum class AttackKind {
  Homoglyph,
  Whitespace,
  Typo,
  Synonym,
  ZeroWidth,
  CaseFlip,
  DigitPerturb,
};

inline constexpr std::array<AttackKind, 7> kAllAttacks = {
    AttackKind::Homoglyph, AttackKind::Whitespace, AttackKind::Typo,
    AttackKind::Synonym,   AttackKind::ZeroWidth,  AttackKind::CaseFlip,
    AttackKind::DigitPerturb};

// The only kinds augment_view may draw.
inline constexpr std::array<AttackKind, 4> kTrainTimeAttacks = {
    AttackKind::Homoglyph, AttackKind::Whitespace, AttackKind::Typo,
    AttackKind::Synonym};

// Evaluation pool suite: three kinds shared with augmentation, three held out.
inline constexpr std::array<AttackKind, 6> kEvalAttacks = {
    AttackKind::Homoglyph, AttackKind::Whitespace, AttackKind::Synonym,
    AttackKind::ZeroWidth, AttackKind::CaseFlip,   AttackKind::DigitPerturb};

// Canonical label names: "homoglyph", "whitespace", "typo", "synonym",
// "zero_width", "case_flip", "digit_perturb".
const char* attack_name(AttackKind kind);
std::optional<AttackKind> parse_attack(std::string_view name);
// Comma-separated list of attack names; throws on unknown names.
std::vector<AttackKind> parse_attack_list(std::string_view csv);

// Label-space attack names used by generated corpora: "none" first, then
// every kind in kAllAttacks order.
std::vector<std::string> default_attack_labels();

using HomoglyphTable = std::unordered_map<char32_t, char32_t>;
using SynonymLexicon = std::unordered_map<std::string, std::vector<std::string>>;

// Latin -> Cyrillic/Greek confusables.
const HomoglyphTable& builtin_homoglyphs();
// Small lowercase lexicon for tests and default augmentation.
const SynonymLexicon& builtin_lexicon();

// JSON object {"a": "а", ...}; single code point keys and values. Entries
// are merged over the built-in table.
HomoglyphTable load_homoglyph_json(const std::string& path);
// "word<TAB>syn1,syn2,..." per line; words are lowercased.
SynonymLexicon load_synonym_tsv(const std::string& path);

struct AttackConfig {
  double rate = 0.05;
  std::map<AttackKind, double> kind_rates;
  std::shared_ptr<const SynonymLexicon> lexicon;
  std::shared_ptr<const HomoglyphTable> homoglyphs;
  std::uint64_t seed = 0;

  double rate_for(AttackKind kind) const;
  void validate() const;
};

// Number of eligible positions each kind perturbs: ceil(rate * eligible).
std::size_t perturbation_budget(double rate, std::size_t eligible);

// Returns a perturbed copy of text. Exactly perturbation_budget(rate,
// eligible) eligible positions change; placement is random.
std::string apply(AttackKind kind, std::string_view text, const AttackConfig& cfg,
                  Rng& rng);

struct AugmentedView {
  std::string clean;
  std::string attacked;
  std::optional<AttackKind> applied;
};

// Label-blind two-view augmentation: with probability p the attacked view
// is one train-time kind drawn uniformly, else it equals the clean view.
AugmentedView augment_view(std::string_view text, double p, const AttackConfig& cfg,
                           Rng& rng);

// One attacked copy per (row, kind), in row-major order. Copies carry the
// attack's label index, provenance in parent_id, and id "<parent>/<attack>".
// Each copy is seeded from cfg.seed, the row id and the kind, so the output
// does not depend on row order or threading.
std::vector<corpus::TextRecord> build_attacked_pool(
    const std::vector<corpus::TextRecord>& rows, const std::vector<AttackKind>& kinds,
    const AttackConfig& cfg, const corpus::LabelSpace& space);

}  // namespace meld::attacks
