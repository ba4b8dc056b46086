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

#include "meld/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "meld/utf8.hpp"

namespace meld::attacks {
namespace {

constexpr char32_t kZeroWidthSpace = 0x200B;

bool is_ascii_alpha(char32_t c) {
  return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
}
bool is_upper(char32_t c) { return c >= U'A' && c <= U'Z'; }
char32_t to_lower(char32_t c) { return is_upper(c) ? c - U'A' + U'a' : c; }
char32_t to_upper(char32_t c) { return (c >= U'a' && c <= U'z') ? c - U'a' + U'A' : c; }

const char* qwerty_neighbors(char32_t lower) {
  static const char* kRows[26] = {
      "qwsz",   "vghn",  "xdfv",   "serfcx", "wsdr",  "drtgvc", "ftyhbv",
      "gyujnb", "ujko",  "huikmn", "jiolm",  "kop",   "njk",    "bhjm",
      "iklp",   "ol",    "wa",     "edft",   "awedxz", "rfgy",  "yhji",
      "cfgb",   "qase",  "zsdc",   "tghu",   "asx"};
  return kRows[lower - U'a'];
}

// k distinct elements of [0, n) in random order.
std::vector<std::size_t> choose(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(idx[i], idx[i + uniform_index(rng, n - i)]);
  }
  idx.resize(k);
  return idx;
}

std::u32string substitute(std::u32string cps, const std::vector<std::size_t>& eligible,
                          std::size_t budget, Rng& rng,
                          const std::function<char32_t(char32_t, Rng&)>& edit) {
  for (std::size_t pick : choose(eligible.size(), budget, rng)) {
    const std::size_t pos = eligible[pick];
    cps[pos] = edit(cps[pos], rng);
  }
  return cps;
}

std::string homoglyph(std::u32string_view text, const AttackConfig& cfg, double rate,
                      Rng& rng) {
  const HomoglyphTable& table = cfg.homoglyphs ? *cfg.homoglyphs : builtin_homoglyphs();
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (table.count(text[i])) eligible.push_back(i);
  }
  auto out = substitute(std::u32string(text), eligible,
                        perturbation_budget(rate, eligible.size()), rng,
                        [&](char32_t c, Rng&) { return table.at(c); });
  return utf8::encode(out);
}

std::string case_flip(std::u32string_view text, double rate, Rng& rng) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (is_ascii_alpha(text[i])) eligible.push_back(i);
  }
  auto out = substitute(std::u32string(text), eligible,
                        perturbation_budget(rate, eligible.size()), rng,
                        [](char32_t c, Rng&) { return is_upper(c) ? to_lower(c) : to_upper(c); });
  return utf8::encode(out);
}

std::string digit_perturb(std::u32string_view text, double rate, Rng& rng) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] >= U'0' && text[i] <= U'9') eligible.push_back(i);
  }
  auto out = substitute(std::u32string(text), eligible,
                        perturbation_budget(rate, eligible.size()), rng,
                        [](char32_t c, Rng& r) {
                          static constexpr int kOffsets[] = {-2, -1, 1, 2};
                          const int digit = static_cast<int>(c - U'0');
                          // Offsets that clamp back onto the same digit are redrawn
                          // so every chosen position changes.
                          for (;;) {
                            const int v = std::clamp(digit + kOffsets[uniform_index(r, 4)], 0, 9);
                            if (v != digit) return static_cast<char32_t>(U'0' + v);
                          }
                        });
  return utf8::encode(out);
}

std::string zero_width(std::u32string_view text, double rate, Rng& rng) {
  const std::size_t gaps = text.size() > 1 ? text.size() - 1 : 0;
  const auto picks = choose(gaps, perturbation_budget(rate, gaps), rng);
  std::vector<std::uint8_t> insert_after(text.size(), 0);
  for (std::size_t g : picks) insert_after[g] = 1;
  std::u32string out;
  out.reserve(text.size() + picks.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    out.push_back(text[i]);
    if (insert_after[i]) out.push_back(kZeroWidthSpace);
  }
  return utf8::encode(out);
}

// A gap is a maximal run of ASCII spaces with a non-space on both sides.
std::string whitespace(std::u32string_view text, double rate, Rng& rng) {
  struct Gap {
    std::size_t begin, end;
  };
  std::vector<Gap> gaps;
  for (std::size_t i = 0; i < text.size();) {
    if (text[i] != U' ') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && text[j] == U' ') ++j;
    if (i > 0 && j < text.size()) gaps.push_back({i, j});
    i = j;
  }
  const auto picks = choose(gaps.size(), perturbation_budget(rate, gaps.size()), rng);
  // +1 doubles a space, -1 drops one.
  std::vector<int> delta(text.size(), 0);
  for (std::size_t g : picks) {
    delta[gaps[g].begin] = uniform_index(rng, 2) == 0 ? 1 : -1;
  }
  std::u32string out;
  out.reserve(text.size() + picks.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (delta[i] < 0) continue;
    out.push_back(text[i]);
    if (delta[i] > 0) out.push_back(U' ');
  }
  return utf8::encode(out);
}

// Words are maximal runs of ASCII letters.
std::string synonym(std::u32string_view text, const SynonymLexicon& lexicon, double rate,
                    Rng& rng) {
  struct Word {
    std::size_t begin, end;
    const std::vector<std::string>* options;
  };
  std::vector<Word> words;
  for (std::size_t i = 0; i < text.size();) {
    if (!is_ascii_alpha(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    std::string lower;
    while (j < text.size() && is_ascii_alpha(text[j])) {
      lower.push_back(static_cast<char>(to_lower(text[j])));
      ++j;
    }
    auto it = lexicon.find(lower);
    if (it != lexicon.end() && !it->second.empty()) {
      words.push_back({i, j, &it->second});
    }
    i = j;
  }
  const auto picks = choose(words.size(), perturbation_budget(rate, words.size()), rng);
  std::vector<const Word*> replace_at(text.size(), nullptr);
  std::vector<std::string> replacement(words.size());
  for (std::size_t w : picks) {
    const Word& word = words[w];
    std::string syn = (*word.options)[uniform_index(rng, word.options->size())];
    if (is_upper(text[word.begin]) && !syn.empty() && syn[0] >= 'a' && syn[0] <= 'z') {
      syn[0] = static_cast<char>(syn[0] - 'a' + 'A');
    }
    replacement[w] = std::move(syn);
    replace_at[word.begin] = &word;
  }
  std::string out;
  for (std::size_t i = 0; i < text.size();) {
    if (const Word* w = replace_at[i]) {
      out += replacement[static_cast<std::size_t>(w - words.data())];
      i = w->end;
    } else {
      utf8::append(out, text[i]);
      ++i;
    }
  }
  return out;
}

// Chosen positions stay at least three code points apart so each edit is
// separated from the next by untouched text.
std::string typo(std::u32string_view text, double rate, Rng& rng) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (is_ascii_alpha(text[i])) eligible.push_back(i);
  }
  const std::size_t budget = perturbation_budget(rate, eligible.size());
  std::vector<std::size_t> candidates = eligible;
  std::vector<std::size_t> chosen;
  std::vector<std::uint8_t> taken(text.size(), 0);
  while (chosen.size() < budget && !candidates.empty()) {
    const std::size_t pos = candidates[uniform_index(rng, candidates.size())];
    chosen.push_back(pos);
    taken[pos] = 1;
    std::erase_if(candidates, [pos](std::size_t c) {
      return (c > pos ? c - pos : pos - c) < 3;
    });
  }
  if (chosen.size() < budget) {
    // Dense budgets cannot keep the spacing; fill from whatever is left.
    std::vector<std::size_t> rest;
    for (std::size_t p : eligible) {
      if (!taken[p]) rest.push_back(p);
    }
    for (std::size_t pick : choose(rest.size(), budget - chosen.size(), rng)) {
      chosen.push_back(rest[pick]);
      taken[rest[pick]] = 1;
    }
  }
  std::sort(chosen.begin(), chosen.end());

  enum class Op : std::uint8_t { Keep, Substitute, Delete, Transpose };
  std::u32string work(text);
  std::vector<Op> ops(text.size(), Op::Keep);
  for (std::size_t pos : chosen) {
    const auto draw = uniform_index(rng, 3);
    Op op = draw == 0 ? Op::Substitute : draw == 1 ? Op::Delete : Op::Transpose;
    if (op == Op::Transpose) {
      const bool can_swap = pos + 1 < work.size() && !taken[pos + 1] &&
                            work[pos + 1] != work[pos] && ops[pos + 1] == Op::Keep;
      if (!can_swap) op = Op::Substitute;
    }
    ops[pos] = op;
    if (op == Op::Substitute) {
      const char* nb = qwerty_neighbors(to_lower(work[pos]));
      const std::size_t n = std::char_traits<char>::length(nb);
      char32_t repl = static_cast<char32_t>(nb[uniform_index(rng, n)]);
      work[pos] = is_upper(work[pos]) ? to_upper(repl) : repl;
    } else if (op == Op::Transpose) {
      std::swap(work[pos], work[pos + 1]);
      taken[pos + 1] = 1;
    }
  }
  std::u32string out;
  out.reserve(work.size());
  for (std::size_t i = 0; i < work.size(); ++i) {
    if (ops[i] != Op::Delete) out.push_back(work[i]);
  }
  return utf8::encode(out);
}

}  // namespace

const char* attack_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::Homoglyph: return "homoglyph";
    case AttackKind::Whitespace: return "whitespace";
    case AttackKind::Typo: return "typo";
    case AttackKind::Synonym: return "synonym";
    case AttackKind::ZeroWidth: return "zero_width";
    case AttackKind::CaseFlip: return "case_flip";
    case AttackKind::DigitPerturb: return "digit_perturb";
  }
  return "?";
}

std::optional<AttackKind> parse_attack(std::string_view name) {
  for (AttackKind k : kAllAttacks) {
    if (name == attack_name(k)) return k;
  }
  return std::nullopt;
}

std::vector<AttackKind> parse_attack_list(std::string_view csv) {
  std::vector<AttackKind> kinds;
  std::size_t start = 0;
  while (start <= csv.size()) {
    auto end = csv.find(',', start);
    if (end == std::string_view::npos) end = csv.size();
    auto name = csv.substr(start, end - start);
    if (!name.empty()) {
      auto k = parse_attack(name);
      if (!k) throw Error("unknown attack: " + std::string(name));
      kinds.push_back(*k);
    }
    start = end + 1;
  }
  return kinds;
}

std::vector<std::string> default_attack_labels() {
  std::vector<std::string> names = {"none"};
  for (AttackKind k : kAllAttacks) names.emplace_back(attack_name(k));
  return names;
}

double AttackConfig::rate_for(AttackKind kind) const {
  auto it = kind_rates.find(kind);
  return it == kind_rates.end() ? rate : it->second;
}

void AttackConfig::validate() const {
  auto bad = [](double r) { return !(r >= 0.0 && r <= 1.0); };
  if (bad(rate)) throw Error("attack rate must lie in [0,1]");
  for (const auto& [k, r] : kind_rates) {
    if (bad(r)) throw Error(std::string("attack rate for ") + attack_name(k) + " must lie in [0,1]");
  }
}

std::size_t perturbation_budget(double rate, std::size_t eligible) {
  if (eligible == 0 || rate <= 0.0) return 0;
  // The tolerance absorbs representation error such as 0.05 * 20.
  const double exact = rate * static_cast<double>(eligible);
  const auto k = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  return std::min(k, eligible);
}

std::string apply(AttackKind kind, std::string_view text, const AttackConfig& cfg,
                  Rng& rng) {
  cfg.validate();
  const double rate = cfg.rate_for(kind);
  const std::u32string cps = utf8::decode(text);
  switch (kind) {
    case AttackKind::Homoglyph: return homoglyph(cps, cfg, rate, rng);
    case AttackKind::Whitespace: return whitespace(cps, rate, rng);
    case AttackKind::Typo: return typo(cps, rate, rng);
    case AttackKind::Synonym:
      if (!cfg.lexicon) throw Error("synonym attack requires a lexicon");
      return synonym(cps, *cfg.lexicon, rate, rng);
    case AttackKind::ZeroWidth: return zero_width(cps, rate, rng);
    case AttackKind::CaseFlip: return case_flip(cps, rate, rng);
    case AttackKind::DigitPerturb: return digit_perturb(cps, rate, rng);
  }
  throw Error("unknown attack kind");
}

AugmentedView augment_view(std::string_view text, double p, const AttackConfig& cfg,
                           Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error("augmentation probability must lie in [0,1]");
  AugmentedView view{std::string(text), std::string(text), std::nullopt};
  if (!(uniform01(rng) < p)) return view;
  const AttackKind kind = kTrainTimeAttacks[uniform_index(rng, kTrainTimeAttacks.size())];
  if (kind == AttackKind::Synonym && !cfg.lexicon) {
    AttackConfig with_lexicon = cfg;
    with_lexicon.lexicon = std::shared_ptr<const SynonymLexicon>(
        &builtin_lexicon(), [](const SynonymLexicon*) {});
    view.attacked = apply(kind, text, with_lexicon, rng);
  } else {
    view.attacked = apply(kind, text, cfg, rng);
  }
  view.applied = kind;
  return view;
}

std::vector<corpus::TextRecord> build_attacked_pool(
    const std::vector<corpus::TextRecord>& rows, const std::vector<AttackKind>& kinds,
    const AttackConfig& cfg, const corpus::LabelSpace& space) {
  cfg.validate();
  std::vector<int> label_of;
  for (AttackKind k : kinds) label_of.push_back(space.index(corpus::Task::Atk, attack_name(k)));
  if (std::find(kinds.begin(), kinds.end(), AttackKind::Synonym) != kinds.end() && !cfg.lexicon) {
    throw Error("synonym attack requires a lexicon");
  }
  std::vector<corpus::TextRecord> out(rows.size() * kinds.size());
  parallel_for(out.size(), [&](std::size_t slot) {
    const auto& src = rows[slot / kinds.size()];
    const std::size_t k = slot % kinds.size();
    const AttackKind kind = kinds[k];
    Rng rng(fnv1a64(attack_name(kind), cfg.seed ^ fnv1a64(src.id)));
    corpus::TextRecord r = src;
    r.text = apply(kind, src.text, cfg, rng);
    r.atk = label_of[k];
    r.parent_id = src.id;
    r.id = src.id + "/" + attack_name(kind);
    out[slot] = std::move(r);
  });
  return out;
}

}  // namespace meld::attacks
