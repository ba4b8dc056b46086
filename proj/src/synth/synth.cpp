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

#include "meld/synth.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <unordered_set>

#include "meld/attacks.hpp"
#include "synth_internal.hpp"

namespace meld::synth {

namespace {

// Symbols: a-z, space, comma, apostrophe.
constexpr int kLetters = 26;
constexpr int kSpace = 26;
constexpr int kComma = 27;
constexpr int kApos = 28;
constexpr int kAlphabet = 29;
constexpr std::size_t kMaxWordLen = 14;
constexpr double kNumberWordRate = 0.02;

int symbol_of(char c) {
  const auto u = static_cast<unsigned char>(c);
  if (std::isalpha(u)) return std::tolower(u) - 'a';
  if (c == ',') return kComma;
  if (c == '\'') return kApos;
  return kSpace;
}

char char_of(int s) {
  if (s < kLetters) return static_cast<char>('a' + s);
  if (s == kComma) return ',';
  if (s == kApos) return '\'';
  return ' ';
}

// Seed text reduced to the chain alphabet with single spaces.
std::vector<int> normalize(const std::string& text) {
  std::vector<int> out = {kSpace};
  for (char c : text) {
    const int s = symbol_of(c);
    if (s == kSpace && out.back() == kSpace) continue;
    if (s == kComma && out.back() == kSpace) continue;
    out.push_back(s);
  }
  if (out.back() != kSpace) out.push_back(kSpace);
  return out;
}

// Order-2 chain with tempered, biased cumulative weights per state. States
// never seen in the seed back off to order 1, then to order 0.
class TemperedChain {
 public:
  TemperedChain(const std::string& seed_text, const GeneratorStyle& style) {
    const auto seq = normalize(seed_text);
    std::vector<double> tri(kAlphabet * kAlphabet * kAlphabet, 0.0);
    std::vector<double> bi(kAlphabet * kAlphabet, 0.0);
    std::vector<double> uni(kAlphabet, 0.0);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      uni[seq[i]] += 1.0;
      if (i >= 1) bi[seq[i - 1] * kAlphabet + seq[i]] += 1.0;
      if (i >= 2) tri[(seq[i - 2] * kAlphabet + seq[i - 1]) * kAlphabet + seq[i]] += 1.0;
    }
    std::array<double, kAlphabet> boost;
    boost.fill(1.0);
    for (char c : style.bias_chars) boost[symbol_of(c)] = 1.0 + style.bias_strength;
    const double inv_t = 1.0 / style.temperature;
    cumulative_.resize(kAlphabet * kAlphabet * kAlphabet);
    for (int a = 0; a < kAlphabet; ++a) {
      for (int b = 0; b < kAlphabet; ++b) {
        const double* row = &tri[(a * kAlphabet + b) * kAlphabet];
        double mass = 0.0;
        for (int c = 0; c < kAlphabet; ++c) mass += row[c];
        if (mass == 0.0) {
          row = &bi[b * kAlphabet];
          for (int c = 0; c < kAlphabet; ++c) mass += row[c];
        }
        if (mass == 0.0) row = uni.data();
        double acc = 0.0;
        double* cum = &cumulative_[(a * kAlphabet + b) * kAlphabet];
        for (int c = 0; c < kAlphabet; ++c) {
          if (row[c] > 0.0) acc += std::pow(row[c] / 1.0, inv_t) * boost[c];
          cum[c] = acc;
        }
      }
    }
  }

  int next(int a, int b, Rng& rng) const {
    const double* cum = &cumulative_[(a * kAlphabet + b) * kAlphabet];
    const double u = uniform01(rng) * cum[kAlphabet - 1];
    for (int c = 0; c < kAlphabet; ++c) {
      if (u < cum[c]) return c;
    }
    return kAlphabet - 1;
  }

 private:
  std::vector<double> cumulative_;
};

// Chains are built once per (domain, style) and shared.
const TemperedChain& chain_for(std::size_t domain, const GeneratorStyle& style) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, std::string>, std::unique_ptr<TemperedChain>> cache;
  char key[160];
  std::snprintf(key, sizeof key, "%.17g|%s|%.17g", style.temperature, style.bias_chars.c_str(),
                style.bias_strength);
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{domain, key}];
  if (!slot) slot = std::make_unique<TemperedChain>(detail::seed_texts()[domain].text, style);
  return *slot;
}

double normal_draw(Rng& rng) {
  // Box-Muller keeps the stream identical across standard libraries.
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t draw_length(double mean, double spread, std::size_t floor, Rng& rng) {
  const double v = mean + spread * mean * normal_draw(rng);
  return std::max<std::size_t>(floor, static_cast<std::size_t>(std::lround(std::max(v, 0.0))));
}

}  // namespace

GeneratorStyle human_style() { return {1.0, "", 0.0, 16.0, 0.5}; }

std::vector<GeneratorStyle> default_styles(std::size_t n) {
  static const std::array<const char*, 5> kBiasSets = {"aeiou", "rstln", "cdmpb", "fghwy",
                                                       "kvjxqz"};
  std::vector<GeneratorStyle> out;
  for (std::size_t g = 0; g < n; ++g) {
    const double f = n > 1 ? static_cast<double>(g) / static_cast<double>(n - 1) : 0.0;
    GeneratorStyle s;
    s.temperature = 0.55 + 0.3 * f;
    s.bias_chars = kBiasSets[g % kBiasSets.size()];
    s.bias_strength = 0.6;
    s.sentence_len_mean = 9.0 + 14.0 * f;
    s.sentence_len_spread = 0.25;
    out.push_back(s);
  }
  return out;
}

void SynthSpec::validate() const {
  if (n_generators < 2) throw Error("synth: need at least 2 generators");
  if (n_domains < 1 || n_domains > kMaxDomains) {
    throw Error("synth: n_domains must lie in [1, " + std::to_string(kMaxDomains) + "]");
  }
  if (rows_per_cell == 0) throw Error("synth: rows_per_cell must be positive");
  if (humans_per_domain() == 0) throw Error("synth: human_rows_per_domain must be positive");
  if (!(attack_fraction >= 0.0 && attack_fraction <= 1.0)) {
    throw Error("synth: attack_fraction must lie in [0,1]");
  }
  if (!(attack_rate >= 0.0 && attack_rate <= 1.0)) throw Error("synth: attack_rate must lie in [0,1]");
  if (words_mean < 10) throw Error("synth: words_mean must be at least 10");
  const auto st = resolved_styles();
  if (st.size() != n_generators) throw Error("synth: one style per generator required");
  for (std::size_t i = 0; i < st.size(); ++i) {
    if (!(st[i].temperature > 0.0) || !(st[i].sentence_len_mean >= 1.0) ||
        !(st[i].bias_strength >= 0.0) || !(st[i].sentence_len_spread >= 0.0)) {
      throw Error("synth: invalid style for generator " + std::to_string(i));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (st[i] == st[j]) throw Error("synth: generator styles must be distinct");
    }
  }
}

std::vector<GeneratorStyle> SynthSpec::resolved_styles() const {
  return styles.empty() ? default_styles(n_generators) : styles;
}

std::vector<std::string> domain_names(std::size_t n_domains) {
  const auto& seeds = detail::seed_texts();
  if (n_domains > seeds.size()) throw Error("synth: too many domains");
  std::vector<std::string> out;
  for (std::size_t d = 0; d < n_domains; ++d) out.push_back(seeds[d].domain);
  return out;
}

corpus::LabelSpace label_space(const SynthSpec& spec) {
  std::vector<std::string> gens;
  for (std::size_t g = 0; g < spec.n_generators; ++g) gens.push_back("gen_" + std::to_string(g));
  return corpus::LabelSpace(gens, attacks::default_attack_labels(), domain_names(spec.n_domains));
}

corpus::MixtureSpec default_mixture() {
  return corpus::MixtureSpec{{{kSourceFull, 0.5}, {kSourceGen, 0.25}, {kSourceWeb, 0.25}}};
}

std::string generate_text(const GeneratorStyle& style, std::size_t domain,
                          std::size_t words_mean, Rng& rng) {
  const TemperedChain& chain = chain_for(domain, style);
  const std::size_t target =
      draw_length(static_cast<double>(words_mean), 0.2, words_mean / 2, rng);
  std::string out;
  std::size_t words = 0, sentence_words = 0, word_len = 0;
  std::size_t sentence_len = draw_length(style.sentence_len_mean, style.sentence_len_spread, 3, rng);
  bool capitalize = true;
  int a = kSpace, b = kSpace;

  auto end_word = [&] {
    ++words;
    ++sentence_words;
    word_len = 0;
    if (sentence_words >= sentence_len || words >= target) {
      while (!out.empty() && (out.back() == ',' || out.back() == '\'')) out.pop_back();
      out += '.';
      sentence_words = 0;
      sentence_len = draw_length(style.sentence_len_mean, style.sentence_len_spread, 3, rng);
      capitalize = true;
      a = b = kSpace;
    } else {
      a = b;
      b = kSpace;
    }
    if (words < target) out += ' ';
  };

  std::size_t guard = 0;
  while (words < target && ++guard < 100000) {
    if (word_len == 0 && uniform01(rng) < kNumberWordRate) {
      out += std::to_string(1 + uniform_index(rng, 2030));
      end_word();
      continue;
    }
    int c = chain.next(a, b, rng);
    if (word_len >= kMaxWordLen) c = kSpace;
    if (c == kSpace) {
      if (word_len > 0) end_word();
      else a = b, b = kSpace;
      continue;
    }
    if (word_len == 0 && (c == kComma || c == kApos)) continue;
    if (c == kComma) {
      // A comma closes the word.
      out += ',';
      a = b;
      b = kComma;
      end_word();
      continue;
    }
    char ch = char_of(c);
    if (capitalize && c < kLetters) {
      ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
      capitalize = false;
    }
    out += ch;
    ++word_len;
    a = b;
    b = c;
  }
  if (out.empty() || out.back() != '.') {
    while (!out.empty() && (out.back() == ' ' || out.back() == ',')) out.pop_back();
    out += '.';
  }
  return out;
}

std::vector<corpus::TextRecord> generate(const SynthSpec& spec) {
  spec.validate();
  const corpus::LabelSpace space = label_space(spec);
  const auto styles = spec.resolved_styles();
  const auto domains = domain_names(spec.n_domains);
  const int none_atk = space.index(corpus::Task::Atk, "none");

  struct Plan {
    corpus::TextRecord rec;
    GeneratorStyle style;
    std::size_t domain;
  };
  std::vector<Plan> plan;
  const std::size_t humans = spec.humans_per_domain();
  for (std::size_t d = 0; d < spec.n_domains; ++d) {
    for (std::size_t i = 0; i < humans; ++i) {
      Plan p;
      p.rec.id = spec.id_prefix + "h-" + domains[d] + "-" + std::to_string(i);
      p.rec.main_label = corpus::kHuman;
      p.rec.dom = static_cast<int>(d);
      const bool full = i % 2 == 0;
      p.rec.source = full ? kSourceFull : kSourceWeb;
      if (full) p.rec.atk = none_atk;
      p.style = human_style();
      p.domain = d;
      plan.push_back(std::move(p));
    }
  }
  for (std::size_t g = 0; g < spec.n_generators; ++g) {
    for (std::size_t d = 0; d < spec.n_domains; ++d) {
      for (std::size_t i = 0; i < spec.rows_per_cell; ++i) {
        Plan p;
        p.rec.id = spec.id_prefix + "g" + std::to_string(g) + "-" + domains[d] + "-" +
                   std::to_string(i);
        p.rec.main_label = corpus::kAI;
        p.rec.gen = static_cast<int>(g);
        p.rec.dom = static_cast<int>(d);
        const bool full = i % 2 == 0;
        p.rec.source = full ? kSourceFull : kSourceGen;
        if (full) p.rec.atk = none_atk;
        p.style = styles[g];
        p.domain = d;
        plan.push_back(std::move(p));
      }
    }
  }
  for (std::size_t d = 0; d < spec.n_domains; ++d) chain_for(d, human_style());
  parallel_for(plan.size(), [&](std::size_t i) {
    Rng rng(fnv1a64(plan[i].rec.id, spec.seed));
    plan[i].rec.text = generate_text(plan[i].style, plan[i].domain, spec.words_mean, rng);
  });

  std::vector<corpus::TextRecord> out;
  out.reserve(plan.size());
  std::vector<std::size_t> attackable;
  for (auto& p : plan) {
    if (p.rec.main_label == corpus::kAI && p.rec.atk) attackable.push_back(out.size());
    out.push_back(std::move(p.rec));
  }

  const auto n_attacked = static_cast<std::size_t>(
      std::llround(spec.attack_fraction * static_cast<double>(attackable.size())));
  if (n_attacked == 0) return out;
  Rng pick(fnv1a64("attack-pick", spec.seed));
  for (std::size_t i = attackable.size(); i > 1; --i) {
    std::swap(attackable[i - 1], attackable[uniform_index(pick, i)]);
  }
  attackable.resize(n_attacked);
  std::sort(attackable.begin(), attackable.end());

  attacks::AttackConfig cfg;
  cfg.rate = spec.attack_rate;
  cfg.seed = spec.seed;
  cfg.lexicon = std::make_shared<attacks::SynonymLexicon>(attacks::builtin_lexicon());
  std::vector<std::vector<corpus::TextRecord>> copies(n_attacked);
  parallel_for(n_attacked, [&](std::size_t j) {
    const auto kind = attacks::kAllAttacks[j % attacks::kAllAttacks.size()];
    copies[j] = attacks::build_attacked_pool({out[attackable[j]]}, {kind}, cfg, space);
  });
  for (auto& c : copies) {
    for (auto& r : c) out.push_back(std::move(r));
  }
  return out;
}

DeskDataset make_desk_dataset(const SynthSpec& train_spec, const DeskSizes& sizes) {
  DeskDataset ds;
  ds.space = label_space(train_spec);
  ds.mixture = default_mixture();
  SynthSpec spec = train_spec;
  if (spec.id_prefix.empty()) spec.id_prefix = "train-";
  ds.train = generate(spec);

  std::unordered_set<std::uint64_t> seen;
  for (const auto& r : ds.train) seen.insert(corpus::text_hash(r.text));

  SynthSpec val = train_spec;
  val.seed = fnv1a64("validation", train_spec.seed);
  val.rows_per_cell = sizes.val_rows_per_cell;
  val.human_rows_per_domain = sizes.val_humans_per_domain;
  val.id_prefix = "val-";
  ds.validation = corpus::dedup_against(generate(val), seen);

  SynthSpec ev = train_spec;
  ev.seed = fnv1a64("evaluation", train_spec.seed);
  ev.rows_per_cell = sizes.eval_rows_per_cell;
  ev.human_rows_per_domain = sizes.eval_humans_per_domain;
  ev.attack_fraction = 0.0;
  ev.id_prefix = "eval-";
  auto base = generate(ev);
  for (auto& r : base) {
    r.atk = ds.space.index(corpus::Task::Atk, "none");
    r.source = "synth_eval";
  }
  std::vector<corpus::TextRecord> ai;
  for (const auto& r : base) {
    if (r.main_label == corpus::kAI) ai.push_back(r);
  }
  attacks::AttackConfig cfg;
  cfg.rate = train_spec.attack_rate;
  cfg.seed = ev.seed;
  cfg.lexicon = std::make_shared<attacks::SynonymLexicon>(attacks::builtin_lexicon());
  const std::vector<attacks::AttackKind> kinds(attacks::kEvalAttacks.begin(),
                                               attacks::kEvalAttacks.end());
  auto attacked = attacks::build_attacked_pool(ai, kinds, cfg, ds.space);
  base.insert(base.end(), std::make_move_iterator(attacked.begin()),
              std::make_move_iterator(attacked.end()));
  ds.eval = corpus::dedup_against(std::move(base), seen);
  return ds;
}

}  // namespace meld::synth
