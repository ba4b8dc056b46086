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


// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Oracles here are computed independently of the library code.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config_file.hpp"
#include "meld/attacks.hpp"
#include "meld/corpus.hpp"
#include "meld/evalpipe.hpp"
#include "meld/losses.hpp"
#include "meld/metrics.hpp"
#include "meld/model.hpp"
#include "meld/numcore/grad_check.hpp"
#include "meld/synth.hpp"
#include "meld/trainer.hpp"
#include "meld/utf8.hpp"

using namespace meld;
using num::Tensor2;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Tensor2 row(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor2(1, n, std::move(v));
}

Tensor2 column(std::vector<double> v) {
  const std::size_t n = v.size();
  return Tensor2(n, 1, std::move(v));
}

// 1. Whole-step gradient on four rows carrying every label.
Verdict gradient_check() {
  const auto t0 = Clock::now();
  trainer::TrainConfig cfg;
  cfg.dims = {64, 4, 2, 8, 2};
  cfg.max_seq_len = 64;
  cfg.batch_size = 4;
  cfg.seed = 6;
  cfg.weights.alpha = 0.5;
  cfg.attack.lexicon = std::shared_ptr<const attacks::SynonymLexicon>(
      &attacks::builtin_lexicon(), [](const attacks::SynonymLexicon*) {});
  std::vector<corpus::TextRecord> rows(4);
  const char* texts[] = {"the river ran past the old stone field", "a quiet brook under the hill",
                         "neural token vectors fill the matrix", "the kernel graph holds a prompt"};
  for (std::size_t i = 0; i < 4; ++i) {
    rows[i].id = "g" + std::to_string(i);
    rows[i].text = texts[i];
    rows[i].main_label = i < 2 ? corpus::kHuman : corpus::kAI;
    rows[i].dom = static_cast<int>(i % 2);
    if (i >= 2) {
      rows[i].gen = static_cast<int>(i - 2);
      rows[i].atk = static_cast<int>(i + 1);
    }
  }
  const auto batch = corpus::make_batch({&rows[0], &rows[1], &rows[2], &rows[3]});
  auto state = trainer::TrainState::init(cfg);
  Rng brng(7);
  for (Tensor2* b : {&state.student.trunk1_b, &state.student.trunk2_b, &state.student.main1_b}) {
    for (double& x : b->data()) x = 0.3 * (2.0 * uniform01(brng) - 1.0);
  }
  state.student.log_vars = row({0.2, -0.1, 0.3, 0.05});
  state.teacher.params = state.student;
  state.teacher.params.main2_b[0] = 0.4;
  Rng rng(8);
  const auto in = trainer::prepare_step(state, cfg, batch, rng);
  {
    num::Tape tape;
    const auto parts =
        trainer::compute_step_loss(tape, model::bind(tape, state.student), in, cfg, nullptr);
    for (const auto& t : parts.task) {
      if (!t) return {false, "a task loss is absent from the fixture"};
    }
    if (parts.rank_skipped) return {false, "rank term skipped on the fixture"};
  }
  std::vector<Tensor2> params;
  for (const Tensor2* b : state.student.blocks()) params.push_back(*b);
  auto f = [&](num::Tape& t, std::span<const num::Var> v) {
    return trainer::compute_step_loss(t, model::bind(v), in, cfg, nullptr).total;
  };
  const double err = num::grad_check(f, params, 1e-6);
  const double secs = seconds_since(t0);
  return {err < 1e-4 && secs < 30.0,
          "max rel err " + fmt("%.3g", err) + ", " + fmt("%.2f", secs) + " s"};
}

// 2. Closed-form loss identities.
Verdict loss_identities() {
  double worst_s = 0.0;
  for (double L : {0.05, 0.5, 1.0, 2.7, 40.0}) {
    // Bisection on the tape gradient of the single-task Kendall objective.
    auto grad_at = [L](double s) {
      num::Tape t;
      losses::TaskLossArray arr = {t.constant(row({L})), std::nullopt, std::nullopt,
                                   std::nullopt};
      const Tensor2 log_vars = row({s, 0.0, 0.0, 0.0});
      const auto sv = t.parameter(log_vars);
      t.backward(losses::kendall_combine(t, arr, sv));
      return t.grad(sv)[0];
    };
    double lo = -20.0, hi = 20.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (grad_at(mid) < 0.0 ? lo : hi) = mid;
    }
    worst_s = std::max(worst_s, std::abs(0.5 * (lo + hi) - std::log(2.0 * L)));
  }
  num::Tape t;
  double worst_kl = 0.0;
  for (std::size_t k : {2u, 5u, 17u}) {
    const Tensor2 z(3, k, std::vector<double>(3 * k, 1.7));
    const auto kl = losses::distill_kl(t, t.constant(z), t.constant(z), 0.04, 0.1);
    worst_kl = std::max(worst_kl, std::abs(t.value(kl)[0]));
  }
  double worst_rank = 0.0;
  for (double m : {-3.0, 0.0, 0.25, 8.0}) {
    const std::vector<int> y = {corpus::kAI, corpus::kHuman};
    const auto r = losses::rank_loss(t, t.constant(column({m, m})), y, 0.05, 0.5);
    worst_rank = std::max(worst_rank, std::abs(t.value(r.loss)[0] - std::log(2.0)));
  }
  return {worst_s <= 1e-6 && worst_kl <= 1e-12 && worst_rank <= 1e-9,
          "|s*-ln2L| " + fmt("%.2g", worst_s) + ", KL " + fmt("%.2g", worst_kl) +
              ", |rank-ln2| " + fmt("%.2g", worst_rank)};
}

double brute_auroc(const std::vector<double>& s, const std::vector<int>& y) {
  long long wins2 = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      ++pairs;
      wins2 += s[i] > s[j] ? 2 : s[i] == s[j] ? 1 : 0;
    }
  }
  return static_cast<double>(wins2) / (2.0 * static_cast<double>(pairs));
}

// 3. AUROC, thresholds and bootstrap endpoints against oracles.
Verdict metric_oracles() {
  Rng rng(31);
  int auroc_bad = 0, fpr_bad = 0, boot_bad = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + uniform_index(rng, 199);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(uniform_index(rng, 15)) * 0.1;
      y[i] = static_cast<int>(uniform_index(rng, 2));
    }
    y[0] = 0;
    y[n - 1] = 1;
    auroc_bad += metrics::auroc(s, y) != brute_auroc(s, y);
    std::vector<double> humans;
    for (std::size_t i = 0; i < n; ++i) {
      if (y[i] == 0) humans.push_back(s[i]);
    }
    for (double fpr : {0.01, 0.05, 0.1, 0.3}) {
      const double thr = metrics::threshold_at_fpr(humans, fpr);
      const auto flagged = std::count_if(humans.begin(), humans.end(),
                                         [thr](double v) { return v > thr; });
      fpr_bad += static_cast<double>(flagged) > fpr * static_cast<double>(humans.size());
    }
    if (trial % 10 == 0 && n >= 20) {
      const std::size_t B = 200 + 100 * static_cast<std::size_t>(trial / 10);
      const auto metric = trial % 20 == 0 ? metrics::MetricSpec::auroc()
                                          : metrics::MetricSpec::tpr(0.05);
      const auto ci = metrics::bootstrap_ci(s, y, metric, B, 99);
      auto samples = metrics::bootstrap_samples(s, y, metric, B, 99);
      std::sort(samples.begin(), samples.end());
      const auto lo = static_cast<std::size_t>(std::ceil(0.025 * static_cast<double>(B))) - 1;
      const auto hi = static_cast<std::size_t>(std::ceil(0.975 * static_cast<double>(B))) - 1;
      boot_bad += ci.lo != samples[lo] || ci.hi != samples[hi];
    }
  }
  return {auroc_bad == 0 && fpr_bad == 0 && boot_bad == 0,
          std::to_string(auroc_bad) + " AUROC mismatches, " + std::to_string(fpr_bad) +
              " FPR violations, " + std::to_string(boot_bad) + " bootstrap endpoint mismatches"};
}

// 4. Teacher gap under a constant student.
Verdict ema_geometry() {
  const model::ModelDims dims{128, 8, 3, 4, 2};
  const auto student = model::ModelParams::init(dims, 1);
  double worst = 0.0;
  for (double beta : {0.9, 0.99, 0.999}) {
    model::TeacherState teacher{model::ModelParams::init(dims, 2), beta};
    const auto start = teacher.params;
    for (int k = 1; k <= 100; ++k) {
      model::ema_update(teacher, student);
      const double scale = std::pow(beta, k);
      for (std::size_t b = 0; b < model::ModelParams::kNumBlocks; ++b) {
        const auto& t = *teacher.params.blocks()[b];
        const auto& s0 = *start.blocks()[b];
        const auto& st = *student.blocks()[b];
        for (std::size_t i = 0; i < t.size(); ++i) {
          worst = std::max(worst, std::abs((t[i] - st[i]) - scale * (s0[i] - st[i])));
        }
      }
    }
  }
  return {worst <= 1e-12, "max deviation from beta^k gap " + fmt("%.3g", worst)};
}

// 5. Per-source proportions over many batches.
Verdict mixture_fidelity() {
  const std::vector<double> ratios = {0.28, 0.34, 0.08, 0.14, 0.06, 0.06, 0.04};
  corpus::MixtureSpec spec;
  std::vector<corpus::TextRecord> rows;
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    const std::string name = "source" + std::to_string(k);
    spec.entries.push_back({name, ratios[k]});
    for (std::size_t i = 0; i < 50 + 37 * k; ++i) {
      corpus::TextRecord r;
      r.id = name + "-" + std::to_string(i);
      r.text = "row " + r.id;
      r.main_label = static_cast<int>(i % 2);
      r.source = name;
      rows.push_back(std::move(r));
    }
  }
  corpus::MixtureSampler sampler(rows, spec, 2026);
  std::map<std::string, double> counts;
  const std::size_t batches = 10000, size = 384;
  for (std::size_t b = 0; b < batches; ++b) {
    for (const auto* r : sampler.sample_batch(size).records) counts[r->source] += 1.0;
  }
  double worst = 0.0;
  for (const auto& e : spec.entries) {
    worst = std::max(worst, std::abs(counts[e.source] / (batches * size) - e.ratio));
  }
  return {worst <= 0.01, "max |p - ratio| " + fmt("%.5f", worst)};
}

std::size_t osa_distance(const std::u32string& a, const std::u32string& b) {
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::vector<std::size_t>> d(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost});
      if (i > 1 && j > 1 && a[i - 1] == b[j - 2] && a[i - 2] == b[j - 1]) {
        d[i][j] = std::min(d[i][j], d[i - 2][j - 2] + 1);
      }
    }
  }
  return d[n][m];
}

bool ascii_alpha(char32_t c) { return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z'); }

std::size_t positional_diffs(const std::u32string& a, const std::u32string& b) {
  if (a.size() != b.size()) return static_cast<std::size_t>(-1);
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i];
  return n;
}

// Letter runs; separators between them are kept so layout changes show up.
std::vector<std::string> letter_tokens(const std::string& s, std::string* separators) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    const bool letter = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (letter) {
      cur.push_back(c);
    } else {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
      separators->push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::size_t> space_runs(const std::string& s) {
  std::vector<std::size_t> out;
  std::size_t run = 0;
  for (char c : s) {
    if (c == ' ') {
      ++run;
    } else {
      out.push_back(run);
      run = 0;
    }
  }
  return out;
}

std::vector<corpus::TextRecord> attack_fixture() {
  synth::SynthSpec spec;
  spec.n_generators = 2;
  spec.n_domains = 2;
  spec.rows_per_cell = 40;
  spec.attack_fraction = 0.0;
  spec.seed = 77;
  auto rows = synth::generate(spec);
  if (rows.size() < 200) throw Error("attack fixture needs 200 rows");
  rows.resize(200);
  const char* numbers[] = {" It cost 42 coins in 1987.", " Room 7 of 12.", " Call 555 0199."};
  for (std::size_t i = 0; i < rows.size(); i += 3) rows[i].text += numbers[i % 3];
  return rows;
}

// 6. Exact perturbation budgets and label-blind augmentation.
Verdict attack_budgets() {
  const auto rows = attack_fixture();
  attacks::AttackConfig base;
  base.lexicon = std::shared_ptr<const attacks::SynonymLexicon>(
      &attacks::builtin_lexicon(), [](const attacks::SynonymLexicon*) {});
  const auto& homo = attacks::builtin_homoglyphs();
  const auto& lex = attacks::builtin_lexicon();
  std::map<std::string, int> bad;
  std::size_t checks = 0;
  for (double rate : {0.05, 0.2}) {
    auto cfg = base;
    cfg.rate = rate;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::string& text = rows[r].text;
      const auto cps = utf8::decode(text);
      std::size_t alpha = 0, digits = 0, homo_n = 0;
      for (char32_t c : cps) {
        alpha += ascii_alpha(c);
        digits += c >= U'0' && c <= U'9';
        homo_n += homo.count(c) > 0;
      }
      std::string seps;
      const auto words = letter_tokens(text, &seps);
      std::size_t lexical = 0;
      for (const auto& w : words) {
        std::string lower = w;
        for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        const auto it = lex.find(lower);
        lexical += it != lex.end() && !it->second.empty();
      }
      const auto before_runs = space_runs(text);
      std::size_t gaps = 0;
      for (std::size_t i = 1; i < before_runs.size(); ++i) gaps += before_runs[i] > 0;
      Rng rng(1000 + r);
      auto check = [&](const std::string& kind, bool ok) {
        ++checks;
        if (!ok) ++bad[kind];
      };
      using K = attacks::AttackKind;
      // Edit distance counts typo edits only while they stay sparse; dense
      // edits can admit a cheaper joint alignment.
      const auto typo = utf8::decode(attacks::apply(K::Typo, text, cfg, rng));
      if (rate <= 0.05) {
        check("typo", osa_distance(cps, typo) == attacks::perturbation_budget(rate, alpha));
      }
      check("case_flip",
            positional_diffs(cps, utf8::decode(attacks::apply(K::CaseFlip, text, cfg, rng))) ==
                attacks::perturbation_budget(rate, alpha));
      check("digit_perturb",
            positional_diffs(cps, utf8::decode(attacks::apply(K::DigitPerturb, text, cfg, rng))) ==
                attacks::perturbation_budget(rate, digits));
      check("homoglyph",
            positional_diffs(cps, utf8::decode(attacks::apply(K::Homoglyph, text, cfg, rng))) ==
                attacks::perturbation_budget(rate, homo_n));
      {
        std::u32string stripped;
        std::size_t inserted = 0;
        for (char32_t c : utf8::decode(attacks::apply(K::ZeroWidth, text, cfg, rng))) {
          if (c == U'\u200B') ++inserted;
          else stripped.push_back(c);
        }
        check("zero_width",
              stripped == cps && inserted == attacks::perturbation_budget(rate, cps.size() - 1));
      }
      {
        const auto after = space_runs(attacks::apply(K::Whitespace, text, cfg, rng));
        std::size_t changed = 0;
        bool aligned = after.size() == before_runs.size();
        for (std::size_t i = 0; aligned && i < after.size(); ++i) changed += after[i] != before_runs[i];
        check("whitespace", aligned && changed == attacks::perturbation_budget(rate, gaps));
      }
      {
        std::string seps2;
        const auto swapped = letter_tokens(attacks::apply(K::Synonym, text, cfg, rng), &seps2);
        std::size_t diff = 0;
        bool aligned = swapped.size() == words.size() && seps2 == seps;
        for (std::size_t i = 0; aligned && i < words.size(); ++i) diff += swapped[i] != words[i];
        check("synonym", aligned && diff == attacks::perturbation_budget(rate, lexical));
      }
    }
  }

  // Label blindness: outcome of train-time augmentation against the row label.
  trainer::TrainConfig tc;
  auto cfg = base;
  cfg.rate = tc.attack.rate;
  std::array<std::array<double, 5>, 2> table{};
  Rng rng(4242);
  for (std::size_t d = 0; d < 100000; ++d) {
    const auto& r = rows[uniform_index(rng, rows.size())];
    const auto view = attacks::augment_view(r.text, tc.p_augment, cfg, rng);
    std::size_t col = 0;
    if (view.applied) {
      const auto it = std::find(attacks::kTrainTimeAttacks.begin(),
                                attacks::kTrainTimeAttacks.end(), *view.applied);
      col = 1 + static_cast<std::size_t>(it - attacks::kTrainTimeAttacks.begin());
    }
    table[r.main_label == corpus::kAI ? 1 : 0][col] += 1.0;
  }
  double chi2 = 0.0, total = 0.0;
  std::array<double, 2> rsum{};
  std::array<double, 5> csum{};
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      rsum[i] += table[i][j];
      csum[j] += table[i][j];
      total += table[i][j];
    }
  }
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      const double e = rsum[i] * csum[j] / total;
      chi2 += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  }
  // Upper 1% point of chi-square with 4 degrees of freedom.
  const double critical = 13.276704135987622;
  std::string failures;
  for (const auto& [k, n] : bad) failures += " " + k + ":" + std::to_string(n);
  return {bad.empty() && chi2 < critical,
          std::to_string(checks) + " budget checks" +
              (failures.empty() ? std::string(" exact") : ", failures" + failures) +
              ", chi2 " + fmt("%.3f", chi2) + " < " + fmt("%.3f", critical)};
}

// 7. Desk-scale ablation direction and wall clock.
Verdict ablation_direction() {
  const std::string cfg_path = std::string(MELD_SOURCE_DIR) + "/configs/desk_ablation.cfg";
  const auto t0 = Clock::now();
  const nlohmann::json j = cli::cmd_ablate(cfg_path, "acceptance_ablation");
  const double secs = seconds_since(t0);
  std::map<std::string, std::vector<double>> tpr5;
  std::map<std::uint64_t, std::map<std::string, double>> by_seed;
  for (const auto& r : j["runs"]) {
    tpr5[r["variant"]].push_back(r["tpr@0.05"]);
    by_seed[r["seed"]][r["variant"]] = r["tpr@0.05"];
  }
  int wins = 0, seeds = 0;
  for (const auto& [seed, v] : by_seed) {
    ++seeds;
    wins += v.at("full") >= v.at("dense");
  }
  double delta = 0.0;
  int n_delta = 0;
  for (const auto& c : j["full_minus_variant"]) {
    if (c["variant"] == "dense") {
      delta += c["delta_tpr@0.05"]["point"].get<double>();
      ++n_delta;
    }
  }
  delta /= std::max(1, n_delta);
  std::ostringstream os;
  os << "full>=dense on " << wins << "/" << seeds << " seeds, mean dTPR@5 " << fmt("%+.4f", delta)
     << ", " << fmt("%.0f", secs) << " s; mean TPR@5";
  for (const auto& [name, v] : tpr5) {
    double m = 0.0;
    for (double x : v) m += x;
    os << " " << name << "=" << fmt("%.3f", m / static_cast<double>(v.size()));
  }
  return {seeds == 3 && wins >= 2 && delta >= 0.0 && secs < 900.0, os.str()};
}

// 8. TPR when AI scores share the human distribution.
Verdict calibration_sanity() {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> g(0.0, 1.0);
  const std::size_t n = 100000;
  std::vector<double> s;
  std::vector<int> y;
  for (std::size_t i = 0; i < 2 * n; ++i) {
    s.push_back(g(gen));
    y.push_back(i < n ? 0 : 1);
  }
  const double tpr = metrics::tpr_at_fpr(s, y, 0.01);
  return {tpr >= 0.005 && tpr <= 0.02, "TPR@1%FPR " + fmt("%.5f", tpr)};
}

// 9. Margin sign around the human 99th percentile.
Verdict margin_sign() {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> humans(10000);
  for (double& h : humans) h = g(gen);
  std::vector<double> sorted = humans;
  std::sort(sorted.begin(), sorted.end());
  int wrong = 0;
  for (std::size_t rank : {9920u, 9950u, 9999u}) {
    wrong += metrics::standardized_margin(sorted[rank], humans) <= 0.0;
  }
  wrong += metrics::standardized_margin(sorted.back() + 1.0, humans) <= 0.0;
  for (std::size_t rank : {0u, 5000u, 9800u, 9880u}) {
    wrong += metrics::standardized_margin(sorted[rank], humans) >= 0.0;
  }
  wrong += metrics::standardized_margin(sorted.front() - 1.0, humans) >= 0.0;
  // High-precision value of the 0.99 normal quantile.
  const double oracle = 2.3263478740408408;
  const double err = std::abs(metrics::inv_normal_cdf(0.99) - oracle);
  return {wrong == 0 && err <= 1e-4,
          std::to_string(wrong) + " sign errors, |inv_normal(0.99) - oracle| " + fmt("%.2g", err)};
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct PipelineResult {
  std::uint64_t hash = 0;
  std::string report;
};

PipelineResult run_pipeline(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_file(dir / "train.cfg", "n_generators = 4\nn_domains = 3\nrows_per_cell = 40\nseed = 1\n");
  write_file(dir / "val.cfg",
             "n_generators = 4\nn_domains = 3\nrows_per_cell = 8\nseed = 2\nid_prefix = v-\n");
  write_file(dir / "eval.cfg",
             "n_generators = 4\nn_domains = 3\nrows_per_cell = 10\nseed = 3\nid_prefix = e-\n");
  write_file(dir / "model.cfg",
             "train = train.jsonl\nvalidation = val.jsonl\nseed = 5\nvocab = 1024\nhidden = 16\n"
             "total_steps = 60\nwarmup_steps = 6\nlr_peak = 0.003\nbatch_size = 16\n"
             "eval_every = 20\nswa_start = 20\nmax_seq_len = 256\n");
  for (const char* name : {"train", "val", "eval"}) {
    cli::cmd_synth((dir / (std::string(name) + ".cfg")).string(),
                   (dir / (std::string(name) + ".jsonl")).string());
  }
  const auto outcome = cli::cmd_train((dir / "model.cfg").string(), (dir / "m.ckpt").string());
  cli::AttackOptions ao;
  ao.in = (dir / "eval.jsonl").string();
  ao.out = (dir / "eval_att.jsonl").string();
  ao.kinds = "homoglyph,whitespace,synonym,zero_width,case_flip,digit_perturb";
  ao.seed = 4;
  cli::cmd_attack(ao);
  cli::EvalOptions eo;
  eo.checkpoint = (dir / "m.ckpt").string();
  eo.pool = ao.out;
  eo.out = (dir / "report.json").string();
  eo.resamples = 500;
  cli::cmd_eval(eo);
  return {outcome.checkpoint_hash, read_file(dir / "report.json")};
}

// 10. Two identical pipeline runs.
Verdict determinism() {
  const fs::path base = fs::temp_directory_path() / "meld_acceptance_determinism";
  const auto a = run_pipeline(base / "a");
  const auto b = run_pipeline(base / "b");
  fs::remove_all(base);
  char buf[40];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(a.hash));
  const bool same_report = !a.report.empty() && a.report == b.report;
  return {a.hash == b.hash && same_report,
          std::string("checkpoint ") + buf + (a.hash == b.hash ? " matches" : " differs") +
              ", report " + (same_report ? "identical" : "differs")};
}

}  // namespace

// With arguments, runs only the listed criterion numbers.
int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"gradient correctness", gradient_check},
      {"loss identities", loss_identities},
      {"metric oracles", metric_oracles},
      {"EMA geometry", ema_geometry},
      {"mixture fidelity", mixture_fidelity},
      {"attack budgets", attack_budgets},
      {"desk-scale ablation direction", ablation_direction},
      {"calibration sanity", calibration_sanity},
      {"standardized margin", margin_sign},
      {"determinism", determinism},
  };
  int failed = 0;
  std::vector<bool> selected(criteria.size(), argc <= 1);
  for (int a = 1; a < argc; ++a) {
    const int k = std::atoi(argv[a]);
    if (k < 1 || k > static_cast<int>(criteria.size())) {
      std::fprintf(stderr, "unknown criterion %s\n", argv[a]);
      return 2;
    }
    selected[static_cast<std::size_t>(k - 1)] = true;
  }
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected[i]) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s criterion %zu (%s): %s\n", v.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
