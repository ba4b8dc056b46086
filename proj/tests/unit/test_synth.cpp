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


#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "meld/attacks.hpp"
#include "meld/metrics.hpp"
#include "meld/synth.hpp"

using namespace meld;
using namespace meld::synth;

namespace {

constexpr std::size_t kBuckets = 2048;

// L2-normalized hashed byte-trigram counts.
std::vector<double> trigram_profile(const std::string& text) {
  std::vector<double> v(kBuckets, 0.0);
  for (std::size_t i = 0; i + 3 <= text.size(); ++i) {
    v[fnv1a64(std::string_view(text).substr(i, 3)) % kBuckets] += 1.0;
  }
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<corpus::TextRecord> originals(const std::vector<corpus::TextRecord>& rows) {
  std::vector<corpus::TextRecord> out;
  for (const auto& r : rows) {
    if (r.parent_id.empty()) out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("fixed seed gives a byte-identical corpus") {
  SynthSpec spec;
  spec.rows_per_cell = 10;
  const auto space = label_space(spec);
  const auto a = generate(spec);
  const auto b = generate(spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(corpus::format_record(a[i], space) == corpus::format_record(b[i], space));
  }
  spec.seed = 7;
  CHECK(generate(spec)[0].text != a[0].text);
}

TEST_CASE("row bookkeeping and labels") {
  SynthSpec spec;
  const auto rows = generate(spec);
  const auto space = label_space(spec);
  std::size_t ai = 0, human = 0, attacked = 0;
  std::map<std::string, std::size_t> per_source;
  std::set<std::string> ids;
  for (const auto& r : rows) {
    ids.insert(r.id);
    CHECK_FALSE(r.text.empty());
    CHECK(r.dom.has_value());
    if (!r.parent_id.empty()) {
      ++attacked;
      CHECK(r.main_label == corpus::kAI);
      REQUIRE(r.atk.has_value());
      CHECK(space.names(corpus::Task::Atk)[static_cast<std::size_t>(*r.atk)] != "none");
      continue;
    }
    ++per_source[r.source];
    if (r.main_label == corpus::kAI) {
      ++ai;
      CHECK(r.gen.has_value());
      CHECK(*r.gen < 4);
    } else {
      ++human;
      CHECK_FALSE(r.gen.has_value());
      if (r.source == kSourceWeb) CHECK_FALSE(r.atk.has_value());
    }
  }
  CHECK(ai == 1200);
  CHECK(human == 300);
  CHECK(ids.size() == rows.size());
  CHECK(attacked > 0);
  CHECK(per_source.count(kSourceFull) == 1);
  CHECK(per_source.count(kSourceGen) == 1);
  CHECK(per_source.count(kSourceWeb) == 1);
  CHECK(space.count(corpus::Task::Gen) == 4);
  CHECK(space.count(corpus::Task::Dom) == 3);
  CHECK_NOTHROW(default_mixture().validate());
}

TEST_CASE("styles are distinct and specs validate") {
  const auto styles = default_styles(4);
  REQUIRE(styles.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) CHECK_FALSE(styles[i] == styles[j]);
  }
  SynthSpec bad;
  bad.n_generators = 1;
  CHECK_THROWS(bad.validate());
  bad = SynthSpec{};
  bad.n_domains = kMaxDomains + 1;
  CHECK_THROWS(bad.validate());
  bad = SynthSpec{};
  bad.styles = {styles[0], styles[0], styles[1], styles[2]};
  CHECK_THROWS(bad.validate());
}

TEST_CASE("generated text is well formed") {
  Rng rng(3);
  const auto text = generate_text(human_style(), 0, 60, rng);
  CHECK(text.size() > 100);
  CHECK_NOTHROW(corpus::text_hash(text));
  std::size_t words = 1;
  for (char c : text) words += c == ' ';
  CHECK(words > 20);
  CHECK(words < 200);
}

TEST_CASE("generators are separable by nearest centroid") {
  SynthSpec spec;
  const auto rows = originals(generate(spec));
  std::vector<std::vector<double>> centroid(spec.n_generators, std::vector<double>(kBuckets, 0.0));
  std::vector<std::pair<int, std::vector<double>>> test;
  std::size_t k = 0;
  for (const auto& r : rows) {
    if (r.main_label != corpus::kAI) continue;
    auto f = trigram_profile(r.text);
    const auto g = static_cast<std::size_t>(*r.gen);
    if (k++ % 2 == 0) {
      for (std::size_t i = 0; i < kBuckets; ++i) centroid[g][i] += f[i];
    } else {
      test.emplace_back(*r.gen, std::move(f));
    }
  }
  for (std::size_t c = 0; c < centroid.size(); ++c) {
    double n = 0.0;
    for (double x : centroid[c]) n += x * x;
    n = std::sqrt(n);
    for (double& x : centroid[c]) x /= n;
  }
  std::size_t correct = 0;
  for (const auto& [g, f] : test) {
    std::size_t best = 0;
    double best_sim = -1e300;
    for (std::size_t c = 0; c < centroid.size(); ++c) {
      const double sim = dot(f, centroid[c]);
      if (sim > best_sim) {
        best_sim = sim;
        best = c;
      }
    }
    correct += static_cast<int>(best) == g;
  }
  const double acc = static_cast<double>(correct) / static_cast<double>(test.size());
  MESSAGE("nearest-centroid generator accuracy " << acc);
  CHECK(acc > 0.6);
}

TEST_CASE("a logistic trigram probe separates humans from AI, imperfectly") {
  SynthSpec train_spec;
  train_spec.seed = 11;
  SynthSpec test_spec;
  test_spec.seed = 12;
  test_spec.id_prefix = "t-";
  auto featurize_rows = [](const std::vector<corpus::TextRecord>& rows) {
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (const auto& r : rows) {
      x.push_back(trigram_profile(r.text));
      y.push_back(r.main_label);
    }
    return std::pair{x, y};
  };
  const auto [xtr, ytr] = featurize_rows(originals(generate(train_spec)));
  const auto [xte, yte] = featurize_rows(originals(generate(test_spec)));

  // Class-balanced full-batch gradient descent with a small L2 penalty.
  double n_pos = 0.0;
  for (int v : ytr) n_pos += v;
  const double n_neg = static_cast<double>(ytr.size()) - n_pos;
  std::vector<double> w(kBuckets, 0.0);
  double b = 0.0;
  for (int epoch = 0; epoch < 300; ++epoch) {
    std::vector<double> gw(kBuckets, 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < xtr.size(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(-(dot(w, xtr[i]) + b)));
      const double weight = ytr[i] ? 0.5 / n_pos : 0.5 / n_neg;
      const double r = weight * (p - ytr[i]);
      for (std::size_t j = 0; j < kBuckets; ++j) gw[j] += r * xtr[i][j];
      gb += r;
    }
    for (std::size_t j = 0; j < kBuckets; ++j) w[j] -= 5.0 * (gw[j] + 1e-4 * w[j]);
    b -= 5.0 * gb;
  }
  std::vector<double> scores;
  for (const auto& x : xte) scores.push_back(dot(w, x) + b);
  const double auc = metrics::auroc(scores, yte);
  MESSAGE("held-out logistic probe AUROC " << auc);
  CHECK(auc > 0.8);
  CHECK(auc < 0.999);
}

TEST_CASE("desk dataset splits are disjoint") {
  SynthSpec spec;
  spec.rows_per_cell = 30;
  spec.n_generators = 2;
  spec.n_domains = 2;
  DeskSizes sizes{5, 10, 6, 12};
  const auto d = make_desk_dataset(spec, sizes);
  std::set<std::uint64_t> train_hashes;
  for (const auto& r : d.train) train_hashes.insert(corpus::text_hash(r.text));
  for (const auto& r : d.eval) CHECK(train_hashes.count(corpus::text_hash(r.text)) == 0);
  std::size_t clean_ai = 0, attacked = 0, humans = 0;
  for (const auto& r : d.eval) {
    if (r.main_label == corpus::kHuman) ++humans;
    else if (r.parent_id.empty()) ++clean_ai;
    else ++attacked;
  }
  CHECK(humans <= 24);
  CHECK(clean_ai <= 24);
  // Attacks with nothing to perturb (no digits, no lexicon words) would
  // duplicate their parent and are dropped by dedup.
  CHECK(attacked <= clean_ai * attacks::kEvalAttacks.size());
  CHECK(attacked >= clean_ai * (attacks::kEvalAttacks.size() - 1));
  std::map<std::string, std::string> text_of;
  for (const auto& r : d.eval) text_of[r.id] = r.text;
  for (const auto& r : d.eval) {
    if (!r.parent_id.empty()) CHECK(r.text != text_of.at(r.parent_id));
  }
  CHECK(!d.validation.empty());
  for (const auto& r : d.train) CHECK(r.id.rfind("train-", 0) == 0);
  const auto again = make_desk_dataset(spec, sizes);
  REQUIRE(again.eval.size() == d.eval.size());
  for (std::size_t i = 0; i < d.eval.size(); ++i) CHECK(again.eval[i].text == d.eval[i].text);
}
