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

#include "meld/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_map>

#include "meld/common.hpp"
#include "meld/corpus.hpp"

namespace meld::metrics {

using corpus::kAI;
using corpus::kHuman;

std::vector<double> ScoredPool::scores() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.score);
  return out;
}

std::vector<int> ScoredPool::labels() const {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.main);
  return out;
}

std::vector<double> ScoredPool::human_scores() const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.main == kHuman) out.push_back(r.score);
  }
  return out;
}

std::vector<double> ScoredPool::ai_scores() const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.main == kAI) out.push_back(r.score);
  }
  return out;
}

namespace {

void check_scores(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error("scores and labels differ in length");
  for (double s : scores) {
    if (!std::isfinite(s)) throw Error("non-finite score");
  }
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const int> labels) {
  check_scores(scores, labels);
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double u = 0.0;
  std::size_t humans_below = 0, n_ai = 0, n_human = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i, ai = 0, hu = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == kAI ? ai : hu) += 1;
      ++j;
    }
    u += static_cast<double>(ai) * static_cast<double>(humans_below) +
         0.5 * static_cast<double>(ai) * static_cast<double>(hu);
    humans_below += hu;
    n_ai += ai;
    n_human += hu;
    i = j;
  }
  if (n_ai == 0 || n_human == 0) throw Error("pool missing class");
  return u / (static_cast<double>(n_ai) * static_cast<double>(n_human));
}

double auroc(const ScoredPool& pool) {
  const auto s = pool.scores();
  const auto l = pool.labels();
  return auroc(s, l);
}

double threshold_at_fpr(std::span<const double> human_scores, double fpr) {
  if (human_scores.empty()) throw Error("pool missing class");
  if (!(fpr > 0.0 && fpr < 1.0)) throw Error("fpr must lie in (0,1)");
  std::vector<double> sorted(human_scores.begin(), human_scores.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double allowed = fpr * static_cast<double>(n);
  auto k = static_cast<std::size_t>(std::ceil((1.0 - fpr) * static_cast<double>(n) - 1e-9));
  k = std::clamp<std::size_t>(k, 1, n);
  // Guard against rounding in (1 - fpr) * n letting one extra human through.
  while (k < n && static_cast<double>(n - k) > allowed + 1e-9) ++k;
  return sorted[k - 1];
}

double tpr_at_fpr(std::span<const double> scores, std::span<const int> labels, double fpr) {
  check_scores(scores, labels);
  std::vector<double> humans;
  std::size_t n_ai = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == kHuman) {
      humans.push_back(scores[i]);
    } else {
      ++n_ai;
    }
  }
  if (humans.empty() || n_ai == 0) throw Error("pool missing class");
  const double theta = threshold_at_fpr(humans, fpr);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == kAI && scores[i] > theta) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n_ai);
}

double tpr_at_fpr(const ScoredPool& pool, double fpr) {
  const auto s = pool.scores();
  const auto l = pool.labels();
  return tpr_at_fpr(s, l, fpr);
}

double MetricSpec::evaluate(std::span<const double> scores, std::span<const int> labels) const {
  return kind == Kind::Auroc ? metrics::auroc(scores, labels)
                             : metrics::tpr_at_fpr(scores, labels, fpr);
}

std::string MetricSpec::name() const {
  if (kind == Kind::Auroc) return "auroc";
  std::ostringstream os;
  os << "tpr@" << fpr;
  return os.str();
}

namespace {

constexpr int kMaxRedraws = 100;

// Draws n row indices with replacement until both classes appear.
void draw_resample(Rng& rng, std::span<const int> labels, std::vector<std::size_t>& idx) {
  const std::size_t n = labels.size();
  idx.resize(n);
  for (int attempt = 0; attempt <= kMaxRedraws; ++attempt) {
    bool ai = false, human = false;
    for (std::size_t i = 0; i < n; ++i) {
      idx[i] = uniform_index(rng, n);
      (labels[idx[i]] == kAI ? ai : human) = true;
    }
    if (ai && human) return;
  }
  throw Error("bootstrap: resample missing class after 100 redraws");
}

void validate_resamples(std::size_t resamples) {
  if (resamples < 100) throw Error("bootstrap needs at least 100 resamples");
}

}  // namespace

std::vector<double> bootstrap_samples(std::span<const double> scores,
                                      std::span<const int> labels, const MetricSpec& metric,
                                      std::size_t resamples, std::uint64_t seed) {
  validate_resamples(resamples);
  check_scores(scores, labels);
  metric.evaluate(scores, labels);  // rejects a pool that lacks a class
  Rng rng(seed);
  std::vector<std::size_t> idx;
  std::vector<double> s(scores.size());
  std::vector<int> l(scores.size());
  std::vector<double> out;
  out.reserve(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    draw_resample(rng, labels, idx);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      s[i] = scores[idx[i]];
      l[i] = labels[idx[i]];
    }
    out.push_back(metric.evaluate(s, l));
  }
  return out;
}

double nearest_rank(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error("percentile of empty sample");
  const double exact = q * static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

namespace {

Interval percentile_interval(std::vector<double> samples) {
  std::sort(samples.begin(), samples.end());
  Interval ci;
  ci.lo = nearest_rank(samples, 0.025);
  ci.hi = nearest_rank(samples, 0.975);
  ci.half_width = 0.5 * (ci.hi - ci.lo);
  return ci;
}

}  // namespace

Interval bootstrap_ci(std::span<const double> scores, std::span<const int> labels,
                      const MetricSpec& metric, std::size_t resamples, std::uint64_t seed) {
  return percentile_interval(bootstrap_samples(scores, labels, metric, resamples, seed));
}

Interval bootstrap_ci(const ScoredPool& pool, const MetricSpec& metric, std::size_t resamples,
                      std::uint64_t seed) {
  const auto s = pool.scores();
  const auto l = pool.labels();
  return bootstrap_ci(s, l, metric, resamples, seed);
}

PairedDiff paired_diff_ci(const ScoredPool& a, const ScoredPool& b, const MetricSpec& metric,
                          std::size_t resamples, std::uint64_t seed) {
  validate_resamples(resamples);
  if (a.size() != b.size()) throw Error("paired scores: id mismatch");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < b.rows.size(); ++i) {
    if (!index.emplace(b.rows[i].id, i).second) throw Error("paired scores: duplicate id " + b.rows[i].id);
  }
  const std::size_t n = a.size();
  std::vector<double> sa(n), sb(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto it = index.find(a.rows[i].id);
    if (it == index.end()) throw Error("paired scores: id mismatch");
    const ScoredRow& rb = b.rows[it->second];
    if (rb.main != a.rows[i].main) throw Error("paired scores: label mismatch for " + rb.id);
    sa[i] = a.rows[i].score;
    sb[i] = rb.score;
    labels[i] = a.rows[i].main;
  }
  PairedDiff out;
  out.point = metric.evaluate(sa, labels) - metric.evaluate(sb, labels);
  Rng rng(seed);
  std::vector<std::size_t> idx;
  std::vector<double> ra(n), rb(n);
  std::vector<int> rl(n);
  std::vector<double> diffs;
  diffs.reserve(resamples);
  for (std::size_t r = 0; r < resamples; ++r) {
    draw_resample(rng, labels, idx);
    for (std::size_t i = 0; i < n; ++i) {
      ra[i] = sa[idx[i]];
      rb[i] = sb[idx[i]];
      rl[i] = labels[idx[i]];
    }
    diffs.push_back(metric.evaluate(ra, rl) - metric.evaluate(rb, rl));
  }
  const Interval ci = percentile_interval(std::move(diffs));
  out.lo = ci.lo;
  out.hi = ci.hi;
  out.significant = out.lo > 0.0 || out.hi < 0.0;
  return out;
}

namespace {

double acklam_lower(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

}  // namespace

double inv_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error("inv_normal_cdf: p must lie in (0,1)");
  // 1 - p is exact for p in [0.5, 1), which makes the function odd about 0.5.
  return p > 0.5 ? -acklam_lower(1.0 - p) : acklam_lower(p);
}

double standardized_margin(double score, std::span<const double> human_scores) {
  const std::size_t n = human_scores.size();
  if (n < 2) throw Error("standardized_margin needs at least two human scores");
  std::size_t below = 0, equal = 0;
  for (double h : human_scores) {
    if (h < score) {
      ++below;
    } else if (h == score) {
      ++equal;
    }
  }
  const double nd = static_cast<double>(n);
  double pct = (static_cast<double>(below) + 0.5 * static_cast<double>(equal)) / nd;
  pct = std::clamp(pct, 1.0 / (nd + 1.0), nd / (nd + 1.0));
  return inv_normal_cdf(pct) - inv_normal_cdf(0.99);
}

// ---------------------------------------------------------------------------
// Score CSV.

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw Error("line " + std::to_string(line_no) + ": unterminated quote");
  return fields;
}

std::string opt_str(const std::optional<int>& v) { return v ? std::to_string(*v) : ""; }

std::optional<int> parse_opt_int(const std::string& s, std::size_t line_no) {
  if (s.empty()) return std::nullopt;
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error("line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  }
}

}  // namespace

void save_scores_csv(const ScoredPool& pool, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "id,score,main,gen,atk,dom\n";
  char buf[32];
  for (const auto& r : pool.rows) {
    std::snprintf(buf, sizeof buf, "%.17g", r.score);
    out << csv_field(r.id) << ',' << buf << ',' << r.main << ',' << opt_str(r.gen) << ','
        << opt_str(r.atk) << ',' << opt_str(r.dom) << '\n';
  }
  if (!out) throw Error("write failed: " + path);
}

ScoredPool load_scores_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw Error(path + ": empty score file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "id,score,main,gen,atk,dom") throw Error(path + ": unexpected header");
  ScoredPool pool;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line, line_no);
    if (f.size() != 6) throw Error("line " + std::to_string(line_no) + ": expected 6 fields");
    ScoredRow row;
    row.id = f[0];
    try {
      std::size_t pos = 0;
      row.score = std::stod(f[1], &pos);
      if (pos != f[1].size()) throw std::invalid_argument(f[1]);
    } catch (const std::exception&) {
      throw Error("line " + std::to_string(line_no) + ": bad score '" + f[1] + "'");
    }
    const auto main = parse_opt_int(f[2], line_no);
    if (!main || (*main != kHuman && *main != kAI)) {
      throw Error("line " + std::to_string(line_no) + ": main label must be 0 or 1");
    }
    row.main = *main;
    row.gen = parse_opt_int(f[3], line_no);
    row.atk = parse_opt_int(f[4], line_no);
    row.dom = parse_opt_int(f[5], line_no);
    pool.rows.push_back(std::move(row));
  }
  return pool;
}

}  // namespace meld::metrics
