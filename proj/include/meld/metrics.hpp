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
#include <span>
#include <string>
#include <vector>

namespace meld::metrics {

struct ScoredRow {
  std::string id;
  double score = 0.0;
  int main = 0;
  std::optional<int> gen;
  std::optional<int> atk;
  std::optional<int> dom;
  std::vector<double> embedding;  // empty unless captured
};

struct ScoredPool {
  std::vector<ScoredRow> rows;

  std::size_t size() const { return rows.size(); }
  std::vector<double> scores() const;
  std::vector<int> labels() const;
  std::vector<double> human_scores() const;
  std::vector<double> ai_scores() const;
};

// Mann-Whitney AUROC with half credit for ties. Throws "pool missing class"
// when either class is absent.
double auroc(std::span<const double> scores, std::span<const int> labels);
double auroc(const ScoredPool& pool);

// The ceil((1 - fpr) * N)-th smallest human score. Strictly more than
// fpr * N humans never score above it.
double threshold_at_fpr(std::span<const double> human_scores, double fpr);

// Fraction of AI rows scoring strictly above the pool's own threshold.
double tpr_at_fpr(std::span<const double> scores, std::span<const int> labels, double fpr);
double tpr_at_fpr(const ScoredPool& pool, double fpr);

struct MetricSpec {
  enum class Kind { Auroc, TprAtFpr };
  Kind kind = Kind::Auroc;
  double fpr = 0.05;

  static MetricSpec auroc() { return {Kind::Auroc, 0.0}; }
  static MetricSpec tpr(double fpr) { return {Kind::TprAtFpr, fpr}; }

  double evaluate(std::span<const double> scores, std::span<const int> labels) const;
  std::string name() const;
};

inline constexpr std::uint64_t kDefaultBootstrapSeed = 2026;
inline constexpr std::size_t kDefaultBootstrapResamples = 5000;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double half_width = 0.0;
};

// Metric value on each of B row resamples, in draw order. A resample that
// lacks a class is redrawn, at most 100 times in a row.
std::vector<double> bootstrap_samples(std::span<const double> scores,
                                      std::span<const int> labels, const MetricSpec& metric,
                                      std::size_t resamples, std::uint64_t seed);

// Nearest-rank percentile of an ascending sample: element ceil(q * n) - 1.
double nearest_rank(std::span<const double> sorted, double q);

// 2.5 / 97.5 percentile bootstrap interval.
Interval bootstrap_ci(std::span<const double> scores, std::span<const int> labels,
                      const MetricSpec& metric,
                      std::size_t resamples = kDefaultBootstrapResamples,
                      std::uint64_t seed = kDefaultBootstrapSeed);
Interval bootstrap_ci(const ScoredPool& pool, const MetricSpec& metric,
                      std::size_t resamples = kDefaultBootstrapResamples,
                      std::uint64_t seed = kDefaultBootstrapSeed);

struct PairedDiff {
  double point = 0.0;  // metric(a) - metric(b)
  double lo = 0.0;
  double hi = 0.0;
  bool significant = false;  // interval excludes zero
};

// Joint row resampling over two score sets for the same rows. Rows are
// matched by id; both pools must hold the same id set with equal labels.
PairedDiff paired_diff_ci(const ScoredPool& a, const ScoredPool& b, const MetricSpec& metric,
                          std::size_t resamples = kDefaultBootstrapResamples,
                          std::uint64_t seed = kDefaultBootstrapSeed);

// Acklam's rational approximation refined by one Halley step.
double inv_normal_cdf(double p);

// Phi^-1(mid-rank percentile among humans) - Phi^-1(0.99), with the
// percentile clamped to [1/(N+1), N/(N+1)].
double standardized_margin(double score, std::span<const double> human_scores);

// 1 - cosine similarity, clamped to [0, 2].
double cosine_distance(std::span<const double> a, std::span<const double> b);

struct GeometryStats {
  std::vector<double> within;   // pairs sharing a source id
  std::vector<double> between;  // pairs across source ids
  double mean_within = 0.0;
  double mean_between = 0.0;
  std::optional<double> cohens_d;  // empty when undefined
  std::optional<double> bw_ratio;
  std::optional<double> spoke_wb;
  std::vector<std::string> warnings;
};

// Embeddings are L2-normalized first. group_ids drive the centroid ratio;
// is_clean (optional, may be empty) marks clean rows for the spoke ratio.
GeometryStats geometry_stats(const std::vector<std::vector<double>>& embeddings,
                             std::span<const int> source_ids, std::span<const int> group_ids,
                             std::span<const std::uint8_t> is_clean = {});

// Score files: header id,score,main,gen,atk,dom; absent labels are empty.
void save_scores_csv(const ScoredPool& pool, const std::string& path);
ScoredPool load_scores_csv(const std::string& path);

}  // namespace meld::metrics
