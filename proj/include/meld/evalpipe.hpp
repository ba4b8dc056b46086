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
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "meld/corpus.hpp"
#include "meld/metrics.hpp"
#include "meld/model.hpp"
#include "meld/synth.hpp"
#include "meld/trainer.hpp"
#include "json.hpp"

namespace meld::evalpipe {

using nlohmann::json;

enum class Aggregation { Mean, Max };

struct ChunkConfig {
  std::size_t chunk_len = 512;
  std::size_t stride = 0;  // 0 selects chunk_len / 2
  Aggregation aggregation = Aggregation::Mean;

  std::size_t effective_stride() const;
  void validate() const;
};

// Half-open windows [k * stride, k * stride + chunk_len) clipped to length,
// stopping at the first window that reaches the end.
std::vector<std::pair<std::size_t, std::size_t>> chunk_windows(std::size_t length,
                                                               std::size_t chunk_len,
                                                               std::size_t stride);

double chunk_score(const model::ModelParams& params, std::string_view text,
                   const ChunkConfig& chunks, std::vector<double>* pooled_out = nullptr);

metrics::ScoredPool score_pool(const model::ModelParams& params,
                               const std::vector<corpus::TextRecord>& records,
                               const ChunkConfig& chunks, bool capture_embeddings = false);

struct SubsetTpr {
  std::string name;
  std::size_t n_rows = 0;
  double tpr = 0.0;
};

struct BreakdownReport {
  double threshold = 0.0;
  std::vector<SubsetTpr> entries;
  std::vector<std::string> notes;
};

// One threshold from all pool humans, applied to each attack's AI rows.
// AI rows without an attack label count as "none".
BreakdownReport per_attack_report(const metrics::ScoredPool& pool, double fpr,
                                  const std::vector<std::string>& attack_names);
BreakdownReport per_generator_report(const metrics::ScoredPool& pool, double fpr,
                                     const std::vector<std::string>& generator_names);

struct ReportOptions {
  std::string pool_name = "pool";
  std::vector<double> fprs = {0.05, 0.01};
  std::size_t resamples = metrics::kDefaultBootstrapResamples;
  std::uint64_t seed = metrics::kDefaultBootstrapSeed;
};

// {pool, auroc, ci, tpr: {fpr: {value, ci}}, per_attack, per_generator, n_rows}
json build_report(const metrics::ScoredPool& pool, const corpus::LabelSpace& space,
                  const ReportOptions& options);

std::string fpr_key(double fpr);

struct AblationVariant {
  std::string name;
  bool use_aux = true;
  bool use_kendall = true;
  bool use_ema = true;
  bool use_rank = true;

  void apply(trainer::TrainConfig& config) const;
};

// full, dense, no_rank, no_ema, fixed_weights.
std::vector<AblationVariant> ablation_variants();

struct AblationConfig {
  trainer::TrainConfig train;
  synth::SynthSpec synth;
  synth::DeskSizes sizes;
  ChunkConfig chunks;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::size_t resamples = 1000;
  std::uint64_t bootstrap_seed = metrics::kDefaultBootstrapSeed;
};

struct AblationRun {
  std::string variant;
  std::uint64_t seed = 0;
  double auroc = 0.0;
  double tpr5 = 0.0;
  double tpr1 = 0.0;
  std::uint64_t batch_hash = 0;
  double seconds = 0.0;
  metrics::ScoredPool scores;
};

struct AblationComparison {
  std::string variant;
  std::uint64_t seed = 0;
  metrics::PairedDiff tpr5;
  metrics::PairedDiff tpr1;
};

struct AblationResult {
  std::vector<AblationRun> runs;
  std::vector<AblationComparison> comparisons;  // full minus each variant
  bool data_order_shared = true;
  double seconds = 0.0;

  const AblationRun& run(const std::string& variant, std::uint64_t seed) const;
  json to_json() const;
};

using ProgressFn = std::function<void(const std::string&)>;

AblationResult ablation_experiment(const AblationConfig& config,
                                   const ProgressFn& progress = {});
AblationResult ablation_experiment(const AblationConfig& config, const synth::DeskDataset& data,
                                   const ProgressFn& progress = {});

}  // namespace meld::evalpipe
