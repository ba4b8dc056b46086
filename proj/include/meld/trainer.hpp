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
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "meld/attacks.hpp"
#include "meld/common.hpp"
#include "meld/corpus.hpp"
#include "meld/losses.hpp"
#include "meld/model.hpp"

namespace meld::trainer {

using model::ModelDims;
using model::ModelParams;
using num::Tensor2;

struct OptimConfig {
  double lr_peak = 4e-5;
  std::int64_t warmup_steps = 1500;
  std::int64_t total_steps = 3000;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const;
};

struct OptimState {
  OptimConfig config;
  ModelParams m;
  ModelParams v;
  std::int64_t step = 0;

  static OptimState init(const ModelParams& params, const OptimConfig& config);
};

// Linear warmup from 0 to lr_peak, then cosine decay to 0 at total_steps.
// Steps past total_steps give 0.
double lr_at(std::int64_t step, const OptimConfig& config);
inline double lr_at(std::int64_t step, const OptimState& optim) {
  return lr_at(step, optim.config);
}

// One bias-corrected AdamW update. Decay is decoupled and applied first
// (p <- p - lr * wd * p); log_vars are never decayed. Increments optim.step.
void adamw_step(ModelParams& params, const ModelParams& grads, OptimState& optim, double lr);

struct TrainConfig {
  ModelDims dims;
  OptimConfig optim;
  losses::LossWeights weights;
  std::size_t batch_size = 64;
  std::size_t max_seq_len = 512;
  double dropout = 0.1;
  double p_augment = 0.5;
  double ema_beta = 0.999;
  attacks::AttackConfig attack;  // train-time augmentation
  std::int64_t eval_every = 100;
  std::int64_t swa_start = 500;
  std::size_t swa_top_k = 10;
  // Ablation switches. use_aux=false drops the gen/atk/dom losses;
  // use_kendall=false sums task losses with unit weights and freezes s_t.
  bool use_aux = true;
  bool use_kendall = true;
  std::uint64_t seed = 2026;

  void validate() const;
};

struct TrainState {
  ModelParams student;
  model::TeacherState teacher;
  OptimState optim;
  Rng rng;

  // Student from init(dims, seed); the teacher starts as an exact copy.
  static TrainState init(const TrainConfig& config);
};

// Featurized two-view inputs of one step.
struct StepInputs {
  std::vector<model::FeatureSeq> student_view;  // attacked view
  Tensor2 teacher_logits;                       // main head on the clean view
  std::array<std::vector<std::uint8_t>, corpus::kNumTasks> masks;
  std::array<std::vector<int>, corpus::kNumTasks> labels;
};

struct LossParts {
  num::Var total;
  num::Var cls;
  num::Var ema;
  num::Var rank;
  losses::TaskLossArray task;
  bool rank_skipped = false;
};

// Builds the augmented views and runs the tape-free teacher forward.
StepInputs prepare_step(const TrainState& state, const TrainConfig& config,
                        const corpus::Batch& batch, Rng& rng);

// Records the full composite loss of one step on tape, given bound params.
// dropout_rng == nullptr disables dropout.
LossParts compute_step_loss(num::Tape& tape, const model::ParamVars& vars,
                            const StepInputs& inputs, const TrainConfig& config,
                            Rng* dropout_rng);

struct StepDiagnostics {
  std::int64_t step = 0;
  double lr = 0.0;
  // NaN where the task had no labeled rows in the batch.
  std::array<double, corpus::kNumTasks> task_loss{};
  double cls = 0.0;
  double ema = 0.0;
  double rank = 0.0;
  double total = 0.0;
  std::array<double, corpus::kNumTasks> log_vars{};
  bool rank_skipped = false;
  std::optional<double> val_auroc;
};

// augment -> student/teacher forward -> losses -> backward -> AdamW -> EMA.
StepDiagnostics train_step(TrainState& state, const TrainConfig& config,
                           const corpus::Batch& batch);

struct CheckpointRecord {
  std::int64_t step = 0;
  double val_auroc = 0.0;
  ModelParams params;
};

// Bounded best-k store ordered by AUROC descending, then step ascending.
class CheckpointRing {
 public:
  explicit CheckpointRing(std::size_t capacity);

  // Returns false when the record ranks below every kept entry of a full ring.
  bool offer(CheckpointRecord record);
  const std::vector<CheckpointRecord>& entries() const { return entries_; }
  ModelParams average() const;

 private:
  std::size_t capacity_;
  std::vector<CheckpointRecord> entries_;
};

struct TrainResult {
  ModelParams final_params;
  std::vector<StepDiagnostics> diagnostics;
  std::vector<std::pair<std::int64_t, double>> val_history;  // (step, auroc)
  std::vector<std::int64_t> swa_steps;
  std::uint64_t batch_hash = 0;  // FNV over the id sequence of every batch
};

struct TrainData {
  const std::vector<corpus::TextRecord>* train = nullptr;
  corpus::MixtureSpec mixture;
  const std::vector<corpus::TextRecord>* validation = nullptr;
};

using StepCallback = std::function<void(const StepDiagnostics&)>;

// Full training run with periodic validation and SWA over the best
// checkpoints recorded at or after swa_start.
TrainResult run_training(const TrainConfig& config, const TrainData& data,
                         const StepCallback& on_step = {});

double validation_auroc(const ModelParams& params,
                        const std::vector<model::FeatureSeq>& seqs,
                        const std::vector<int>& labels);

void write_diagnostics_header(std::ostream& out);
void write_diagnostics_row(std::ostream& out, const StepDiagnostics& d);

}  // namespace meld::trainer
