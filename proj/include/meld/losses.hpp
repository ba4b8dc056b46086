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
#include <optional>
#include <span>
#include <vector>

#include "meld/corpus.hpp"
#include "meld/numcore/tape.hpp"

namespace meld::losses {

using num::Tape;
using num::Tensor2;
using num::Var;

struct LossWeights {
  double lambda_ema = 1.0;
  double lambda_rank = 0.5;
  double tau_tea = 0.04;
  double tau_stu = 0.10;
  double tau_r = 0.5;
  double alpha = 0.05;
  double smoothing = 0.05;

  void validate() const;
};

using TaskLossArray = std::array<std::optional<Var>, corpus::kNumTasks>;

// Mean cross-entropy over rows whose mask bit is set, against targets with
// 1 - smoothing on the true class and smoothing / (C - 1) elsewhere.
// Returns nullopt when no row is selected (the task is absent this batch).
std::optional<Var> masked_ce(Tape& tape, Var logits, std::span<const int> labels,
                             std::span<const std::uint8_t> mask, double smoothing);

// sum over present tasks of exp(-s_t) * L_t + s_t / 2. Absent tasks add
// neither term. log_vars is 1x4 in task order.
Var kendall_combine(Tape& tape, const TaskLossArray& task_losses, Var log_vars);
// Unit-weight sum of the present task losses (uncertainty weighting off).
Var fixed_combine(Tape& tape, const TaskLossArray& task_losses);

// Row-mean KL(softmax(z_T / tau_tea) || softmax(z_S / tau_stu)), computed in
// log space. No gradient ever reaches teacher_logits.
Var distill_kl(Tape& tape, Var teacher_logits, Var student_logits, double tau_tea,
               double tau_stu);

// m_i = z_AI - z_Human per row of an N x 2 logit matrix (N x 1 result).
Var main_margins(Tape& tape, Var main_logits);

// Top-K human rows by margin, K = ceil(alpha * N_human); ties go to the
// lower index. Sorted by descending margin.
std::vector<std::size_t> hard_human_indices(std::span<const double> margins,
                                            std::span<const int> main_labels, double alpha);

struct RankResult {
  Var loss;
  bool skipped = false;
  std::vector<std::size_t> hard_humans;
};

// Mean over AI rows i and hard humans j of log(1 + exp((m_j - m_i) / tau_r)).
// With no AI or no human rows the loss is a zero constant and skipped is set.
RankResult rank_loss(Tape& tape, Var margins, std::span<const int> main_labels,
                     double alpha, double tau_r);

Var total_loss(Tape& tape, Var cls, Var ema, Var rank, const LossWeights& w);
double total_loss(double cls, double ema, double rank, const LossWeights& w);

// log(1 + e^x) without overflow.
double softplus(double x);

}  // namespace meld::losses
