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

#include "meld/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "meld/numcore/ops.hpp"

namespace meld::losses {

void LossWeights::validate() const {
  if (!(tau_tea > 0.0 && tau_stu > 0.0 && tau_r > 0.0)) throw Error("temperatures must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("alpha must lie in (0,1]");
  if (!(smoothing >= 0.0 && smoothing < 0.5)) throw Error("smoothing must lie in [0,0.5)");
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

namespace {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::optional<Var> masked_ce(Tape& tape, Var logits, std::span<const int> labels,
                             std::span<const std::uint8_t> mask, double smoothing) {
  const Tensor2& Z = tape.value(logits);
  const std::size_t C = Z.cols();
  if (C < 2) throw Error("masked_ce needs at least two classes");
  if (labels.size() != Z.rows() || mask.size() != Z.rows()) throw Error("masked_ce: length mismatch");
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < Z.rows(); ++r) {
    if (!mask[r]) continue;
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= C) {
      throw Error("masked_ce: label out of range");
    }
    rows.push_back(r);
  }
  if (rows.empty()) return std::nullopt;
  const double on = 1.0 - smoothing;
  const double off = smoothing / static_cast<double>(C - 1);
  const Tensor2 logp = num::log_softmax_rows(Z);
  double total = 0.0;
  for (std::size_t r : rows) {
    for (std::size_t c = 0; c < C; ++c) {
      const double target = static_cast<int>(c) == labels[r] ? on : off;
      if (target != 0.0) total -= target * logp(r, c);
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  std::vector<int> lab(labels.begin(), labels.end());
  return tape.push(
      Tensor2(1, 1, total * inv), {logits},
      [logits, rows = std::move(rows), lab = std::move(lab), logp, on, off, inv](Tape& t, Var self) {
        const double g = t.grad(self)[0] * inv;
        Tensor2& gz = t.grad(logits);
        for (std::size_t r : rows) {
          for (std::size_t c = 0; c < logp.cols(); ++c) {
            const double target = static_cast<int>(c) == lab[r] ? on : off;
            gz(r, c) += g * (std::exp(logp(r, c)) - target);
          }
        }
      });
}

Var kendall_combine(Tape& tape, const TaskLossArray& task_losses, Var log_vars) {
  const Tensor2& S = tape.value(log_vars);
  if (S.size() != corpus::kNumTasks) throw Error("kendall_combine: expected 4 log-variances");
  if (!S.all_finite()) throw Error("kendall_combine: non-finite log-variance");
  if (!task_losses[0]) throw Error("kendall_combine: main task loss is required");
  double total = 0.0;
  std::vector<Var> inputs = {log_vars};
  std::array<double, corpus::kNumTasks> loss_val{};
  for (std::size_t t = 0; t < corpus::kNumTasks; ++t) {
    if (!task_losses[t]) continue;
    loss_val[t] = tape.value(*task_losses[t])[0];
    total += std::exp(-S[t]) * loss_val[t] + 0.5 * S[t];
    inputs.push_back(*task_losses[t]);
  }
  return tape.push(Tensor2(1, 1, total), inputs,
                   [task_losses, log_vars, loss_val](Tape& t, Var self) {
                     const double g = t.grad(self)[0];
                     const Tensor2& Sv = t.value(log_vars);
                     const bool s_grad = t.requires_grad(log_vars);
                     for (std::size_t k = 0; k < corpus::kNumTasks; ++k) {
                       if (!task_losses[k]) continue;
                       const double precision = std::exp(-Sv[k]);
                       if (t.requires_grad(*task_losses[k])) {
                         t.grad(*task_losses[k])[0] += g * precision;
                       }
                       if (s_grad) t.grad(log_vars)[k] += g * (0.5 - precision * loss_val[k]);
                     }
                   });
}

Var fixed_combine(Tape& tape, const TaskLossArray& task_losses) {
  if (!task_losses[0]) throw Error("fixed_combine: main task loss is required");
  Var total = *task_losses[0];
  for (std::size_t t = 1; t < corpus::kNumTasks; ++t) {
    if (task_losses[t]) total = num::add(tape, total, *task_losses[t]);
  }
  return total;
}

Var distill_kl(Tape& tape, Var teacher_logits, Var student_logits, double tau_tea,
               double tau_stu) {
  if (!(tau_tea > 0.0 && tau_stu > 0.0)) throw Error("distill_kl: temperatures must be positive");
  const Tensor2& ZT = tape.value(teacher_logits);
  const Tensor2& ZS = tape.value(student_logits);
  if (!ZT.same_shape(ZS) || ZT.rows() == 0) throw Error("distill_kl: shape mismatch");
  Tensor2 t_scaled = ZT, s_scaled = ZS;
  for (double& v : t_scaled.data()) v /= tau_tea;
  for (double& v : s_scaled.data()) v /= tau_stu;
  const Tensor2 log_pt = num::log_softmax_rows(t_scaled);
  const Tensor2 log_ps = num::log_softmax_rows(s_scaled);
  double total = 0.0;
  for (std::size_t i = 0; i < log_pt.size(); ++i) {
    const double pt = std::exp(log_pt[i]);
    if (pt > 0.0) total += pt * (log_pt[i] - log_ps[i]);
  }
  const double inv_n = 1.0 / static_cast<double>(ZT.rows());
  return tape.push(Tensor2(1, 1, total * inv_n), {student_logits},
                   [student_logits, log_pt, log_ps, inv_n, tau_stu](Tape& t, Var self) {
                     const double g = t.grad(self)[0] * inv_n / tau_stu;
                     Tensor2& gs = t.grad(student_logits);
                     for (std::size_t i = 0; i < log_pt.size(); ++i) {
                       gs[i] += g * (std::exp(log_ps[i]) - std::exp(log_pt[i]));
                     }
                   });
}

Var main_margins(Tape& tape, Var main_logits) {
  const Tensor2& Z = tape.value(main_logits);
  if (Z.cols() != 2) throw Error("main_margins: expected N x 2 logits");
  Tensor2 m(Z.rows(), 1);
  for (std::size_t r = 0; r < Z.rows(); ++r) m[r] = Z(r, corpus::kAI) - Z(r, corpus::kHuman);
  return tape.push(std::move(m), {main_logits}, [main_logits](Tape& t, Var self) {
    const Tensor2& g = t.grad(self);
    Tensor2& gz = t.grad(main_logits);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      gz(r, corpus::kAI) += g[r];
      gz(r, corpus::kHuman) -= g[r];
    }
  });
}

std::vector<std::size_t> hard_human_indices(std::span<const double> margins,
                                            std::span<const int> main_labels, double alpha) {
  if (margins.size() != main_labels.size()) throw Error("hard_human_indices: length mismatch");
  std::vector<std::size_t> humans;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    if (main_labels[i] == corpus::kHuman) humans.push_back(i);
  }
  if (humans.empty()) return {};
  const double exact = alpha * static_cast<double>(humans.size());
  std::size_t k = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  k = std::clamp<std::size_t>(k, 1, humans.size());
  std::partial_sort(humans.begin(), humans.begin() + static_cast<std::ptrdiff_t>(k), humans.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (margins[a] != margins[b]) return margins[a] > margins[b];
                      return a < b;
                    });
  humans.resize(k);
  return humans;
}

RankResult rank_loss(Tape& tape, Var margins, std::span<const int> main_labels, double alpha,
                     double tau_r) {
  if (!(tau_r > 0.0)) throw Error("rank_loss: tau_r must be positive");
  const Tensor2& M = tape.value(margins);
  if (M.size() != main_labels.size()) throw Error("rank_loss: length mismatch");
  std::vector<std::size_t> ai;
  for (std::size_t i = 0; i < main_labels.size(); ++i) {
    if (main_labels[i] == corpus::kAI) ai.push_back(i);
  }
  RankResult result;
  result.hard_humans = hard_human_indices(M.data(), main_labels, alpha);
  if (ai.empty() || result.hard_humans.empty()) {
    result.skipped = true;
    result.loss = tape.constant(Tensor2(1, 1, 0.0));
    return result;
  }
  const double inv = 1.0 / static_cast<double>(ai.size() * result.hard_humans.size());
  double total = 0.0;
  for (std::size_t i : ai) {
    for (std::size_t j : result.hard_humans) total += softplus((M[j] - M[i]) / tau_r);
  }
  result.loss = tape.push(Tensor2(1, 1, total * inv), {margins},
                          [margins, ai, hard = result.hard_humans, inv, tau_r](Tape& t, Var self) {
                            const double g = t.grad(self)[0] * inv / tau_r;
                            const Tensor2& Mv = t.value(margins);
                            Tensor2& gm = t.grad(margins);
                            for (std::size_t i : ai) {
                              for (std::size_t j : hard) {
                                const double s = sigmoid((Mv[j] - Mv[i]) / tau_r);
                                gm[j] += g * s;
                                gm[i] -= g * s;
                              }
                            }
                          });
  return result;
}

Var total_loss(Tape& tape, Var cls, Var ema, Var rank, const LossWeights& w) {
  Var out = cls;
  if (w.lambda_ema != 0.0) out = num::add(tape, out, num::scale(tape, ema, w.lambda_ema));
  if (w.lambda_rank != 0.0) out = num::add(tape, out, num::scale(tape, rank, w.lambda_rank));
  return out;
}

double total_loss(double cls, double ema, double rank, const LossWeights& w) {
  return cls + w.lambda_ema * ema + w.lambda_rank * rank;
}

}  // namespace meld::losses
