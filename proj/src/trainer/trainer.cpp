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

#include "meld/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "meld/metrics.hpp"

namespace meld::trainer {

using corpus::Task;
using num::Tape;
using num::Var;

void OptimConfig::validate() const {
  if (!(lr_peak >= 0.0)) throw Error("lr_peak must be non-negative");
  if (total_steps < 1) throw Error("total_steps must be positive");
  if (warmup_steps < 0 || warmup_steps > total_steps) {
    throw Error("warmup_steps must lie in [0, total_steps]");
  }
  if (!(weight_decay >= 0.0)) throw Error("weight_decay must be non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw Error("adam betas must lie in [0,1)");
  }
  if (!(eps > 0.0)) throw Error("adam eps must be positive");
}

OptimState OptimState::init(const ModelParams& params, const OptimConfig& config) {
  config.validate();
  OptimState s;
  s.config = config;
  s.m = ModelParams::zeros(params.dims);
  s.v = ModelParams::zeros(params.dims);
  return s;
}

double lr_at(std::int64_t step, const OptimConfig& c) {
  if (step < 0 || step > c.total_steps) return 0.0;
  if (step < c.warmup_steps) {
    return c.lr_peak * static_cast<double>(step) / static_cast<double>(c.warmup_steps);
  }
  if (c.total_steps == c.warmup_steps) return c.lr_peak;
  const double progress = static_cast<double>(step - c.warmup_steps) /
                          static_cast<double>(c.total_steps - c.warmup_steps);
  return c.lr_peak * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void adamw_step(ModelParams& params, const ModelParams& grads, OptimState& optim, double lr) {
  if (!params.same_shape(grads) || !params.same_shape(optim.m) || !params.same_shape(optim.v)) {
    throw Error("adamw_step: shape mismatch");
  }
  auto p = params.blocks();
  auto g = grads.blocks();
  auto m = optim.m.blocks();
  auto v = optim.v.blocks();
  for (std::size_t b = 0; b < ModelParams::kNumBlocks; ++b) {
    if (!g[b]->all_finite()) {
      throw Error(std::string("non-finite gradient in block ") + ModelParams::kBlockNames[b]);
    }
  }
  const OptimConfig& c = optim.config;
  optim.step += 1;
  const double t = static_cast<double>(optim.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  constexpr std::size_t kLogVars = ModelParams::kNumBlocks - 1;
  for (std::size_t b = 0; b < ModelParams::kNumBlocks; ++b) {
    const double shrink = b == kLogVars ? 1.0 : 1.0 - lr * c.weight_decay;
    auto pd = p[b]->data();
    auto gd = g[b]->data();
    auto md = m[b]->data();
    auto vd = v[b]->data();
    for (std::size_t i = 0; i < pd.size(); ++i) {
      pd[i] *= shrink;
      md[i] = c.beta1 * md[i] + (1.0 - c.beta1) * gd[i];
      vd[i] = c.beta2 * vd[i] + (1.0 - c.beta2) * gd[i] * gd[i];
      const double mhat = md[i] / bc1;
      const double vhat = vd[i] / bc2;
      pd[i] -= lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

void TrainConfig::validate() const {
  optim.validate();
  weights.validate();
  attack.validate();
  if (batch_size == 0) throw Error("batch_size must be positive");
  if (max_seq_len == 0) throw Error("max_seq_len must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("dropout must lie in [0,1)");
  if (!(p_augment >= 0.0 && p_augment <= 1.0)) throw Error("p_augment must lie in [0,1]");
  if (!(ema_beta > 0.0 && ema_beta < 1.0)) throw Error("ema_beta must lie in (0,1)");
  if (eval_every < 1) throw Error("eval_every must be positive");
  if (swa_top_k == 0) throw Error("swa_top_k must be positive");
  if (dims.vocab == 0 || dims.hidden == 0) throw Error("vocab and hidden must be positive");
}

TrainState TrainState::init(const TrainConfig& config) {
  TrainState s;
  s.student = ModelParams::init(config.dims, config.seed);
  s.teacher.params = s.student;
  s.teacher.beta = config.ema_beta;
  s.optim = OptimState::init(s.student, config.optim);
  s.rng = Rng(fnv1a64("train", config.seed));
  return s;
}

StepInputs prepare_step(const TrainState& state, const TrainConfig& config,
                        const corpus::Batch& batch, Rng& rng) {
  StepInputs in;
  const std::size_t n = batch.size();
  if (n == 0) throw Error("empty batch");
  std::vector<model::FeatureSeq> clean;
  in.student_view.reserve(n);
  clean.reserve(n);
  for (const auto* rec : batch.records) {
    auto view = attacks::augment_view(rec->text, config.p_augment, config.attack, rng);
    in.student_view.push_back(model::featurize(view.attacked, config.dims.vocab, config.max_seq_len));
    clean.push_back(model::featurize(view.clean, config.dims.vocab, config.max_seq_len));
  }
  if (config.weights.lambda_ema != 0.0) {
    in.teacher_logits = model::main_logits(state.teacher.params, clean);
  }
  in.masks = batch.task_masks;
  in.labels = batch.labels;
  if (!config.use_aux) {
    for (std::size_t t = 1; t < corpus::kNumTasks; ++t) {
      std::fill(in.masks[t].begin(), in.masks[t].end(), std::uint8_t{0});
    }
  }
  return in;
}

LossParts compute_step_loss(Tape& tape, const model::ParamVars& vars, const StepInputs& in,
                            const TrainConfig& config, Rng* dropout_rng) {
  const auto& w = config.weights;
  LossParts parts;
  const double rate = dropout_rng ? config.dropout : 0.0;
  Var pooled = model::encode(tape, vars, in.student_view, rate, dropout_rng);
  Var main = model::head_logits(tape, vars, pooled, Task::Main);
  parts.task[0] = losses::masked_ce(tape, main, in.labels[0], in.masks[0], w.smoothing);
  if (!parts.task[0]) throw Error("batch has no main labels");
  for (std::size_t t = 1; t < corpus::kNumTasks; ++t) {
    const auto& mask = in.masks[t];
    if (std::find(mask.begin(), mask.end(), std::uint8_t{1}) == mask.end()) continue;
    Var logits = model::head_logits(tape, vars, pooled, corpus::kTasks[t]);
    parts.task[t] = losses::masked_ce(tape, logits, in.labels[t], mask, 0.0);
  }
  parts.cls = config.use_kendall ? losses::kendall_combine(tape, parts.task, vars.log_vars())
                                 : losses::fixed_combine(tape, parts.task);
  if (w.lambda_ema != 0.0) {
    Var teacher = tape.constant(in.teacher_logits);
    parts.ema = losses::distill_kl(tape, teacher, main, w.tau_tea, w.tau_stu);
  } else {
    parts.ema = tape.constant(Tensor2(1, 1, 0.0));
  }
  if (w.lambda_rank != 0.0) {
    Var margins = losses::main_margins(tape, main);
    auto r = losses::rank_loss(tape, margins, in.labels[0], w.alpha, w.tau_r);
    parts.rank = r.loss;
    parts.rank_skipped = r.skipped;
  } else {
    parts.rank = tape.constant(Tensor2(1, 1, 0.0));
    parts.rank_skipped = true;
  }
  parts.total = losses::total_loss(tape, parts.cls, parts.ema, parts.rank, w);
  return parts;
}

StepDiagnostics train_step(TrainState& state, const TrainConfig& config,
                           const corpus::Batch& batch) {
  StepInputs inputs = prepare_step(state, config, batch, state.rng);
  Tape tape;
  const model::ParamVars vars = model::bind(tape, state.student);
  const LossParts parts =
      compute_step_loss(tape, vars, inputs, config, config.dropout > 0.0 ? &state.rng : nullptr);
  tape.backward(parts.total);
  const ModelParams grads = model::collect_grads(tape, vars, config.dims);

  StepDiagnostics d;
  for (std::size_t t = 0; t < corpus::kNumTasks; ++t) {
    d.task_loss[t] = parts.task[t] ? tape.value(*parts.task[t])[0]
                                   : std::numeric_limits<double>::quiet_NaN();
  }
  d.cls = tape.value(parts.cls)[0];
  d.ema = tape.value(parts.ema)[0];
  d.rank = tape.value(parts.rank)[0];
  d.total = tape.value(parts.total)[0];
  d.rank_skipped = parts.rank_skipped;

  d.lr = lr_at(state.optim.step + 1, state.optim);
  adamw_step(state.student, grads, state.optim, d.lr);
  model::ema_update(state.teacher, state.student);
  d.step = state.optim.step;
  for (std::size_t t = 0; t < corpus::kNumTasks; ++t) d.log_vars[t] = state.student.log_vars[t];
  return d;
}

CheckpointRing::CheckpointRing(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error("checkpoint ring capacity must be positive");
}

bool CheckpointRing::offer(CheckpointRecord record) {
  auto before = [](const CheckpointRecord& a, const CheckpointRecord& b) {
    if (a.val_auroc != b.val_auroc) return a.val_auroc > b.val_auroc;
    return a.step < b.step;
  };
  auto pos = std::upper_bound(entries_.begin(), entries_.end(), record, before);
  if (entries_.size() == capacity_ && pos == entries_.end()) return false;
  entries_.insert(pos, std::move(record));
  if (entries_.size() > capacity_) entries_.pop_back();
  return true;
}

ModelParams CheckpointRing::average() const {
  std::vector<ModelParams> params;
  params.reserve(entries_.size());
  for (const auto& e : entries_) params.push_back(e.params);
  return model::swa_average(params);
}

double validation_auroc(const ModelParams& params, const std::vector<model::FeatureSeq>& seqs,
                        const std::vector<int>& labels) {
  const auto scores = model::detector_scores(params, seqs);
  return metrics::auroc(scores, labels);
}

TrainResult run_training(const TrainConfig& config, const TrainData& data,
                         const StepCallback& on_step) {
  config.validate();
  if (!data.train || data.train->empty()) throw Error("empty training corpus");
  if (!data.validation || data.validation->empty()) throw Error("empty validation pool");
  std::vector<model::FeatureSeq> val_seqs;
  std::vector<int> val_labels;
  val_seqs.reserve(data.validation->size());
  for (const auto& r : *data.validation) {
    val_seqs.push_back(model::featurize(r.text, config.dims.vocab, config.max_seq_len));
    val_labels.push_back(r.main_label);
  }

  TrainState state = TrainState::init(config);
  corpus::MixtureSampler sampler(*data.train, data.mixture, fnv1a64("sampler", config.seed));
  CheckpointRing ring(config.swa_top_k);
  TrainResult result;
  result.batch_hash = kFnvOffset;
  const std::int64_t total = config.optim.total_steps;
  for (std::int64_t step = 1; step <= total; ++step) {
    const corpus::Batch batch = sampler.sample_batch(config.batch_size);
    for (const auto* r : batch.records) {
      result.batch_hash = fnv1a64(r->id, result.batch_hash);
      result.batch_hash = fnv1a64(std::string_view("\n", 1), result.batch_hash);
    }
    StepDiagnostics d = train_step(state, config, batch);
    if (step % config.eval_every == 0 || step == total) {
      const double auc = validation_auroc(state.student, val_seqs, val_labels);
      d.val_auroc = auc;
      result.val_history.emplace_back(step, auc);
      if (step >= config.swa_start) ring.offer({step, auc, state.student});
    }
    if (on_step) on_step(d);
    result.diagnostics.push_back(d);
  }
  if (ring.entries().empty()) {
    result.final_params = state.student;
  } else {
    for (const auto& e : ring.entries()) result.swa_steps.push_back(e.step);
    result.final_params = ring.average();
  }
  return result;
}

namespace {

void put(std::ostream& out, double v) {
  if (std::isnan(v)) return;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  out << buf;
}

}  // namespace

void write_diagnostics_header(std::ostream& out) {
  out << "step,lr,L_main,L_gen,L_atk,L_dom,L_cls,L_ema,L_rank,L_total,"
         "s_main,s_gen,s_atk,s_dom,val_auroc\n";
}

void write_diagnostics_row(std::ostream& out, const StepDiagnostics& d) {
  out << d.step << ',';
  put(out, d.lr);
  for (double l : d.task_loss) {
    out << ',';
    put(out, l);
  }
  for (double v : {d.cls, d.ema, d.rank, d.total}) {
    out << ',';
    put(out, v);
  }
  for (double s : d.log_vars) {
    out << ',';
    put(out, s);
  }
  out << ',';
  if (d.val_auroc) put(out, *d.val_auroc);
  out << '\n';
}

}  // namespace meld::trainer
