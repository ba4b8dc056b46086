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

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "meld/model.hpp"

namespace meld::model {

const std::array<const char*, ModelParams::kNumBlocks> ModelParams::kBlockNames = {
    "embedding", "trunk1_w", "trunk1_b", "trunk2_w", "trunk2_b", "main1_w",
    "main1_b",   "main2_w",  "main2_b",  "gen_w",    "gen_b",    "atk_w",
    "atk_b",     "dom_w",    "dom_b",    "log_vars"};

FeatureSeq featurize(std::string_view text, std::size_t vocab, std::size_t max_seq_len) {
  if (text.empty()) throw Error("featurize: empty text");
  if (vocab == 0) throw Error("featurize: vocab must be positive");
  if (max_seq_len == 0) throw Error("featurize: max_seq_len must be positive");
  FeatureSeq seq;
  auto push = [&](std::string_view gram) {
    seq.ids.push_back(static_cast<std::uint32_t>(fnv1a64(gram) % vocab));
  };
  if (text.size() < 3) {
    char padded[3] = {0, 0, 0};
    for (std::size_t i = 0; i < text.size(); ++i) padded[i] = text[i];
    push(std::string_view(padded, 3));
  } else {
    const std::size_t n = std::min(text.size() - 2, max_seq_len);
    seq.ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) push(text.substr(i, 3));
  }
  seq.mask.assign(seq.ids.size(), 1);
  return seq;
}

std::size_t ModelDims::classes(Task t) const {
  switch (t) {
    case Task::Main: return 2;
    case Task::Gen: return generators;
    case Task::Atk: return attacks;
    case Task::Dom: return domains;
  }
  return 0;
}

ModelParams ModelParams::zeros(const ModelDims& d) {
  if (d.vocab == 0 || d.hidden == 0 || d.generators == 0 || d.attacks == 0 || d.domains == 0) {
    throw Error("model dimensions must be positive");
  }
  ModelParams p;
  p.dims = d;
  const std::size_t H = d.hidden;
  p.embedding = Tensor2(d.vocab, H);
  p.trunk1_w = Tensor2(H, H);
  p.trunk1_b = Tensor2(1, H);
  p.trunk2_w = Tensor2(H, H);
  p.trunk2_b = Tensor2(1, H);
  p.main1_w = Tensor2(H, H);
  p.main1_b = Tensor2(1, H);
  p.main2_w = Tensor2(H, 2);
  p.main2_b = Tensor2(1, 2);
  p.gen_w = Tensor2(H, d.generators);
  p.gen_b = Tensor2(1, d.generators);
  p.atk_w = Tensor2(H, d.attacks);
  p.atk_b = Tensor2(1, d.attacks);
  p.dom_w = Tensor2(H, d.domains);
  p.dom_b = Tensor2(1, d.domains);
  p.log_vars = Tensor2(1, 4);
  return p;
}

ModelParams ModelParams::init(const ModelDims& d, std::uint64_t seed) {
  ModelParams p = zeros(d);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill = [&](Tensor2& t, double stddev) {
    for (double& v : t.data()) v = normal(rng) * stddev;
  };
  const double he = std::sqrt(2.0 / static_cast<double>(d.hidden));
  const double lin = std::sqrt(1.0 / static_cast<double>(d.hidden));
  fill(p.embedding, 1.0);
  fill(p.trunk1_w, he);
  fill(p.trunk2_w, he);
  fill(p.main1_w, he);
  fill(p.main2_w, lin);
  fill(p.gen_w, lin);
  fill(p.atk_w, lin);
  fill(p.dom_w, lin);
  return p;
}

std::array<Tensor2*, ModelParams::kNumBlocks> ModelParams::blocks() {
  return {&embedding, &trunk1_w, &trunk1_b, &trunk2_w, &trunk2_b, &main1_w,
          &main1_b,   &main2_w,  &main2_b,  &gen_w,    &gen_b,    &atk_w,
          &atk_b,     &dom_w,    &dom_b,    &log_vars};
}

std::array<const Tensor2*, ModelParams::kNumBlocks> ModelParams::blocks() const {
  return {&embedding, &trunk1_w, &trunk1_b, &trunk2_w, &trunk2_b, &main1_w,
          &main1_b,   &main2_w,  &main2_b,  &gen_w,    &gen_b,    &atk_w,
          &atk_b,     &dom_w,    &dom_b,    &log_vars};
}

bool ModelParams::same_shape(const ModelParams& other) const {
  auto a = blocks();
  auto b = other.blocks();
  for (std::size_t i = 0; i < kNumBlocks; ++i) {
    if (!a[i]->same_shape(*b[i])) return false;
  }
  return true;
}

bool ModelParams::all_finite() const {
  for (const Tensor2* t : blocks()) {
    if (!t->all_finite()) return false;
  }
  return true;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor2* t : blocks()) n += t->size();
  return n;
}

std::uint64_t ModelParams::hash() const {
  std::uint64_t h = kFnvOffset;
  for (const Tensor2* t : blocks()) {
    for (double v : t->data()) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      for (int b = 0; b < 8; ++b) {
        h ^= (bits >> (8 * b)) & 0xFF;
        h *= kFnvPrime;
      }
    }
  }
  return h;
}

bool ModelParams::operator==(const ModelParams& other) const {
  if (!(dims == other.dims)) return false;
  auto a = blocks();
  auto b = other.blocks();
  for (std::size_t i = 0; i < kNumBlocks; ++i) {
    if (!(*a[i] == *b[i])) return false;
  }
  return true;
}

ParamVars bind(Tape& tape, const ModelParams& params) {
  ParamVars pv;
  auto blocks = params.blocks();
  for (std::size_t i = 0; i < ModelParams::kNumBlocks; ++i) {
    pv.v[i] = tape.parameter(*blocks[i]);
  }
  return pv;
}

ParamVars bind(std::span<const Var> vars) {
  if (vars.size() != ModelParams::kNumBlocks) throw Error("bind: wrong number of parameter vars");
  ParamVars pv;
  for (std::size_t i = 0; i < ModelParams::kNumBlocks; ++i) pv.v[i] = vars[i];
  return pv;
}

ModelParams collect_grads(Tape& tape, const ParamVars& vars, const ModelDims& dims) {
  ModelParams g;
  g.dims = dims;
  auto blocks = g.blocks();
  for (std::size_t i = 0; i < ModelParams::kNumBlocks; ++i) {
    *blocks[i] = tape.take_grad(vars.v[i]);
  }
  return g;
}

Var encode(Tape& tape, const ParamVars& params, std::span<const FeatureSeq> seqs,
           double dropout_rate, Rng* rng) {
  if (seqs.empty()) throw Error("encode: empty batch");
  if (dropout_rate > 0.0 && rng == nullptr) throw Error("encode: dropout needs an rng");
  std::vector<std::span<const std::uint32_t>> ids;
  std::vector<std::span<const std::uint8_t>> masks;
  ids.reserve(seqs.size());
  masks.reserve(seqs.size());
  for (const auto& seq : seqs) {
    if (seq.ids.size() != seq.mask.size()) throw Error("encode: ids/mask length mismatch");
    ids.emplace_back(seq.ids);
    masks.emplace_back(seq.mask);
  }
  Var x = num::embedding_bag_mean(tape, params.embedding(), ids, masks);
  x = num::relu(tape, num::add_bias(tape, num::matmul(tape, x, params.trunk1_w()), params.trunk1_b()));
  if (dropout_rate > 0.0) x = num::dropout(tape, x, dropout_rate, *rng);
  x = num::relu(tape, num::add_bias(tape, num::matmul(tape, x, params.trunk2_w()), params.trunk2_b()));
  if (dropout_rate > 0.0) x = num::dropout(tape, x, dropout_rate, *rng);
  return x;
}

Var head_logits(Tape& tape, const ParamVars& params, Var pooled, Task task) {
  switch (task) {
    case Task::Main: {
      Var h = num::relu(
          tape, num::add_bias(tape, num::matmul(tape, pooled, params.main1_w()), params.main1_b()));
      return num::add_bias(tape, num::matmul(tape, h, params.main2_w()), params.main2_b());
    }
    case Task::Gen:
      return num::add_bias(tape, num::matmul(tape, pooled, params.gen_w()), params.gen_b());
    case Task::Atk:
      return num::add_bias(tape, num::matmul(tape, pooled, params.atk_w()), params.atk_b());
    case Task::Dom:
      return num::add_bias(tape, num::matmul(tape, pooled, params.dom_w()), params.dom_b());
  }
  throw Error("head_logits: unknown task");
}

Tensor2 main_logits(const ModelParams& params, std::span<const FeatureSeq> seqs,
                    Tensor2* pooled_out) {
  Tape tape(false);
  ParamVars pv = bind(tape, params);
  Var pooled = encode(tape, pv, seqs, 0.0, nullptr);
  if (pooled_out) *pooled_out = tape.value(pooled);
  return tape.value(head_logits(tape, pv, pooled, Task::Main));
}

std::vector<double> detector_scores(const ModelParams& params,
                                    std::span<const FeatureSeq> seqs) {
  // Fixed-size blocks bound memory; each block writes its own slots.
  constexpr std::size_t kBlock = 32;
  std::vector<double> scores(seqs.size());
  const std::size_t blocks = (seqs.size() + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(seqs.size(), lo + kBlock);
    const Tensor2 probs = num::softmax_rows(main_logits(params, seqs.subspan(lo, hi - lo)));
    for (std::size_t i = 0; i < probs.rows(); ++i) scores[lo + i] = probs(i, corpus::kAI);
  });
  return scores;
}

void ema_update(TeacherState& teacher, const ModelParams& student) {
  if (!(teacher.beta >= 0.0 && teacher.beta < 1.0)) throw Error("ema beta must lie in [0,1)");
  if (!teacher.params.same_shape(student)) throw Error("ema_update: shape mismatch");
  const double beta = teacher.beta;
  auto dst = teacher.params.blocks();
  auto src = student.blocks();
  for (std::size_t b = 0; b < ModelParams::kNumBlocks; ++b) {
    auto out = dst[b]->data();
    auto in = src[b]->data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = beta * out[i] + (1.0 - beta) * in[i];
  }
}

ModelParams swa_average(std::span<const ModelParams> checkpoints) {
  if (checkpoints.empty()) throw Error("swa_average: no checkpoints");
  ModelParams avg = ModelParams::zeros(checkpoints.front().dims);
  for (const auto& c : checkpoints) {
    if (!c.same_shape(avg)) throw Error("swa_average: shape mismatch");
  }
  const double n = static_cast<double>(checkpoints.size());
  auto dst = avg.blocks();
  std::vector<double> vals(checkpoints.size());
  for (std::size_t b = 0; b < ModelParams::kNumBlocks; ++b) {
    std::vector<const double*> srcs;
    for (const auto& c : checkpoints) srcs.push_back(c.blocks()[b]->data().data());
    auto out = dst[b]->data();
    for (std::size_t i = 0; i < out.size(); ++i) {
      // Summing in sorted order makes the mean independent of checkpoint order.
      for (std::size_t k = 0; k < srcs.size(); ++k) vals[k] = srcs[k][i];
      std::sort(vals.begin(), vals.end());
      double s = 0.0;
      for (double v : vals) s += v;
      out[i] = s / n;
    }
  }
  return avg;
}

}  // namespace meld::model
