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
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "meld/common.hpp"
#include "meld/corpus.hpp"
#include "meld/numcore/ops.hpp"
#include "meld/numcore/tape.hpp"
#include "meld/numcore/tensor.hpp"

namespace meld::model {

using num::Tape;
using num::Tensor2;
using num::Var;
using corpus::Task;

inline constexpr std::size_t kNoTruncation = std::numeric_limits<std::size_t>::max();

struct FeatureSeq {
  std::vector<std::uint32_t> ids;
  std::vector<std::uint8_t> mask;

  std::size_t size() const { return ids.size(); }
};

// Byte 3-grams hashed with FNV-1a 64 modulo vocab, truncated to
// max_seq_len. Texts shorter than three bytes are zero-padded to a single
// 3-gram. Throws on empty text.
FeatureSeq featurize(std::string_view text, std::size_t vocab,
                     std::size_t max_seq_len = kNoTruncation);

struct ModelDims {
  std::size_t vocab = 32768;
  std::size_t hidden = 64;
  std::size_t generators = 104;
  std::size_t attacks = 17;
  std::size_t domains = 59;

  std::size_t classes(Task t) const;
  bool operator==(const ModelDims&) const = default;
};

// Parameter blocks in checkpoint order. log_vars holds the per-task
// log-variances (main, gen, atk, dom) as a 1x4 row.
struct ModelParams {
  static constexpr std::size_t kNumBlocks = 16;
  static const std::array<const char*, kNumBlocks> kBlockNames;

  ModelDims dims;
  Tensor2 embedding;             // V x H
  Tensor2 trunk1_w, trunk1_b;    // H x H, 1 x H
  Tensor2 trunk2_w, trunk2_b;    // H x H, 1 x H
  Tensor2 main1_w, main1_b;      // H x H, 1 x H
  Tensor2 main2_w, main2_b;      // H x 2, 1 x 2
  Tensor2 gen_w, gen_b;          // H x G, 1 x G
  Tensor2 atk_w, atk_b;          // H x A, 1 x A
  Tensor2 dom_w, dom_b;          // H x D, 1 x D
  Tensor2 log_vars;              // 1 x 4

  static ModelParams zeros(const ModelDims& dims);
  // Gaussian embedding, He-scaled dense weights, zero biases and log_vars.
  static ModelParams init(const ModelDims& dims, std::uint64_t seed);

  std::array<Tensor2*, kNumBlocks> blocks();
  std::array<const Tensor2*, kNumBlocks> blocks() const;
  bool same_shape(const ModelParams& other) const;
  bool all_finite() const;
  std::size_t parameter_count() const;
  // FNV-1a over the little-endian bytes of every block.
  std::uint64_t hash() const;

  bool operator==(const ModelParams& other) const;
};

// Tape handles for every parameter block, in ModelParams block order.
struct ParamVars {
  std::array<Var, ModelParams::kNumBlocks> v;

  Var embedding() const { return v[0]; }
  Var trunk1_w() const { return v[1]; }
  Var trunk1_b() const { return v[2]; }
  Var trunk2_w() const { return v[3]; }
  Var trunk2_b() const { return v[4]; }
  Var main1_w() const { return v[5]; }
  Var main1_b() const { return v[6]; }
  Var main2_w() const { return v[7]; }
  Var main2_b() const { return v[8]; }
  Var gen_w() const { return v[9]; }
  Var gen_b() const { return v[10]; }
  Var atk_w() const { return v[11]; }
  Var atk_b() const { return v[12]; }
  Var dom_w() const { return v[13]; }
  Var dom_b() const { return v[14]; }
  Var log_vars() const { return v[15]; }
};

ParamVars bind(Tape& tape, const ModelParams& params);
ParamVars bind(std::span<const Var> vars);
// Collects gradients of every block after tape.backward().
ModelParams collect_grads(Tape& tape, const ParamVars& vars, const ModelDims& dims);

// Pooled representation for a batch of sequences (N x H): embedding lookup,
// masked mean over positions, then two dense ReLU layers with dropout.
// rng may be null when dropout_rate is 0.
Var encode(Tape& tape, const ParamVars& params, std::span<const FeatureSeq> seqs,
           double dropout_rate, Rng* rng);

// Logits for one head: the main head is a two-layer MLP, others are linear.
Var head_logits(Tape& tape, const ParamVars& params, Var pooled, Task task);

// Inference score: softmax(main logits)[AI] per sequence. Only the main head
// is evaluated.
std::vector<double> detector_scores(const ModelParams& params,
                                    std::span<const FeatureSeq> seqs);
// Main-head logits (N x 2) and optionally the pooled embeddings, no tape.
Tensor2 main_logits(const ModelParams& params, std::span<const FeatureSeq> seqs,
                    Tensor2* pooled_out = nullptr);

struct TeacherState {
  ModelParams params;
  double beta = 0.999;
};

// teacher <- beta * teacher + (1 - beta) * student, every block.
void ema_update(TeacherState& teacher, const ModelParams& student);

// Elementwise mean of all checkpoints; throws on an empty list.
ModelParams swa_average(std::span<const ModelParams> checkpoints);

// Binary format: "MELD", version byte, five little-endian uint64 dims
// (vocab, hidden, generators, attacks, domains), then every block's
// little-endian float64 values in block order.
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);
std::string serialize_checkpoint(const ModelParams& params);
ModelParams deserialize_checkpoint(std::string_view bytes);

}  // namespace meld::model
