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

#include <cstdint>
#include <span>
#include <vector>

#include "meld/common.hpp"
#include "meld/numcore/tape.hpp"

// Differentiable primitives. Each records one node on the tape with an exact
// analytic backward. Shape errors throw meld::Error.
namespace meld::num {

Var matmul(Tape& tape, Var a, Var b);
// x: NxC, bias: 1xC, broadcast over rows.
Var add_bias(Tape& tape, Var x, Var bias);
Var relu(Tape& tape, Var x);
// Inverted dropout; rate 0 returns x unchanged without recording a node.
Var dropout(Tape& tape, Var x, double rate, Rng& rng);
Var softmax_rowwise(Tape& tape, Var x);
Var log_softmax_rowwise(Tape& tape, Var x);
// Mean over the rows of x whose mask entry is nonzero; result is 1xC.
Var masked_mean_rows(Tape& tape, Var x, std::span<const std::uint8_t> mask);
// Row lookup: result row i is table row ids[i].
Var gather_rows(Tape& tape, Var table, std::span<const std::uint32_t> ids);
// Row r of the N x H result is the masked mean of table rows ids[r]; the
// same value as gather_rows followed by masked_mean_rows, without
// materializing the gathered rows.
Var embedding_bag_mean(Tape& tape, Var table,
                       const std::vector<std::span<const std::uint32_t>>& ids,
                       const std::vector<std::span<const std::uint8_t>>& masks);
// Stacks 1xC or RxC blocks vertically.
Var concat_rows(Tape& tape, const std::vector<Var>& parts);

// Elementwise and scalar helpers.
Var add(Tape& tape, Var a, Var b);
Var sub(Tape& tape, Var a, Var b);
Var mul(Tape& tape, Var a, Var b);
Var scale(Tape& tape, Var x, double factor);
Var exp(Tape& tape, Var x);
Var sum(Tape& tape, Var x);  // 1x1
Var mean(Tape& tape, Var x);  // 1x1

// Plain-value helpers shared by the ops and their callers.
Tensor2 softmax_rows(const Tensor2& x);
Tensor2 log_softmax_rows(const Tensor2& x);

}  // namespace meld::num
