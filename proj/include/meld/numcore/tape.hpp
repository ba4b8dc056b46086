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
#include <functional>
#include <initializer_list>
#include <vector>

#include "meld/numcore/tensor.hpp"

namespace meld::num {

// Handle to a value recorded on a Tape.
struct Var {
  std::size_t index = 0;
};

// Reverse-mode tape. Every primitive appends one node holding its forward
// value and, when any input needs a gradient, a closure that pushes the
// node's gradient into its inputs. backward() walks nodes in exact reverse
// order of recording; gradients accumulate additively.
//
// A tape constructed with record=false keeps values only, which is how
// gradient-free forwards (teacher, scoring, finite differences) run.
class Tape {
 public:
  using Backward = std::function<void(Tape&, Var self)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  Var constant(Tensor2 value);
  // Gradient-carrying leaf that refers to caller-owned storage. The tensor
  // must outlive the tape and stay unmodified while the tape is in use.
  Var parameter(const Tensor2& value);
  // Gradient-carrying leaf owning its value.
  Var owned_parameter(Tensor2 value);

  Var push(Tensor2 value, std::initializer_list<Var> inputs, Backward backward);
  Var push(Tensor2 value, const std::vector<Var>& inputs, Backward backward);

  const Tensor2& value(Var v) const;
  bool requires_grad(Var v) const { return nodes_[v.index].requires_grad; }

  // Gradient buffer of v, zero-initialized on first access.
  Tensor2& grad(Var v);
  // Moves the gradient out; zeros of the value's shape if none accumulated.
  Tensor2 take_grad(Var v);

  // Seeds d(root)/d(root) = 1 for a 1x1 root and runs the reverse sweep.
  void backward(Var root);

 private:
  struct Node {
    Tensor2 owned;
    const Tensor2* ref = nullptr;
    Tensor2 grad;
    bool requires_grad = false;
    Backward backward;
  };

  bool any_requires_grad(std::initializer_list<Var> inputs) const;

  bool record_;
  std::vector<Node> nodes_;
};

}  // namespace meld::num
