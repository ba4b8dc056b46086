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

#include "meld/numcore/tape.hpp"

#include "meld/common.hpp"

namespace meld::num {

Var Tape::constant(Tensor2 value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

Var Tape::parameter(const Tensor2& value) {
  Node n;
  n.ref = &value;
  n.requires_grad = record_;
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

Var Tape::owned_parameter(Tensor2 value) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = record_;
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

bool Tape::any_requires_grad(std::initializer_list<Var> inputs) const {
  for (Var v : inputs) {
    if (nodes_[v.index].requires_grad) return true;
  }
  return false;
}

Var Tape::push(Tensor2 value, std::initializer_list<Var> inputs,
               Backward backward) {
  Node n;
  n.owned = std::move(value);
  n.requires_grad = record_ && any_requires_grad(inputs);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

Var Tape::push(Tensor2 value, const std::vector<Var>& inputs,
               Backward backward) {
  bool needs = false;
  for (Var v : inputs) needs = needs || nodes_[v.index].requires_grad;
  Node n;
  n.owned = std::move(value);
  n.requires_grad = record_ && needs;
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

const Tensor2& Tape::value(Var v) const {
  const Node& n = nodes_.at(v.index);
  return n.ref ? *n.ref : n.owned;
}

Tensor2& Tape::grad(Var v) {
  Node& n = nodes_.at(v.index);
  if (n.grad.empty()) {
    const Tensor2& val = n.ref ? *n.ref : n.owned;
    n.grad = Tensor2(val.rows(), val.cols());
  }
  return n.grad;
}

Tensor2 Tape::take_grad(Var v) {
  Node& n = nodes_.at(v.index);
  if (n.grad.empty()) {
    const Tensor2& val = n.ref ? *n.ref : n.owned;
    return Tensor2(val.rows(), val.cols());
  }
  return std::move(n.grad);
}

void Tape::backward(Var root) {
  if (!record_) throw Error("backward on a non-recording tape");
  const Tensor2& out = value(root);
  if (out.rows() != 1 || out.cols() != 1) {
    throw Error("backward root must be a 1x1 scalar");
  }
  if (!nodes_[root.index].requires_grad) return;
  grad(root)[0] += 1.0;
  for (std::size_t i = root.index + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.empty()) continue;
    n.backward(*this, Var{i});
  }
}

}  // namespace meld::num
