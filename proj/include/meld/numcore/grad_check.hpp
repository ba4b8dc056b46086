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

#include <functional>
#include <span>
#include <vector>

#include "meld/numcore/tape.hpp"

namespace meld::num {

// Builds a 1x1 scalar on the tape from parameter leaves (one per tensor).
using ScalarFn = std::function<Var(Tape&, std::span<const Var>)>;

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

// Central differences vs. tape gradients over every parameter element.
// Relative error is |a - b| / max(1e-8, |a| + |b|). eps must lie in
// [1e-6, 1e-3]; any non-finite evaluation throws.
GradCheckResult grad_check_detailed(const ScalarFn& f,
                                    std::vector<Tensor2>& params, double eps);

inline double grad_check(const ScalarFn& f, std::vector<Tensor2>& params,
                         double eps) {
  return grad_check_detailed(f, params, eps).max_rel_err;
}

}  // namespace meld::num
