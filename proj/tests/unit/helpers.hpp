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
#include <vector>

#include "meld/common.hpp"
#include "meld/numcore/tensor.hpp"

namespace meld::testing {

inline num::Tensor2 random_tensor(std::size_t rows, std::size_t cols, Rng& rng,
                                  double scale = 1.0) {
  num::Tensor2 t(rows, cols);
  for (double& v : t.data()) v = scale * (2.0 * uniform01(rng) - 1.0);
  return t;
}

}  // namespace meld::testing
