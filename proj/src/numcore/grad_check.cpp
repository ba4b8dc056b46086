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

#include "meld/numcore/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "meld/common.hpp"

namespace meld::num {
namespace {

double evaluate(const ScalarFn& f, const std::vector<Tensor2>& params) {
  Tape tape(false);
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(tape.parameter(p));
  const Tensor2& out = tape.value(f(tape, vars));
  if (out.size() != 1) throw Error("grad_check: function is not scalar");
  if (!std::isfinite(out[0])) throw Error("grad_check: non-finite value");
  return out[0];
}

}  // namespace

GradCheckResult grad_check_detailed(const ScalarFn& f,
                                    std::vector<Tensor2>& params, double eps) {
  if (!(eps >= 1e-6 && eps <= 1e-3)) {
    throw Error("grad_check: eps must lie in [1e-6, 1e-3]");
  }
  std::vector<Tensor2> analytic;
  {
    Tape tape(true);
    std::vector<Var> vars;
    for (const auto& p : params) vars.push_back(tape.parameter(p));
    Var out = f(tape, vars);
    if (!std::isfinite(tape.value(out)[0])) {
      throw Error("grad_check: non-finite value");
    }
    tape.backward(out);
    for (Var v : vars) analytic.push_back(tape.take_grad(v));
  }

  GradCheckResult result;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (std::size_t i = 0; i < params[k].size(); ++i) {
      const double saved = params[k][i];
      params[k][i] = saved + eps;
      const double up = evaluate(f, params);
      params[k][i] = saved - eps;
      const double down = evaluate(f, params);
      params[k][i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[k][i];
      const double rel =
          std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      if (rel > result.max_rel_err) {
        result = {rel, k, i, a, numeric};
      }
    }
  }
  return result;
}

}  // namespace meld::num
