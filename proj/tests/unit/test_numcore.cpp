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

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "meld/numcore/grad_check.hpp"
#include "meld/numcore/ops.hpp"

using namespace meld;
using namespace meld::num;
using meld::testing::random_tensor;

namespace {

// Weighted sum with fixed pseudo-random weights so every output element
// carries a distinct gradient.
Var weighted_sum(Tape& t, Var x) {
  const Tensor2& v = t.value(x);
  Tensor2 w(v.rows(), v.cols());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::sin(1.0 + 0.7 * static_cast<double>(i));
  return sum(t, mul(t, x, t.constant(std::move(w))));
}

}  // namespace

TEST_CASE("tensor basics") {
  Tensor2 t(2, 3, 1.5);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t.size() == 6);
  t(1, 2) = 4.0;
  CHECK(t[5] == 4.0);
  CHECK(t.row(1)[2] == 4.0);
  CHECK(t.all_finite());
  t[0] = std::nan("");
  CHECK_FALSE(t.all_finite());
  CHECK_THROWS(Tensor2(2, 2, std::vector<double>{1.0, 2.0}));
}

TEST_CASE("softmax of equal logits is uniform") {
  Tape tape;
  Var x = tape.constant(Tensor2(1, 2, std::vector<double>{0.0, 0.0}));
  const Tensor2& y = tape.value(softmax_rowwise(tape, x));
  CHECK(y[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("softmax rows sum to one and log_softmax matches log of softmax") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor2 x = random_tensor(5, 7, rng, 30.0);
    const Tensor2 p = softmax_rows(x);
    const Tensor2 lp = log_softmax_rows(x);
    for (std::size_t r = 0; r < 5; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < 7; ++c) {
        s += p(r, c);
        if (p(r, c) > 1e-300) CHECK(std::abs(lp(r, c) - std::log(p(r, c))) < 1e-12);
      }
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("log_softmax stays finite for extreme logits") {
  Tensor2 x(1, 2, std::vector<double>{1000.0, -1000.0});
  const Tensor2 lp = log_softmax_rows(x);
  CHECK(lp.all_finite());
  CHECK(lp[0] == doctest::Approx(0.0));
  CHECK(lp[1] == doctest::Approx(-2000.0));
}

TEST_CASE("shape mismatches throw") {
  Tape tape;
  Var a = tape.constant(Tensor2(2, 3));
  Var b = tape.constant(Tensor2(2, 3));
  Var c = tape.constant(Tensor2(3, 2));
  CHECK_THROWS_WITH(matmul(tape, a, b), doctest::Contains("shape mismatch"));
  CHECK_THROWS_WITH(add(tape, a, c), doctest::Contains("shape mismatch"));
  CHECK_THROWS(add_bias(tape, a, tape.constant(Tensor2(1, 2))));
  CHECK_NOTHROW(matmul(tape, a, c));
}

TEST_CASE("masked mean rejects an all-zero mask") {
  Tape tape;
  Var x = tape.constant(Tensor2(3, 2, 1.0));
  const std::vector<std::uint8_t> none = {0, 0, 0};
  CHECK_THROWS_WITH(masked_mean_rows(tape, x, none), doctest::Contains("all-zero mask"));
  const std::vector<std::uint8_t> some = {1, 0, 1};
  CHECK(tape.value(masked_mean_rows(tape, x, some))[0] == 1.0);
}

TEST_CASE("dropout with rate zero is the identity and inverted otherwise") {
  Rng rng(3);
  Tape tape;
  Var x = tape.constant(Tensor2(40, 50, 2.0));
  Var same = dropout(tape, x, 0.0, rng);
  CHECK(same.index == x.index);
  const Tensor2& y = tape.value(dropout(tape, x, 0.25, rng));
  double total = 0.0;
  for (double v : y.data()) {
    CHECK((v == 0.0 || std::abs(v - 2.0 / 0.75) < 1e-12));
    total += v;
  }
  // E[y] = x under inverted scaling.
  CHECK(total / static_cast<double>(y.size()) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("every primitive passes a finite-difference check") {
  Rng rng(5);
  const std::vector<std::uint8_t> mask = {1, 0, 1, 1};
  const std::vector<std::uint32_t> ids = {2, 0, 2, 1, 3};

  struct Case {
    const char* name;
    ScalarFn f;
    std::vector<Tensor2> params;
  };
  std::vector<Case> cases;
  cases.push_back({"matmul",
                   [](Tape& t, std::span<const Var> v) { return weighted_sum(t, matmul(t, v[0], v[1])); },
                   {random_tensor(3, 4, rng), random_tensor(4, 2, rng)}});
  cases.push_back({"add_bias",
                   [](Tape& t, std::span<const Var> v) { return weighted_sum(t, add_bias(t, v[0], v[1])); },
                   {random_tensor(3, 4, rng), random_tensor(1, 4, rng)}});
  cases.push_back({"relu",
                   [](Tape& t, std::span<const Var> v) { return weighted_sum(t, relu(t, v[0])); },
                   {random_tensor(4, 5, rng)}});
  cases.push_back({"softmax",
                   [](Tape& t, std::span<const Var> v) { return weighted_sum(t, softmax_rowwise(t, v[0])); },
                   {random_tensor(3, 4, rng, 3.0)}});
  cases.push_back({"log_softmax",
                   [](Tape& t, std::span<const Var> v) { return weighted_sum(t, log_softmax_rowwise(t, v[0])); },
                   {random_tensor(3, 4, rng, 3.0)}});
  cases.push_back({"masked_mean",
                   [&](Tape& t, std::span<const Var> v) { return weighted_sum(t, masked_mean_rows(t, v[0], mask)); },
                   {random_tensor(4, 3, rng)}});
  cases.push_back({"gather",
                   [&](Tape& t, std::span<const Var> v) { return weighted_sum(t, gather_rows(t, v[0], ids)); },
                   {random_tensor(4, 3, rng)}});
  cases.push_back({"concat",
                   [](Tape& t, std::span<const Var> v) { return weighted_sum(t, concat_rows(t, {v[0], v[1], v[0]})); },
                   {random_tensor(2, 3, rng), random_tensor(1, 3, rng)}});
  cases.push_back({"elementwise",
                   [](Tape& t, std::span<const Var> v) {
                     Var a = mul(t, sub(t, v[0], v[1]), exp(t, scale(t, v[1], 0.5)));
                     return mean(t, add(t, a, v[0]));
                   },
                   {random_tensor(3, 3, rng), random_tensor(3, 3, rng)}});
  for (auto& c : cases) {
    CAPTURE(c.name);
    CHECK(grad_check(c.f, c.params, 1e-5) < 1e-6);
  }
}

TEST_CASE("embedding bag equals gather followed by masked mean") {
  Rng rng(9);
  Tensor2 table = random_tensor(6, 4, rng);
  const std::vector<std::uint32_t> a = {1, 5, 5, 0}, b = {3, 2};
  const std::vector<std::uint8_t> ma = {1, 1, 0, 1}, mb = {1, 1};
  Tape tape;
  Var t = tape.parameter(table);
  Var bag = embedding_bag_mean(tape, t, {a, b}, {ma, mb});
  Var ref = concat_rows(tape, {masked_mean_rows(tape, gather_rows(tape, t, a), ma),
                               masked_mean_rows(tape, gather_rows(tape, t, b), mb)});
  CHECK(tape.value(bag) == tape.value(ref));

  std::vector<Tensor2> params = {table};
  auto f = [&](Tape& tp, std::span<const Var> v) {
    return weighted_sum(tp, embedding_bag_mean(tp, v[0], {a, b}, {ma, mb}));
  };
  CHECK(grad_check(f, params, 1e-5) < 1e-6);
  const std::vector<std::uint8_t> zero = {0, 0};
  CHECK_THROWS(embedding_bag_mean(tape, t, {a, b}, {ma, zero}));
}

TEST_CASE("backward accumulates gradients from repeated use") {
  Tape tape;
  Tensor2 x(1, 1, 3.0);
  Var v = tape.parameter(x);
  Var y = add(tape, mul(tape, v, v), v);  // x^2 + x
  tape.backward(y);
  CHECK(tape.grad(v)[0] == doctest::Approx(7.0));
}

TEST_CASE("grad_check validates its inputs") {
  std::vector<Tensor2> params = {Tensor2(1, 1, 1.0)};
  auto f = [](Tape& t, std::span<const Var> v) { return sum(t, v[0]); };
  CHECK_THROWS(grad_check(f, params, 1e-7));
  CHECK_THROWS(grad_check(f, params, 1e-2));
  auto bad = [](Tape& t, std::span<const Var> v) {
    return sum(t, scale(t, v[0], std::numeric_limits<double>::infinity()));
  };
  CHECK_THROWS(grad_check(bad, params, 1e-5));
}

TEST_CASE("a non-recording tape keeps values only") {
  Tape tape(false);
  Tensor2 x(2, 2, 1.0);
  Var v = tape.parameter(x);
  Var y = sum(tape, relu(tape, v));
  CHECK(tape.value(y)[0] == 4.0);
}
