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

#include "meld/numcore/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace meld::num {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(std::string("shape mismatch in ") + what);
}

}  // namespace

Tensor2 softmax_rows(const Tensor2& x) {
  Tensor2 y(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto out = y.row(r);
    const double m = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) {
      out[c] = std::exp(in[c] - m);
      z += out[c];
    }
    for (double& v : out) v /= z;
  }
  return y;
}

Tensor2 log_softmax_rows(const Tensor2& x) {
  Tensor2 y(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto out = y.row(r);
    const double m = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (double v : in) z += std::exp(v - m);
    const double lse = m + std::log(z);
    for (std::size_t c = 0; c < in.size(); ++c) out[c] = in[c] - lse;
  }
  return y;
}

Var matmul(Tape& tape, Var a, Var b) {
  const Tensor2& A = tape.value(a);
  const Tensor2& B = tape.value(b);
  require(A.cols() == B.rows(), "matmul");
  const std::size_t n = A.rows(), k = A.cols(), m = B.cols();
  Tensor2 C(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A(i, p);
      if (aip == 0.0) continue;
      const double* brow = &B.data()[p * m];
      double* crow = &C.data()[i * m];
      for (std::size_t j = 0; j < m; ++j) crow[j] += aip * brow[j];
    }
  }
  return tape.push(std::move(C), {a, b}, [a, b, n, k, m](Tape& t, Var self) {
    const Tensor2& G = t.grad(self);
    if (t.requires_grad(a)) {
      const Tensor2& Bv = t.value(b);
      Tensor2& gA = t.grad(a);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < m; ++j) acc += G(i, j) * Bv(p, j);
          gA(i, p) += acc;
        }
    }
    if (t.requires_grad(b)) {
      const Tensor2& Av = t.value(a);
      Tensor2& gB = t.grad(b);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          const double aip = Av(i, p);
          if (aip == 0.0) continue;
          for (std::size_t j = 0; j < m; ++j) gB(p, j) += aip * G(i, j);
        }
    }
  });
}

Var add_bias(Tape& tape, Var x, Var bias) {
  const Tensor2& X = tape.value(x);
  const Tensor2& b = tape.value(bias);
  require(b.rows() == 1 && b.cols() == X.cols(), "add_bias");
  Tensor2 Y = X;
  for (std::size_t r = 0; r < Y.rows(); ++r)
    for (std::size_t c = 0; c < Y.cols(); ++c) Y(r, c) += b[c];
  return tape.push(std::move(Y), {x, bias}, [x, bias](Tape& t, Var self) {
    const Tensor2& G = t.grad(self);
    if (t.requires_grad(x)) {
      Tensor2& gx = t.grad(x);
      for (std::size_t i = 0; i < G.size(); ++i) gx[i] += G[i];
    }
    if (t.requires_grad(bias)) {
      Tensor2& gb = t.grad(bias);
      for (std::size_t r = 0; r < G.rows(); ++r)
        for (std::size_t c = 0; c < G.cols(); ++c) gb[c] += G(r, c);
    }
  });
}

Var relu(Tape& tape, Var x) {
  Tensor2 Y = tape.value(x);
  for (double& v : Y.data()) v = v > 0.0 ? v : 0.0;
  return tape.push(std::move(Y), {x}, [x](Tape& t, Var self) {
    const Tensor2& G = t.grad(self);
    const Tensor2& X = t.value(x);
    Tensor2& gx = t.grad(x);
    for (std::size_t i = 0; i < G.size(); ++i) {
      if (X[i] > 0.0) gx[i] += G[i];
    }
  });
}

Var dropout(Tape& tape, Var x, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw Error("dropout rate must be in [0,1)");
  if (rate == 0.0) return x;
  const Tensor2& X = tape.value(x);
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> factor(X.size());
  Tensor2 Y(X.rows(), X.cols());
  for (std::size_t i = 0; i < X.size(); ++i) {
    factor[i] = uniform01(rng) < rate ? 0.0 : keep_scale;
    Y[i] = X[i] * factor[i];
  }
  return tape.push(std::move(Y), {x},
                   [x, factor = std::move(factor)](Tape& t, Var self) {
                     const Tensor2& G = t.grad(self);
                     Tensor2& gx = t.grad(x);
                     for (std::size_t i = 0; i < G.size(); ++i)
                       gx[i] += G[i] * factor[i];
                   });
}

Var softmax_rowwise(Tape& tape, Var x) {
  Tensor2 Y = softmax_rows(tape.value(x));
  return tape.push(std::move(Y), {x}, [x](Tape& t, Var self) {
    const Tensor2& G = t.grad(self);
    const Tensor2& Yv = t.value(self);
    Tensor2& gx = t.grad(x);
    for (std::size_t r = 0; r < G.rows(); ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < G.cols(); ++c) dot += G(r, c) * Yv(r, c);
      for (std::size_t c = 0; c < G.cols(); ++c)
        gx(r, c) += Yv(r, c) * (G(r, c) - dot);
    }
  });
}

Var log_softmax_rowwise(Tape& tape, Var x) {
  Tensor2 Y = log_softmax_rows(tape.value(x));
  return tape.push(std::move(Y), {x}, [x](Tape& t, Var self) {
    const Tensor2& G = t.grad(self);
    const Tensor2& Yv = t.value(self);
    Tensor2& gx = t.grad(x);
    for (std::size_t r = 0; r < G.rows(); ++r) {
      double total = 0.0;
      for (std::size_t c = 0; c < G.cols(); ++c) total += G(r, c);
      for (std::size_t c = 0; c < G.cols(); ++c)
        gx(r, c) += G(r, c) - std::exp(Yv(r, c)) * total;
    }
  });
}

Var masked_mean_rows(Tape& tape, Var x, std::span<const std::uint8_t> mask) {
  const Tensor2& X = tape.value(x);
  require(mask.size() == X.rows(), "masked_mean_rows");
  std::size_t count = 0;
  for (auto m : mask) count += m ? 1 : 0;
  if (count == 0) throw Error("masked_mean_rows: all-zero mask");
  Tensor2 Y(1, X.cols());
  for (std::size_t r = 0; r < X.rows(); ++r) {
    if (!mask[r]) continue;
    for (std::size_t c = 0; c < X.cols(); ++c) Y[c] += X(r, c);
  }
  const double inv = 1.0 / static_cast<double>(count);
  for (double& v : Y.data()) v *= inv;
  std::vector<std::uint8_t> keep(mask.begin(), mask.end());
  return tape.push(std::move(Y), {x},
                   [x, inv, keep = std::move(keep)](Tape& t, Var self) {
                     const Tensor2& G = t.grad(self);
                     Tensor2& gx = t.grad(x);
                     for (std::size_t r = 0; r < keep.size(); ++r) {
                       if (!keep[r]) continue;
                       for (std::size_t c = 0; c < G.cols(); ++c)
                         gx(r, c) += G[c] * inv;
                     }
                   });
}

Var gather_rows(Tape& tape, Var table, std::span<const std::uint32_t> ids) {
  const Tensor2& T = tape.value(table);
  Tensor2 Y(ids.size(), T.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= T.rows()) throw Error("gather_rows: index out of range");
    auto src = T.row(ids[i]);
    std::copy(src.begin(), src.end(), Y.row(i).begin());
  }
  std::vector<std::uint32_t> idx(ids.begin(), ids.end());
  return tape.push(std::move(Y), {table},
                   [table, idx = std::move(idx)](Tape& t, Var self) {
                     const Tensor2& G = t.grad(self);
                     Tensor2& gT = t.grad(table);
                     for (std::size_t i = 0; i < idx.size(); ++i) {
                       auto dst = gT.row(idx[i]);
                       auto src = G.row(i);
                       for (std::size_t c = 0; c < src.size(); ++c)
                         dst[c] += src[c];
                     }
                   });
}

Var embedding_bag_mean(Tape& tape, Var table,
                       const std::vector<std::span<const std::uint32_t>>& ids,
                       const std::vector<std::span<const std::uint8_t>>& masks) {
  const Tensor2& T = tape.value(table);
  require(ids.size() == masks.size() && !ids.empty(), "embedding_bag_mean");
  const std::size_t n = ids.size(), h = T.cols();
  Tensor2 Y(n, h);
  std::vector<double> inv(n);
  for (std::size_t r = 0; r < n; ++r) {
    require(ids[r].size() == masks[r].size(), "embedding_bag_mean");
    std::size_t count = 0;
    auto out = Y.row(r);
    for (std::size_t i = 0; i < ids[r].size(); ++i) {
      if (ids[r][i] >= T.rows()) throw Error("embedding_bag_mean: index out of range");
      if (!masks[r][i]) continue;
      ++count;
      auto src = T.row(ids[r][i]);
      for (std::size_t c = 0; c < h; ++c) out[c] += src[c];
    }
    if (count == 0) throw Error("masked_mean_rows: all-zero mask");
    inv[r] = 1.0 / static_cast<double>(count);
    for (double& v : out) v *= inv[r];
  }
  std::vector<std::vector<std::uint32_t>> kept(n);
  if (tape.recording()) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t i = 0; i < ids[r].size(); ++i) {
        if (masks[r][i]) kept[r].push_back(ids[r][i]);
      }
    }
  }
  return tape.push(std::move(Y), {table},
                   [table, kept = std::move(kept), inv = std::move(inv)](Tape& t, Var self) {
                     const Tensor2& G = t.grad(self);
                     Tensor2& gT = t.grad(table);
                     for (std::size_t r = 0; r < kept.size(); ++r) {
                       auto g = G.row(r);
                       for (std::uint32_t id : kept[r]) {
                         auto dst = gT.row(id);
                         for (std::size_t c = 0; c < g.size(); ++c) dst[c] += g[c] * inv[r];
                       }
                     }
                   });
}

Var concat_rows(Tape& tape, const std::vector<Var>& parts) {
  if (parts.empty()) throw Error("concat_rows: no inputs");
  const std::size_t cols = tape.value(parts.front()).cols();
  std::size_t rows = 0;
  for (Var p : parts) {
    require(tape.value(p).cols() == cols, "concat_rows");
    rows += tape.value(p).rows();
  }
  Tensor2 Y(rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Tensor2& P = tape.value(p);
    std::copy(P.data().begin(), P.data().end(),
              Y.data().begin() + static_cast<std::ptrdiff_t>(offset * cols));
    offset += P.rows();
  }
  return tape.push(std::move(Y), parts, [parts](Tape& t, Var self) {
    const Tensor2& G = t.grad(self);
    std::size_t off = 0;
    for (Var p : parts) {
      const std::size_t n = t.value(p).size();
      if (t.requires_grad(p)) {
        Tensor2& gp = t.grad(p);
        for (std::size_t i = 0; i < n; ++i) gp[i] += G[off + i];
      }
      off += n;
    }
  });
}

Var add(Tape& tape, Var a, Var b) {
  const Tensor2& A = tape.value(a);
  const Tensor2& B = tape.value(b);
  require(A.same_shape(B), "add");
  Tensor2 Y = A;
  for (std::size_t i = 0; i < Y.size(); ++i) Y[i] += B[i];
  return tape.push(std::move(Y), {a, b}, [a, b](Tape& t, Var self) {
    const Tensor2& G = t.grad(self);
    for (Var v : {a, b}) {
      if (!t.requires_grad(v)) continue;
      Tensor2& g = t.grad(v);
      for (std::size_t i = 0; i < G.size(); ++i) g[i] += G[i];
    }
  });
}

Var sub(Tape& tape, Var a, Var b) {
  const Tensor2& A = tape.value(a);
  const Tensor2& B = tape.value(b);
  require(A.same_shape(B), "sub");
  Tensor2 Y = A;
  for (std::size_t i = 0; i < Y.size(); ++i) Y[i] -= B[i];
  return tape.push(std::move(Y), {a, b}, [a, b](Tape& t, Var self) {
    const Tensor2& G = t.grad(self);
    if (t.requires_grad(a)) {
      Tensor2& g = t.grad(a);
      for (std::size_t i = 0; i < G.size(); ++i) g[i] += G[i];
    }
    if (t.requires_grad(b)) {
      Tensor2& g = t.grad(b);
      for (std::size_t i = 0; i < G.size(); ++i) g[i] -= G[i];
    }
  });
}

Var mul(Tape& tape, Var a, Var b) {
  const Tensor2& A = tape.value(a);
  const Tensor2& B = tape.value(b);
  require(A.same_shape(B), "mul");
  Tensor2 Y = A;
  for (std::size_t i = 0; i < Y.size(); ++i) Y[i] *= B[i];
  return tape.push(std::move(Y), {a, b}, [a, b](Tape& t, Var self) {
    const Tensor2& G = t.grad(self);
    if (t.requires_grad(a)) {
      const Tensor2& Bv = t.value(b);
      Tensor2& g = t.grad(a);
      for (std::size_t i = 0; i < G.size(); ++i) g[i] += G[i] * Bv[i];
    }
    if (t.requires_grad(b)) {
      const Tensor2& Av = t.value(a);
      Tensor2& g = t.grad(b);
      for (std::size_t i = 0; i < G.size(); ++i) g[i] += G[i] * Av[i];
    }
  });
}

Var scale(Tape& tape, Var x, double factor) {
  Tensor2 Y = tape.value(x);
  for (double& v : Y.data()) v *= factor;
  return tape.push(std::move(Y), {x}, [x, factor](Tape& t, Var self) {
    const Tensor2& G = t.grad(self);
    Tensor2& g = t.grad(x);
    for (std::size_t i = 0; i < G.size(); ++i) g[i] += G[i] * factor;
  });
}

Var exp(Tape& tape, Var x) {
  Tensor2 Y = tape.value(x);
  for (double& v : Y.data()) v = std::exp(v);
  return tape.push(std::move(Y), {x}, [x](Tape& t, Var self) {
    const Tensor2& G = t.grad(self);
    const Tensor2& Yv = t.value(self);
    Tensor2& g = t.grad(x);
    for (std::size_t i = 0; i < G.size(); ++i) g[i] += G[i] * Yv[i];
  });
}

Var sum(Tape& tape, Var x) {
  const Tensor2& X = tape.value(x);
  double s = 0.0;
  for (double v : X.data()) s += v;
  return tape.push(Tensor2(1, 1, s), {x}, [x](Tape& t, Var self) {
    const double g0 = t.grad(self)[0];
    Tensor2& g = t.grad(x);
    for (double& v : g.data()) v += g0;
  });
}

Var mean(Tape& tape, Var x) {
  const std::size_t n = tape.value(x).size();
  if (n == 0) throw Error("mean of empty tensor");
  return scale(tape, sum(tape, x), 1.0 / static_cast<double>(n));
}

}  // namespace meld::num
