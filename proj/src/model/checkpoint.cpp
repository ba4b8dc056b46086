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

#include <bit>
#include <fstream>
#include <iterator>

#include "meld/model.hpp"

namespace meld::model {
namespace {

constexpr char kMagic[4] = {'M', 'E', 'L', 'D'};
constexpr std::uint8_t kVersion = 1;

void put_u64(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
}

std::uint64_t get_u64(std::string_view in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw Error("checkpoint truncated");
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
  }
  pos += 8;
  return v;
}

}  // namespace

std::string serialize_checkpoint(const ModelParams& params) {
  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  const ModelDims& d = params.dims;
  for (std::size_t v : {d.vocab, d.hidden, d.generators, d.attacks, d.domains}) put_u64(out, v);
  out.reserve(out.size() + params.parameter_count() * 8);
  for (const Tensor2* t : params.blocks()) {
    for (double v : t->data()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

ModelParams deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() < 5 || bytes.substr(0, 4) != std::string_view(kMagic, 4)) {
    throw Error("checkpoint: bad magic");
  }
  if (static_cast<std::uint8_t>(bytes[4]) != kVersion) {
    throw Error("checkpoint: unsupported version");
  }
  std::size_t pos = 5;
  ModelDims d;
  d.vocab = get_u64(bytes, pos);
  d.hidden = get_u64(bytes, pos);
  d.generators = get_u64(bytes, pos);
  d.attacks = get_u64(bytes, pos);
  d.domains = get_u64(bytes, pos);
  // Reject absurd headers before allocating.
  const unsigned __int128 declared =
      static_cast<unsigned __int128>(d.vocab) * d.hidden +
      static_cast<unsigned __int128>(d.hidden) * (3 * d.hidden + 2 + d.generators + d.attacks + d.domains);
  if (declared * 8 > bytes.size()) throw Error("checkpoint: shape mismatch with declared dims");
  ModelParams p = ModelParams::zeros(d);
  if (bytes.size() - pos != p.parameter_count() * 8) {
    throw Error("checkpoint: shape mismatch with declared dims");
  }
  for (Tensor2* t : p.blocks()) {
    for (double& v : t->data()) v = std::bit_cast<double>(get_u64(bytes, pos));
  }
  return p;
}

void save_checkpoint(const ModelParams& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  const std::string bytes = serialize_checkpoint(params);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed: " + path);
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace meld::model
