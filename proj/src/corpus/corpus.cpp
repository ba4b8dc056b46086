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

#include "meld/corpus.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace meld::corpus {

using nlohmann::json;

const char* task_name(Task t) {
  switch (t) {
    case Task::Main: return "main";
    case Task::Gen: return "gen";
    case Task::Atk: return "atk";
    case Task::Dom: return "dom";
  }
  return "?";
}

std::optional<int> TextRecord::label(Task t) const {
  switch (t) {
    case Task::Main: return main_label;
    case Task::Gen: return gen;
    case Task::Atk: return atk;
    case Task::Dom: return dom;
  }
  return std::nullopt;
}

LabelSpace::LabelSpace(std::vector<std::string> generators,
                       std::vector<std::string> attacks,
                       std::vector<std::string> domains)
    : generators_(std::move(generators)),
      attacks_(std::move(attacks)),
      domains_(std::move(domains)) {
  for (Task t : {Task::Gen, Task::Atk, Task::Dom}) {
    auto& map = lookup_[static_cast<std::size_t>(t)];
    const auto& list = names(t);
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (!map.emplace(list[i], static_cast<int>(i)).second) {
        throw Error(std::string("duplicate ") + task_name(t) + " label: " + list[i]);
      }
    }
  }
}

const std::vector<std::string>& LabelSpace::names(Task t) const {
  static const std::vector<std::string> kMain = {"human", "ai"};
  switch (t) {
    case Task::Main: return kMain;
    case Task::Gen: return generators_;
    case Task::Atk: return attacks_;
    case Task::Dom: return domains_;
  }
  return kMain;
}

std::optional<int> LabelSpace::find(Task t, std::string_view name) const {
  if (t == Task::Main) {
    if (name == "human" || name == "Human" || name == "0") return kHuman;
    if (name == "ai" || name == "AI" || name == "1") return kAI;
    return std::nullopt;
  }
  const auto& map = lookup_[static_cast<std::size_t>(t)];
  auto it = map.find(std::string(name));
  if (it == map.end()) return std::nullopt;
  return it->second;
}

int LabelSpace::index(Task t, std::string_view name) const {
  if (auto i = find(t, name)) return *i;
  throw Error(std::string("unknown ") + task_name(t) + " label: " + std::string(name));
}

namespace {

std::vector<std::string> string_array(const json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  return out;
}

}  // namespace

LabelSpace load_label_space(const std::string& path) {
  auto in = open_in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("label space " + path + ": " + e.what());
  }
  return LabelSpace(string_array(j, "generators"), string_array(j, "attacks"),
                    string_array(j, "domains"));
}

void save_label_space(const LabelSpace& space, const std::string& path) {
  json j = {{"generators", space.names(Task::Gen)},
            {"attacks", space.names(Task::Atk)},
            {"domains", space.names(Task::Dom)}};
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

LabelSpace infer_label_space(const std::string& jsonl_path) {
  auto in = open_in(jsonl_path);
  std::array<std::vector<std::string>, kNumTasks> seen;
  std::array<std::unordered_set<std::string>, kNumTasks> known;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      throw Error("line " + std::to_string(line_no) + ": malformed JSON");
    }
    for (Task t : {Task::Gen, Task::Atk, Task::Dom}) {
      const char* key = task_name(t);
      if (!j.contains(key) || j[key].is_null()) continue;
      auto name = j[key].get<std::string>();
      auto k = static_cast<std::size_t>(t);
      if (known[k].insert(name).second) seen[k].push_back(name);
    }
  }
  return LabelSpace(seen[1], seen[2], seen[3]);
}

TextRecord parse_record(std::string_view line, const LabelSpace& space,
                        std::size_t line_no) {
  const std::string where = "line " + std::to_string(line_no) + ": ";
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception&) {
    throw Error(where + "malformed JSON");
  }
  if (!j.is_object()) throw Error(where + "expected a JSON object");
  TextRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.text = j.at("text").get<std::string>();
    const auto main = j.at("main").get<std::string>();
    auto m = space.find(Task::Main, main);
    if (!m) throw Error(where + "unknown main label: " + main);
    r.main_label = *m;
    for (Task t : {Task::Gen, Task::Atk, Task::Dom}) {
      const char* key = task_name(t);
      if (!j.contains(key) || j[key].is_null()) continue;
      const auto name = j[key].get<std::string>();
      auto idx = space.find(t, name);
      if (!idx) throw Error(where + "unknown " + key + " label: " + name);
      if (t == Task::Gen) r.gen = idx;
      if (t == Task::Atk) r.atk = idx;
      if (t == Task::Dom) r.dom = idx;
    }
    if (j.contains("source")) r.source = j["source"].get<std::string>();
    if (j.contains("parent")) r.parent_id = j["parent"].get<std::string>();
  } catch (const json::exception& e) {
    throw Error(where + "bad field: " + e.what());
  }
  if (r.text.empty()) throw Error(where + "empty text");
  return r;
}

std::string format_record(const TextRecord& r, const LabelSpace& space) {
  json j;
  j["id"] = r.id;
  j["text"] = r.text;
  j["main"] = r.main_label == kAI ? "ai" : "human";
  auto put = [&](Task t, const std::optional<int>& v) {
    if (v) j[task_name(t)] = space.names(t).at(static_cast<std::size_t>(*v));
  };
  put(Task::Gen, r.gen);
  put(Task::Atk, r.atk);
  put(Task::Dom, r.dom);
  j["source"] = r.source;
  if (!r.parent_id.empty()) j["parent"] = r.parent_id;
  return j.dump();
}

std::vector<TextRecord> load_jsonl(const std::string& path, const LabelSpace& space) {
  auto in = open_in(path);
  std::vector<TextRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(parse_record(line, space, line_no));
  }
  return out;
}

void save_jsonl(const std::vector<TextRecord>& records, const LabelSpace& space,
                const std::string& path) {
  auto out = open_out(path);
  for (const auto& r : records) out << format_record(r, space) << "\n";
}

std::uint64_t text_hash(std::string_view text) { return fnv1a64(text); }

std::vector<TextRecord> dedup_against(const std::vector<TextRecord>& records,
                                      const std::unordered_set<std::uint64_t>& eval_hashes) {
  std::vector<TextRecord> out;
  std::unordered_set<std::uint64_t> seen;
  for (const auto& r : records) {
    const auto h = text_hash(r.text);
    if (eval_hashes.count(h)) continue;
    if (!seen.insert(h).second) continue;
    out.push_back(r);
  }
  return out;
}

void MixtureSpec::validate() const {
  if (entries.empty()) throw Error("mixture has no sources");
  double total = 0.0;
  std::unordered_set<std::string> names;
  for (const auto& e : entries) {
    if (!(e.ratio > 0.0 && e.ratio <= 1.0)) {
      throw Error("mixture ratio for " + e.source + " must lie in (0,1]");
    }
    if (!names.insert(e.source).second) {
      throw Error("duplicate mixture source: " + e.source);
    }
    total += e.ratio;
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("mixture ratios must sum to 1");
}

MixtureSpec load_mixture(const std::string& path) {
  auto in = open_in(path);
  MixtureSpec spec;
  try {
    json j = json::parse(in);
    for (const auto& e : j) {
      spec.entries.push_back({e.at("source").get<std::string>(), e.at("ratio").get<double>()});
    }
  } catch (const json::exception& e) {
    throw Error("mixture " + path + ": " + e.what());
  }
  spec.validate();
  return spec;
}

void save_mixture(const MixtureSpec& spec, const std::string& path) {
  json j = json::array();
  for (const auto& e : spec.entries) j.push_back({{"source", e.source}, {"ratio", e.ratio}});
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

std::vector<std::size_t> apportion(const std::vector<double>& ratios, std::size_t total) {
  const double sum = std::accumulate(ratios.begin(), ratios.end(), 0.0);
  std::vector<std::size_t> counts(ratios.size());
  std::vector<double> remainder(ratios.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    const double quota = static_cast<double>(total) * ratios[i] / sum;
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    remainder[i] = quota - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(ratios.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return remainder[a] > remainder[b];
  });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) {
    ++counts[order[k % order.size()]];
  }
  return counts;
}

Batch make_batch(std::vector<const TextRecord*> rows) {
  Batch b;
  b.records = std::move(rows);
  for (Task t : kTasks) {
    auto k = static_cast<std::size_t>(t);
    b.task_masks[k].resize(b.records.size());
    b.labels[k].resize(b.records.size());
    for (std::size_t i = 0; i < b.records.size(); ++i) {
      auto v = b.records[i]->label(t);
      b.task_masks[k][i] = v ? 1 : 0;
      b.labels[k][i] = v.value_or(0);
    }
  }
  return b;
}

namespace {

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
  }
}

}  // namespace

MixtureSampler::MixtureSampler(const std::vector<TextRecord>& records,
                               MixtureSpec mixture, std::uint64_t seed)
    : mixture_(std::move(mixture)), rng_(seed) {
  mixture_.validate();
  std::unordered_map<std::string, std::size_t> slot;
  pools_.resize(mixture_.entries.size());
  for (std::size_t i = 0; i < mixture_.entries.size(); ++i) {
    slot[mixture_.entries[i].source] = i;
  }
  for (const auto& r : records) {
    auto it = slot.find(r.source);
    if (it != slot.end()) pools_[it->second].rows.push_back(&r);
  }
  for (std::size_t i = 0; i < pools_.size(); ++i) {
    if (pools_[i].rows.empty()) {
      throw Error("mixture source has no records: " + mixture_.entries[i].source);
    }
    pools_[i].order.resize(pools_[i].rows.size());
    std::iota(pools_[i].order.begin(), pools_[i].order.end(), 0);
    shuffle(pools_[i].order, rng_);
  }
}

const TextRecord* MixtureSampler::draw(SourcePool& pool) {
  if (pool.cursor == pool.order.size()) {
    shuffle(pool.order, rng_);
    pool.cursor = 0;
  }
  return pool.rows[pool.order[pool.cursor++]];
}

Batch MixtureSampler::sample_batch(std::size_t batch_size) {
  if (batch_size < pools_.size()) {
    throw Error("batch size smaller than the number of mixture sources");
  }
  std::vector<double> ratios;
  for (const auto& e : mixture_.entries) ratios.push_back(e.ratio);
  const auto counts = apportion(ratios, batch_size);
  std::vector<const TextRecord*> rows;
  rows.reserve(batch_size);
  for (std::size_t s = 0; s < pools_.size(); ++s) {
    for (std::size_t k = 0; k < counts[s]; ++k) rows.push_back(draw(pools_[s]));
  }
  return make_batch(std::move(rows));
}

}  // namespace meld::corpus
