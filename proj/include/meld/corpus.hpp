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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "meld/common.hpp"

namespace meld::corpus {

enum class Task : std::size_t { Main = 0, Gen = 1, Atk = 2, Dom = 3 };
inline constexpr std::size_t kNumTasks = 4;
inline constexpr std::array<Task, kNumTasks> kTasks = {Task::Main, Task::Gen,
                                                       Task::Atk, Task::Dom};
const char* task_name(Task t);

inline constexpr int kHuman = 0;
inline constexpr int kAI = 1;

struct TextRecord {
  std::string id;
  std::string text;
  int main_label = kHuman;
  std::optional<int> gen;
  std::optional<int> atk;
  std::optional<int> dom;
  std::string source;
  // Id of the record this one was derived from (attacked copies); empty
  // for original rows.
  std::string parent_id;

  std::optional<int> label(Task t) const;
};

class LabelSpace {
 public:
  LabelSpace() = default;
  LabelSpace(std::vector<std::string> generators, std::vector<std::string> attacks,
             std::vector<std::string> domains);

  const std::vector<std::string>& names(Task t) const;
  std::size_t count(Task t) const { return names(t).size(); }
  std::optional<int> find(Task t, std::string_view name) const;
  // Throws "unknown <task> label: <name>".
  int index(Task t, std::string_view name) const;

  bool operator==(const LabelSpace& o) const {
    return generators_ == o.generators_ && attacks_ == o.attacks_ &&
           domains_ == o.domains_;
  }

 private:
  std::vector<std::string> generators_;
  std::vector<std::string> attacks_;
  std::vector<std::string> domains_;
  std::array<std::unordered_map<std::string, int>, kNumTasks> lookup_;
};

// {"generators": [...], "attacks": [...], "domains": [...]}
LabelSpace load_label_space(const std::string& path);
void save_label_space(const LabelSpace& space, const std::string& path);
// Collects label names in order of first appearance from raw JSONL rows.
LabelSpace infer_label_space(const std::string& jsonl_path);

// Parses one JSONL line; line_no is used in error messages only.
TextRecord parse_record(std::string_view line, const LabelSpace& space,
                        std::size_t line_no);
std::string format_record(const TextRecord& r, const LabelSpace& space);

std::vector<TextRecord> load_jsonl(const std::string& path, const LabelSpace& space);
void save_jsonl(const std::vector<TextRecord>& records, const LabelSpace& space,
                const std::string& path);

std::uint64_t text_hash(std::string_view text);

// Drops records whose text hash is in eval_hashes, plus later duplicates of
// an earlier record's text. Order is preserved.
std::vector<TextRecord> dedup_against(const std::vector<TextRecord>& records,
                                      const std::unordered_set<std::uint64_t>& eval_hashes);

struct MixtureEntry {
  std::string source;
  double ratio = 0.0;
};

struct MixtureSpec {
  std::vector<MixtureEntry> entries;
  // Ratios in (0,1], summing to 1 within 1e-9, names unique.
  void validate() const;
};

// [{"source": ..., "ratio": ...}, ...]
MixtureSpec load_mixture(const std::string& path);
void save_mixture(const MixtureSpec& spec, const std::string& path);

// Largest-remainder apportionment of total across ratios; ties go to the
// earlier entry. Counts always sum to total.
std::vector<std::size_t> apportion(const std::vector<double>& ratios, std::size_t total);

struct Batch {
  std::vector<const TextRecord*> records;
  std::array<std::vector<std::uint8_t>, kNumTasks> task_masks;
  // Undefined (zero) where the mask is zero.
  std::array<std::vector<int>, kNumTasks> labels;

  std::size_t size() const { return records.size(); }
};

Batch make_batch(std::vector<const TextRecord*> rows);

// Fixed-ratio mixture sampler. Each source cycles through its own shuffled
// permutation and reshuffles on exhaustion.
class MixtureSampler {
 public:
  MixtureSampler(const std::vector<TextRecord>& records, MixtureSpec mixture,
                 std::uint64_t seed);

  Batch sample_batch(std::size_t batch_size);
  const MixtureSpec& mixture() const { return mixture_; }

 private:
  struct SourcePool {
    std::vector<const TextRecord*> rows;
    std::vector<std::size_t> order;
    std::size_t cursor = 0;
  };

  const TextRecord* draw(SourcePool& pool);

  MixtureSpec mixture_;
  std::vector<SourcePool> pools_;
  Rng rng_;
};

}  // namespace meld::corpus
