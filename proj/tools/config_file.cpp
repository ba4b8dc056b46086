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

#include "config_file.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace meld::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(origin + ":" + std::to_string(line_no) + ": empty key");
    if (cfg.values_.count(key)) {
      throw Error(origin + ":" + std::to_string(line_no) + ": duplicate key " + key);
    }
    cfg.values_[key] = trim(line.substr(eq + 1));
    cfg.lines_[key] = line_no;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  KeyValueConfig cfg = parse(ss.str(), path);
  cfg.base_dir_ = std::filesystem::path(path).parent_path().string();
  return cfg;
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  used_.insert(key);
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  return get(key).value_or(fallback);
}

namespace {

[[noreturn]] void bad_value(const std::string& origin, const std::string& key,
                            const std::string& value, const char* want) {
  throw Error(origin + ": " + key + " expects " + want + ", got '" + value + "'");
}

}  // namespace

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t pos = 0;
    const double d = std::stod(*v, &pos);
    if (pos == v->size()) return d;
  } catch (const std::exception&) {
  }
  bad_value(origin_, key, *v, "a number");
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(*v, &pos);
    if (pos == v->size()) return x;
  } catch (const std::exception&) {
  }
  bad_value(origin_, key, *v, "an integer");
}

std::uint64_t KeyValueConfig::get_uint(const std::string& key, std::uint64_t fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t pos = 0;
    if (!v->empty() && (*v)[0] != '-') {
      const unsigned long long x = std::stoull(*v, &pos);
      if (pos == v->size()) return x;
    }
  } catch (const std::exception&) {
  }
  bad_value(origin_, key, *v, "a non-negative integer");
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  bad_value(origin_, key, *v, "a boolean");
}

std::vector<std::uint64_t> KeyValueConfig::get_uint_list(
    const std::string& key, const std::vector<std::uint64_t>& fallback) const {
  const auto v = get(key);
  if (!v) return fallback;
  std::vector<std::uint64_t> out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    try {
      std::size_t pos = 0;
      if (item.empty() || item[0] == '-') throw std::invalid_argument(item);
      out.push_back(std::stoull(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      bad_value(origin_, key, *v, "a comma-separated list of integers");
    }
  }
  if (out.empty()) bad_value(origin_, key, *v, "a non-empty list");
  return out;
}

void KeyValueConfig::reject_unused() const {
  for (const auto& [key, value] : values_) {
    if (!used_.count(key)) {
      throw Error(origin_ + ":" + std::to_string(lines_.at(key)) + ": unknown key " + key);
    }
  }
}

std::string KeyValueConfig::path_value(const std::string& key) const {
  const auto v = get(key);
  if (!v || v->empty()) return "";
  const std::filesystem::path p(*v);
  if (p.is_absolute() || base_dir_.empty()) return *v;
  return (std::filesystem::path(base_dir_) / p).string();
}

trainer::TrainConfig read_train_config(const KeyValueConfig& c, trainer::TrainConfig t) {
  t.seed = c.get_uint("seed", t.seed);
  t.dims.vocab = c.get_uint("vocab", t.dims.vocab);
  t.dims.hidden = c.get_uint("hidden", t.dims.hidden);
  t.max_seq_len = c.get_uint("max_seq_len", t.max_seq_len);
  t.batch_size = c.get_uint("batch_size", t.batch_size);
  t.optim.total_steps = c.get_int("total_steps", t.optim.total_steps);
  t.optim.warmup_steps = c.get_int("warmup_steps", t.optim.warmup_steps);
  t.optim.lr_peak = c.get_double("lr_peak", t.optim.lr_peak);
  t.optim.weight_decay = c.get_double("weight_decay", t.optim.weight_decay);
  t.optim.beta1 = c.get_double("adam_beta1", t.optim.beta1);
  t.optim.beta2 = c.get_double("adam_beta2", t.optim.beta2);
  t.optim.eps = c.get_double("adam_eps", t.optim.eps);
  t.dropout = c.get_double("dropout", t.dropout);
  t.p_augment = c.get_double("p_augment", t.p_augment);
  t.ema_beta = c.get_double("ema_beta", t.ema_beta);
  t.attack.rate = c.get_double("attack_rate", t.attack.rate);
  t.eval_every = c.get_int("eval_every", t.eval_every);
  t.swa_start = c.get_int("swa_start", t.swa_start);
  t.swa_top_k = c.get_uint("swa_top_k", t.swa_top_k);
  t.weights.lambda_ema = c.get_double("lambda_ema", t.weights.lambda_ema);
  t.weights.lambda_rank = c.get_double("lambda_rank", t.weights.lambda_rank);
  t.weights.tau_tea = c.get_double("tau_tea", t.weights.tau_tea);
  t.weights.tau_stu = c.get_double("tau_stu", t.weights.tau_stu);
  t.weights.tau_r = c.get_double("tau_r", t.weights.tau_r);
  t.weights.alpha = c.get_double("alpha", t.weights.alpha);
  t.weights.smoothing = c.get_double("smoothing", t.weights.smoothing);
  t.use_aux = c.get_bool("use_aux", t.use_aux);
  t.use_kendall = c.get_bool("use_kendall", t.use_kendall);
  return t;
}

synth::SynthSpec read_synth_spec(const KeyValueConfig& c, const std::string& prefix) {
  synth::SynthSpec s;
  s.n_generators = c.get_uint(prefix + "n_generators", s.n_generators);
  s.n_domains = c.get_uint(prefix + "n_domains", s.n_domains);
  s.rows_per_cell = c.get_uint(prefix + "rows_per_cell", s.rows_per_cell);
  if (c.has(prefix + "human_rows_per_domain")) {
    s.human_rows_per_domain = c.get_uint(prefix + "human_rows_per_domain", 0);
  }
  s.seed = c.get_uint(prefix + "seed", s.seed);
  s.attack_fraction = c.get_double(prefix + "attack_fraction", s.attack_fraction);
  s.attack_rate = c.get_double(prefix + "attack_rate", s.attack_rate);
  s.words_mean = c.get_uint(prefix + "words_mean", s.words_mean);
  s.id_prefix = c.get_string(prefix + "id_prefix", s.id_prefix);
  return s;
}

TrainFiles read_train_files(const KeyValueConfig& c) {
  TrainFiles f;
  f.train = c.path_value("train");
  f.validation = c.path_value("validation");
  f.labels = c.path_value("labels");
  f.mixture = c.path_value("mixture");
  f.lexicon = c.path_value("lexicon");
  f.homoglyphs = c.path_value("homoglyphs");
  if (f.train.empty()) throw Error("config: missing key train");
  if (f.validation.empty()) throw Error("config: missing key validation");
  return f;
}

evalpipe::AblationConfig read_ablation_config(const KeyValueConfig& c) {
  evalpipe::AblationConfig a;
  a.train = read_train_config(c, a.train);
  a.synth = read_synth_spec(c, "synth_");
  a.sizes.val_rows_per_cell = c.get_uint("val_rows_per_cell", a.sizes.val_rows_per_cell);
  a.sizes.val_humans_per_domain = c.get_uint("val_humans_per_domain", a.sizes.val_humans_per_domain);
  a.sizes.eval_rows_per_cell = c.get_uint("eval_rows_per_cell", a.sizes.eval_rows_per_cell);
  a.sizes.eval_humans_per_domain =
      c.get_uint("eval_humans_per_domain", a.sizes.eval_humans_per_domain);
  a.chunks.chunk_len = c.get_uint("chunk_len", a.chunks.chunk_len);
  a.chunks.stride = c.get_uint("chunk_stride", a.chunks.stride);
  a.seeds = c.get_uint_list("seeds", a.seeds);
  a.resamples = c.get_uint("resamples", a.resamples);
  a.bootstrap_seed = c.get_uint("bootstrap_seed", a.bootstrap_seed);
  return a;
}

}  // namespace meld::cli
