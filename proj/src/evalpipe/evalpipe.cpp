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

#include "meld/evalpipe.hpp"

#include <algorithm>
#include <cstdio>

namespace meld::evalpipe {

std::size_t ChunkConfig::effective_stride() const {
  return stride == 0 ? std::max<std::size_t>(1, chunk_len / 2) : stride;
}

void ChunkConfig::validate() const {
  if (chunk_len == 0) throw Error("chunk_len must be at least 1");
  const std::size_t s = effective_stride();
  if (s < 1 || s > chunk_len) throw Error("stride must lie in [1, chunk_len]");
}

std::vector<std::pair<std::size_t, std::size_t>> chunk_windows(std::size_t length,
                                                               std::size_t chunk_len,
                                                               std::size_t stride) {
  if (length == 0) throw Error("chunk_windows: empty sequence");
  if (chunk_len == 0 || stride == 0 || stride > chunk_len) {
    throw Error("chunk_windows: need 1 <= stride <= chunk_len");
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t start = 0;; start += stride) {
    const std::size_t end = std::min(start + chunk_len, length);
    out.emplace_back(start, end);
    if (end == length) break;
  }
  return out;
}

double chunk_score(const model::ModelParams& params, std::string_view text,
                   const ChunkConfig& chunks, std::vector<double>* pooled_out) {
  chunks.validate();
  const model::FeatureSeq full = model::featurize(text, params.dims.vocab);
  const auto windows = chunk_windows(full.size(), chunks.chunk_len, chunks.effective_stride());
  std::vector<model::FeatureSeq> seqs;
  seqs.reserve(windows.size());
  for (const auto& [lo, hi] : windows) {
    model::FeatureSeq s;
    s.ids.assign(full.ids.begin() + static_cast<std::ptrdiff_t>(lo),
                 full.ids.begin() + static_cast<std::ptrdiff_t>(hi));
    s.mask.assign(full.mask.begin() + static_cast<std::ptrdiff_t>(lo),
                  full.mask.begin() + static_cast<std::ptrdiff_t>(hi));
    seqs.push_back(std::move(s));
  }
  num::Tensor2 pooled;
  const num::Tensor2 probs =
      num::softmax_rows(model::main_logits(params, seqs, pooled_out ? &pooled : nullptr));
  double agg = 0.0;
  for (std::size_t w = 0; w < probs.rows(); ++w) {
    const double p = probs(w, corpus::kAI);
    agg = chunks.aggregation == Aggregation::Max ? std::max(agg, p) : agg + p;
  }
  if (chunks.aggregation == Aggregation::Mean) agg /= static_cast<double>(probs.rows());
  if (pooled_out) {
    pooled_out->assign(pooled.cols(), 0.0);
    for (std::size_t w = 0; w < pooled.rows(); ++w) {
      for (std::size_t k = 0; k < pooled.cols(); ++k) (*pooled_out)[k] += pooled(w, k);
    }
    for (double& v : *pooled_out) v /= static_cast<double>(pooled.rows());
  }
  return agg;
}

metrics::ScoredPool score_pool(const model::ModelParams& params,
                               const std::vector<corpus::TextRecord>& records,
                               const ChunkConfig& chunks, bool capture_embeddings) {
  chunks.validate();
  metrics::ScoredPool pool;
  pool.rows.resize(records.size());
  parallel_for(records.size(), [&](std::size_t i) {
    const auto& r = records[i];
    auto& row = pool.rows[i];
    row.id = r.id;
    row.main = r.main_label;
    row.gen = r.gen;
    row.atk = r.atk;
    row.dom = r.dom;
    row.score = chunk_score(params, r.text, chunks, capture_embeddings ? &row.embedding : nullptr);
  });
  return pool;
}

namespace {

BreakdownReport breakdown(const metrics::ScoredPool& pool, double fpr,
                          const std::vector<std::string>& names,
                          std::optional<int> metrics::ScoredRow::*field,
                          const std::string& missing_name) {
  BreakdownReport rep;
  rep.threshold = metrics::threshold_at_fpr(pool.human_scores(), fpr);
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // rows, hits
  std::vector<std::string> order = names;
  for (const auto& row : pool.rows) {
    if (row.main != corpus::kAI) continue;
    const auto& label = row.*field;
    std::string name = missing_name;
    if (label) {
      name = *label >= 0 && static_cast<std::size_t>(*label) < names.size()
                 ? names[*label]
                 : "label_" + std::to_string(*label);
    }
    if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);
    auto& c = counts[name];
    c.first += 1;
    if (row.score > rep.threshold) c.second += 1;
  }
  for (const auto& name : order) {
    auto it = counts.find(name);
    if (it == counts.end()) {
      rep.notes.push_back(name + ": no rows");
      continue;
    }
    rep.entries.push_back({name, it->second.first,
                           static_cast<double>(it->second.second) /
                               static_cast<double>(it->second.first)});
  }
  if (rep.entries.empty()) throw Error("pool missing class");
  return rep;
}

}  // namespace

BreakdownReport per_attack_report(const metrics::ScoredPool& pool, double fpr,
                                  const std::vector<std::string>& attack_names) {
  return breakdown(pool, fpr, attack_names, &metrics::ScoredRow::atk, "none");
}

BreakdownReport per_generator_report(const metrics::ScoredPool& pool, double fpr,
                                     const std::vector<std::string>& generator_names) {
  return breakdown(pool, fpr, generator_names, &metrics::ScoredRow::gen, "unknown");
}

std::string fpr_key(double fpr) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", fpr);
  return buf;
}

namespace {

json interval_json(const metrics::Interval& ci) {
  return {{"lo", ci.lo}, {"hi", ci.hi}, {"half_width", ci.half_width}};
}

json breakdown_json(const BreakdownReport& rep) {
  json entries = json::object();
  for (const auto& e : rep.entries) entries[e.name] = {{"tpr", e.tpr}, {"n_rows", e.n_rows}};
  json out = {{"threshold", rep.threshold}, {"entries", entries}};
  if (!rep.notes.empty()) out["notes"] = rep.notes;
  return out;
}

}  // namespace

json build_report(const metrics::ScoredPool& pool, const corpus::LabelSpace& space,
                  const ReportOptions& options) {
  const auto scores = pool.scores();
  const auto labels = pool.labels();
  json report;
  report["pool"] = options.pool_name;
  report["n_rows"] = pool.size();
  report["auroc"] = metrics::auroc(scores, labels);
  report["ci"] = interval_json(metrics::bootstrap_ci(scores, labels, metrics::MetricSpec::auroc(),
                                                     options.resamples, options.seed));
  json tpr = json::object(), per_attack = json::object(), per_generator = json::object();
  for (double fpr : options.fprs) {
    const auto metric = metrics::MetricSpec::tpr(fpr);
    const std::string key = fpr_key(fpr);
    tpr[key] = {{"value", metrics::tpr_at_fpr(scores, labels, fpr)},
                {"ci", interval_json(metrics::bootstrap_ci(scores, labels, metric,
                                                           options.resamples, options.seed))}};
    per_attack[key] = breakdown_json(per_attack_report(pool, fpr, space.names(corpus::Task::Atk)));
    per_generator[key] =
        breakdown_json(per_generator_report(pool, fpr, space.names(corpus::Task::Gen)));
  }
  report["tpr"] = tpr;
  report["per_attack"] = per_attack;
  report["per_generator"] = per_generator;
  return report;
}

}  // namespace meld::evalpipe
