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

#include <chrono>
#include <map>

#include "meld/evalpipe.hpp"

namespace meld::evalpipe {

void AblationVariant::apply(trainer::TrainConfig& config) const {
  config.use_aux = use_aux;
  config.use_kendall = use_kendall;
  if (!use_ema) config.weights.lambda_ema = 0.0;
  if (!use_rank) config.weights.lambda_rank = 0.0;
}

std::vector<AblationVariant> ablation_variants() {
  return {
      {"full", true, true, true, true},
      {"dense", false, false, true, true},
      {"no_rank", true, true, true, false},
      {"no_ema", true, true, false, true},
      {"fixed_weights", true, false, true, true},
  };
}

const AblationRun& AblationResult::run(const std::string& variant, std::uint64_t seed) const {
  for (const auto& r : runs) {
    if (r.variant == variant && r.seed == seed) return r;
  }
  throw Error("no ablation run for " + variant + " seed " + std::to_string(seed));
}

json AblationResult::to_json() const {
  json out;
  json jruns = json::array();
  std::map<std::string, std::vector<const AblationRun*>> by_variant;
  std::vector<std::string> order;
  for (const auto& r : runs) {
    jruns.push_back({{"variant", r.variant},
                     {"seed", r.seed},
                     {"auroc", r.auroc},
                     {"tpr@0.05", r.tpr5},
                     {"tpr@0.01", r.tpr1},
                     {"seconds", r.seconds}});
    if (!by_variant.count(r.variant)) order.push_back(r.variant);
    by_variant[r.variant].push_back(&r);
  }
  out["runs"] = jruns;
  json summary = json::object();
  for (const auto& name : order) {
    double auroc = 0.0, t5 = 0.0, t1 = 0.0;
    const auto& rs = by_variant[name];
    for (const auto* r : rs) {
      auroc += r->auroc;
      t5 += r->tpr5;
      t1 += r->tpr1;
    }
    const double n = static_cast<double>(rs.size());
    summary[name] = {{"auroc", auroc / n}, {"tpr@0.05", t5 / n}, {"tpr@0.01", t1 / n}};
  }
  out["mean"] = summary;
  json comps = json::array();
  for (const auto& c : comparisons) {
    auto diff = [](const metrics::PairedDiff& d) {
      return json{{"point", d.point}, {"lo", d.lo}, {"hi", d.hi}, {"significant", d.significant}};
    };
    comps.push_back({{"variant", c.variant},
                     {"seed", c.seed},
                     {"delta_tpr@0.05", diff(c.tpr5)},
                     {"delta_tpr@0.01", diff(c.tpr1)}});
  }
  out["full_minus_variant"] = comps;
  out["data_order_shared"] = data_order_shared;
  out["seconds"] = seconds;
  return out;
}

AblationResult ablation_experiment(const AblationConfig& config, const ProgressFn& progress) {
  const synth::DeskDataset data = synth::make_desk_dataset(config.synth, config.sizes);
  return ablation_experiment(config, data, progress);
}

AblationResult ablation_experiment(const AblationConfig& config, const synth::DeskDataset& data,
                                   const ProgressFn& progress) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  if (config.seeds.empty()) throw Error("ablation: no seeds");
  AblationResult result;
  const auto variants = ablation_variants();
  for (std::uint64_t seed : config.seeds) {
    std::uint64_t shared_hash = 0;
    for (const auto& v : variants) {
      const auto t_run = Clock::now();
      trainer::TrainConfig cfg = config.train;
      v.apply(cfg);
      cfg.seed = seed;
      cfg.dims.generators = data.space.count(corpus::Task::Gen);
      cfg.dims.attacks = data.space.count(corpus::Task::Atk);
      cfg.dims.domains = data.space.count(corpus::Task::Dom);
      trainer::TrainData td{&data.train, data.mixture, &data.validation};
      const auto trained = trainer::run_training(cfg, td);

      AblationRun run;
      run.variant = v.name;
      run.seed = seed;
      run.batch_hash = trained.batch_hash;
      run.scores = score_pool(trained.final_params, data.eval, config.chunks);
      run.auroc = metrics::auroc(run.scores);
      run.tpr5 = metrics::tpr_at_fpr(run.scores, 0.05);
      run.tpr1 = metrics::tpr_at_fpr(run.scores, 0.01);
      run.seconds = std::chrono::duration<double>(Clock::now() - t_run).count();
      if (&v == &variants.front()) {
        shared_hash = run.batch_hash;
      } else if (run.batch_hash != shared_hash) {
        result.data_order_shared = false;
      }
      if (progress) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s seed=%llu auroc=%.4f tpr@5=%.4f tpr@1=%.4f (%.1fs)",
                      v.name.c_str(), static_cast<unsigned long long>(seed), run.auroc, run.tpr5,
                      run.tpr1, run.seconds);
        progress(buf);
      }
      result.runs.push_back(std::move(run));
    }
    const AblationRun& full = result.run("full", seed);
    for (const auto& v : variants) {
      if (v.name == "full") continue;
      const AblationRun& other = result.run(v.name, seed);
      AblationComparison c;
      c.variant = v.name;
      c.seed = seed;
      c.tpr5 = metrics::paired_diff_ci(full.scores, other.scores, metrics::MetricSpec::tpr(0.05),
                                       config.resamples, config.bootstrap_seed);
      c.tpr1 = metrics::paired_diff_ci(full.scores, other.scores, metrics::MetricSpec::tpr(0.01),
                                       config.resamples, config.bootstrap_seed);
      result.comparisons.push_back(c);
    }
  }
  result.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return result;
}

}  // namespace meld::evalpipe
