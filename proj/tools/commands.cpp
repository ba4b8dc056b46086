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

#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "CLI11.hpp"
#include "config_file.hpp"
#include "meld/attacks.hpp"
#include "meld/evalpipe.hpp"
#include "meld/metrics.hpp"
#include "meld/model.hpp"
#include "meld/synth.hpp"
#include "meld/trainer.hpp"

namespace meld::cli {

using nlohmann::json;

std::string labels_path_for(const std::string& jsonl_path) { return jsonl_path + ".labels.json"; }

corpus::LabelSpace resolve_labels(const std::string& explicit_path, const std::string& jsonl_path) {
  if (!explicit_path.empty()) return corpus::load_label_space(explicit_path);
  const std::string sidecar = labels_path_for(jsonl_path);
  if (std::filesystem::exists(sidecar)) return corpus::load_label_space(sidecar);
  return corpus::infer_label_space(jsonl_path);
}

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("write failed: " + path);
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_corpus(const std::vector<corpus::TextRecord>& rows, const corpus::LabelSpace& space,
                  const std::string& path) {
  corpus::save_jsonl(rows, space, path);
  corpus::save_label_space(space, labels_path_for(path));
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

corpus::MixtureSpec proportional_mixture(const std::vector<corpus::TextRecord>& rows) {
  std::vector<std::string> order;
  std::map<std::string, std::size_t> counts;
  for (const auto& r : rows) {
    if (counts[r.source]++ == 0) order.push_back(r.source);
  }
  corpus::MixtureSpec mix;
  for (const auto& s : order) {
    mix.entries.push_back({s, static_cast<double>(counts[s]) / static_cast<double>(rows.size())});
  }
  return mix;
}

model::ModelDims dims_for(const corpus::LabelSpace& space, model::ModelDims dims) {
  dims.generators = std::max<std::size_t>(1, space.count(corpus::Task::Gen));
  dims.attacks = std::max<std::size_t>(1, space.count(corpus::Task::Atk));
  dims.domains = std::max<std::size_t>(1, space.count(corpus::Task::Dom));
  return dims;
}

std::vector<double> parse_fprs(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || item.empty() || !(v > 0.0 && v < 1.0)) {
      throw Error("bad fpr '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw Error("no fpr values");
  return out;
}

}  // namespace

void cmd_synth(const std::string& spec_path, const std::string& out_path) {
  const auto cfg = KeyValueConfig::load(spec_path);
  const synth::SynthSpec spec = read_synth_spec(cfg);
  cfg.reject_unused();
  write_corpus(synth::generate(spec), synth::label_space(spec), out_path);
}

TrainOutcome cmd_train(const std::string& config_path, const std::string& out_path,
                       const std::string& diagnostics_path) {
  const auto cfg = KeyValueConfig::load(config_path);
  trainer::TrainConfig tc = read_train_config(cfg);
  const TrainFiles files = read_train_files(cfg);
  const std::string exclude = cfg.path_value("exclude");
  cfg.reject_unused();

  const corpus::LabelSpace space = resolve_labels(files.labels, files.train);
  auto train_rows = corpus::load_jsonl(files.train, space);
  const auto val_rows = corpus::load_jsonl(files.validation, space);
  if (!exclude.empty()) {
    std::unordered_set<std::uint64_t> hashes;
    for (const auto& r : corpus::load_jsonl(exclude, resolve_labels("", exclude))) {
      hashes.insert(corpus::text_hash(r.text));
    }
    train_rows = corpus::dedup_against(train_rows, hashes);
  }
  if (train_rows.empty()) throw Error("empty training corpus");

  trainer::TrainData data;
  data.train = &train_rows;
  data.validation = &val_rows;
  data.mixture = files.mixture.empty() ? proportional_mixture(train_rows)
                                       : corpus::load_mixture(files.mixture);
  tc.dims = dims_for(space, tc.dims);
  tc.attack.seed = tc.seed;
  if (!files.lexicon.empty()) {
    tc.attack.lexicon =
        std::make_shared<attacks::SynonymLexicon>(attacks::load_synonym_tsv(files.lexicon));
  }
  if (!files.homoglyphs.empty()) {
    tc.attack.homoglyphs =
        std::make_shared<attacks::HomoglyphTable>(attacks::load_homoglyph_json(files.homoglyphs));
  }

  const std::string diag_path = diagnostics_path.empty() ? out_path + ".diag.csv" : diagnostics_path;
  std::ofstream diag(diag_path, std::ios::binary);
  if (!diag) throw Error("cannot write " + diag_path);
  trainer::write_diagnostics_header(diag);
  const auto result = trainer::run_training(tc, data, [&](const trainer::StepDiagnostics& d) {
    trainer::write_diagnostics_row(diag, d);
  });
  if (!diag) throw Error("write failed: " + diag_path);
  model::save_checkpoint(result.final_params, out_path);

  TrainOutcome outcome;
  outcome.checkpoint_hash = result.final_params.hash();
  outcome.final_val_auroc = result.val_history.empty() ? 0.0 : result.val_history.back().second;
  outcome.swa_steps = result.swa_steps;
  return outcome;
}

void cmd_attack(const AttackOptions& o) {
  const corpus::LabelSpace space = resolve_labels(o.labels, o.in);
  const auto rows = corpus::load_jsonl(o.in, space);
  attacks::AttackConfig cfg;
  cfg.rate = o.rate;
  cfg.seed = o.seed;
  cfg.lexicon = std::make_shared<attacks::SynonymLexicon>(
      o.lexicon.empty() ? attacks::builtin_lexicon() : attacks::load_synonym_tsv(o.lexicon));
  if (!o.homoglyphs.empty()) {
    cfg.homoglyphs =
        std::make_shared<attacks::HomoglyphTable>(attacks::load_homoglyph_json(o.homoglyphs));
  }
  cfg.validate();
  const auto kinds = attacks::parse_attack_list(o.kinds);
  std::vector<corpus::TextRecord> targets;
  for (const auto& r : rows) {
    if (o.all_rows || r.main_label == corpus::kAI) targets.push_back(r);
  }
  auto attacked = attacks::build_attacked_pool(targets, kinds, cfg, space);
  std::vector<corpus::TextRecord> out;
  if (!o.attacked_only) out = rows;
  out.insert(out.end(), std::make_move_iterator(attacked.begin()),
             std::make_move_iterator(attacked.end()));
  write_corpus(out, space, o.out);
}

json cmd_eval(const EvalOptions& o) {
  const model::ModelParams params = model::load_checkpoint(o.checkpoint);
  const corpus::LabelSpace space = resolve_labels(o.labels, o.pool);
  const auto rows = corpus::load_jsonl(o.pool, space);
  evalpipe::ChunkConfig chunks;
  chunks.chunk_len = o.chunk_len;
  chunks.stride = o.stride;
  chunks.aggregation = o.max_aggregation ? evalpipe::Aggregation::Max : evalpipe::Aggregation::Mean;
  const metrics::ScoredPool pool = evalpipe::score_pool(params, rows, chunks);
  if (!o.scores_out.empty()) metrics::save_scores_csv(pool, o.scores_out);
  evalpipe::ReportOptions ro;
  ro.pool_name = std::filesystem::path(o.pool).filename().string();
  ro.fprs = o.fprs;
  ro.resamples = o.resamples;
  ro.seed = o.seed;
  const json report = evalpipe::build_report(pool, space, ro);
  write_json(o.out, report);
  return report;
}

json cmd_ablate(const std::string& config_path, const std::string& out_dir) {
  const auto cfg = KeyValueConfig::load(config_path);
  const evalpipe::AblationConfig ac = read_ablation_config(cfg);
  cfg.reject_unused();
  std::filesystem::create_directories(out_dir);
  const auto result = evalpipe::ablation_experiment(
      ac, [](const std::string& line) { std::cerr << line << std::endl; });
  for (const auto& run : result.runs) {
    const auto path = std::filesystem::path(out_dir) /
                      ("scores_" + run.variant + "_seed" + std::to_string(run.seed) + ".csv");
    metrics::save_scores_csv(run.scores, path.string());
  }
  json j = result.to_json();
  write_json((std::filesystem::path(out_dir) / "ablation.json").string(), j);
  return j;
}

json cmd_report(const ReportOptions& o) {
  const auto a = metrics::load_scores_csv(o.a);
  const auto b = metrics::load_scores_csv(o.b);
  json out;
  out["a"] = o.a;
  out["b"] = o.b;
  out["n_rows"] = a.size();
  auto put = [&](const std::string& name, const metrics::MetricSpec& m) {
    const auto d = metrics::paired_diff_ci(a, b, m, o.resamples, o.seed);
    out["delta"][name] = {{"point", d.point}, {"lo", d.lo}, {"hi", d.hi}, {"significant", d.significant}};
  };
  put("auroc", metrics::MetricSpec::auroc());
  for (double f : o.fprs) put("tpr@" + evalpipe::fpr_key(f), metrics::MetricSpec::tpr(f));
  write_json(o.out, out);
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"meld: machine-text detector training and evaluation"};
  app.require_subcommand(1);

  std::string spec_path, out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
  synth_cmd->add_option("--spec", spec_path, "Synth spec (key = value)")->required();
  synth_cmd->add_option("--out", out, "Output JSONL")->required();

  std::string config_path, diag_path;
  auto* train_cmd = app.add_subcommand("train", "Train a detector; writes the SWA checkpoint");
  train_cmd->add_option("--config", config_path, "Training config (key = value)")->required();
  train_cmd->add_option("--out", out, "Output checkpoint")->required();
  train_cmd->add_option("--diag", diag_path, "Diagnostics CSV (default <out>.diag.csv)");

  AttackOptions ao;
  auto* attack_cmd = app.add_subcommand("attack", "Append attacked copies of AI rows");
  attack_cmd->add_option("--in", ao.in, "Input JSONL")->required();
  attack_cmd->add_option("--out", ao.out, "Output JSONL")->required();
  attack_cmd->add_option("--kinds", ao.kinds, "Comma-separated attack kinds");
  attack_cmd->add_option("--rate", ao.rate, "Perturbation rate");
  attack_cmd->add_option("--seed", ao.seed, "Seed");
  attack_cmd->add_option("--labels", ao.labels, "Label-space JSON");
  attack_cmd->add_option("--lexicon", ao.lexicon, "Synonym TSV");
  attack_cmd->add_option("--homoglyphs", ao.homoglyphs, "Homoglyph JSON");
  attack_cmd->add_flag("--attacked-only", ao.attacked_only, "Write only the attacked copies");
  attack_cmd->add_flag("--all-rows", ao.all_rows, "Attack human rows as well");

  EvalOptions eo;
  std::string fprs = "0.05,0.01";
  auto* eval_cmd = app.add_subcommand("eval", "Score a pool and write a metric report");
  eval_cmd->add_option("--ckpt", eo.checkpoint, "Checkpoint")->required();
  eval_cmd->add_option("--pool", eo.pool, "Pool JSONL")->required();
  eval_cmd->add_option("--out", eo.out, "Report JSON")->required();
  eval_cmd->add_option("--fpr", fprs, "Comma-separated FPR targets");
  eval_cmd->add_option("--labels", eo.labels, "Label-space JSON");
  eval_cmd->add_option("--scores", eo.scores_out, "Also write per-row scores CSV");
  eval_cmd->add_option("--chunk-len", eo.chunk_len, "Window length in features");
  eval_cmd->add_option("--stride", eo.stride, "Window stride (0: chunk-len/2)");
  eval_cmd->add_flag("--max-aggregate", eo.max_aggregation, "Max instead of mean over windows");
  eval_cmd->add_option("--resamples", eo.resamples, "Bootstrap resamples");
  eval_cmd->add_option("--seed", eo.seed, "Bootstrap seed");

  std::string out_dir;
  auto* ablate_cmd = app.add_subcommand("ablate", "Train all ablation variants and compare");
  ablate_cmd->add_option("--config", config_path, "Ablation config (key = value)")->required();
  ablate_cmd->add_option("--out", out_dir, "Output directory")->required();

  ReportOptions ro;
  std::string report_fprs = "0.05,0.01";
  auto* report_cmd = app.add_subcommand("report", "Paired bootstrap difference of two score files");
  report_cmd->add_option("--a", ro.a, "Scores CSV of detector A")->required();
  report_cmd->add_option("--b", ro.b, "Scores CSV of detector B")->required();
  report_cmd->add_option("--out", ro.out, "Output JSON")->required();
  report_cmd->add_option("--fpr", report_fprs, "Comma-separated FPR targets");
  report_cmd->add_option("--resamples", ro.resamples, "Bootstrap resamples");
  report_cmd->add_option("--seed", ro.seed, "Bootstrap seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (synth_cmd->parsed()) {
      cmd_synth(spec_path, out);
    } else if (train_cmd->parsed()) {
      const auto t = cmd_train(config_path, out, diag_path);
      std::printf("checkpoint %s hash %s val_auroc %.6f\n", out.c_str(),
                  hex64(t.checkpoint_hash).c_str(), t.final_val_auroc);
    } else if (attack_cmd->parsed()) {
      cmd_attack(ao);
    } else if (eval_cmd->parsed()) {
      eo.fprs = parse_fprs(fprs);
      const json r = cmd_eval(eo);
      std::printf("auroc %.6f\n", r["auroc"].get<double>());
    } else if (ablate_cmd->parsed()) {
      cmd_ablate(config_path, out_dir);
    } else if (report_cmd->parsed()) {
      ro.fprs = parse_fprs(report_fprs);
      cmd_report(ro);
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& c : msg) {
      if (c == '\n') c = ' ';
    }
    std::cerr << "error: " << msg << "\n";
    return 1;
  }
  return 0;
}

}  // namespace meld::cli
