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


#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "config_file.hpp"
#include "doctest.h"
#include "meld/metrics.hpp"
#include "meld/model.hpp"

using namespace meld;
using namespace meld::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("meld_test_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

int run_args(std::vector<std::string> args) {
  args.insert(args.begin(), "meld");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("key-value config parsing") {
  auto c = KeyValueConfig::parse("# comment\nseed = 7\n\nlr_peak=0.5  # trailing\nname = a b\n");
  CHECK(c.get_uint("seed", 0) == 7);
  CHECK(c.get_double("lr_peak", 0.0) == 0.5);
  CHECK(c.get_string("name", "") == "a b");
  CHECK(c.get_int("missing", -3) == -3);
  CHECK_NOTHROW(c.reject_unused());

  auto u = KeyValueConfig::parse("seed = 1\nsede = 2\n");
  u.get_uint("seed", 0);
  CHECK_THROWS_WITH(u.reject_unused(), doctest::Contains("unknown key"));
  CHECK_THROWS_WITH(u.reject_unused(), doctest::Contains("sede"));

  CHECK_THROWS(KeyValueConfig::parse("no equals sign\n"));
  CHECK_THROWS(KeyValueConfig::parse("a = 1\na = 2\n"));
  auto bad = KeyValueConfig::parse("seed = seven\nflag = maybe\n");
  CHECK_THROWS(bad.get_uint("seed", 0));
  CHECK_THROWS(bad.get_bool("flag", false));
  auto lists = KeyValueConfig::parse("seeds = 1, 2,3\nuse_aux = false\n");
  CHECK(lists.get_uint_list("seeds", {}) == std::vector<std::uint64_t>{1, 2, 3});
  CHECK_FALSE(lists.get_bool("use_aux", true));
}

TEST_CASE("training config keys map onto the trainer") {
  auto c = KeyValueConfig::parse(
      "seed = 9\nhidden = 32\nvocab = 1024\ntotal_steps = 40\nwarmup_steps = 4\n"
      "lr_peak = 0.001\nlambda_rank = 0.25\nuse_kendall = false\nema_beta = 0.9\n");
  auto t = read_train_config(c);
  CHECK(t.seed == 9);
  CHECK(t.dims.hidden == 32);
  CHECK(t.dims.vocab == 1024);
  CHECK(t.optim.total_steps == 40);
  CHECK(t.optim.warmup_steps == 4);
  CHECK(t.optim.lr_peak == 0.001);
  CHECK(t.weights.lambda_rank == 0.25);
  CHECK_FALSE(t.use_kendall);
  CHECK(t.ema_beta == 0.9);
  CHECK_NOTHROW(c.reject_unused());
}

TEST_CASE("the shipped ablation config parses") {
  const auto c = KeyValueConfig::load(std::string(MELD_SOURCE_DIR) + "/configs/desk_ablation.cfg");
  const auto a = read_ablation_config(c);
  CHECK_NOTHROW(c.reject_unused());
  CHECK(a.seeds == std::vector<std::uint64_t>{1, 2, 3});
  CHECK(a.synth.n_generators == 4);
  CHECK(a.synth.n_domains == 3);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run_args({"eval", "--bogus"}) == 2);
  CHECK(run_args({"train"}) == 2);
  CHECK(run_args({"frobnicate"}) == 2);
  CHECK(run_args({}) == 2);
}

TEST_CASE("eval on a one-class pool fails with a clear message") {
  TempDir dir("oneclass");
  const std::string pool = dir.file("pool.jsonl");
  write_text(pool,
             "{\"id\":\"a\",\"text\":\"only human text here\",\"main\":\"human\",\"source\":\"s\"}\n"
             "{\"id\":\"b\",\"text\":\"another human line\",\"main\":\"human\",\"source\":\"s\"}\n");
  model::ModelDims dims;
  dims.vocab = 64;
  dims.hidden = 4;
  dims.generators = 1;
  dims.attacks = 1;
  dims.domains = 1;
  const std::string ckpt = dir.file("m.ckpt");
  model::save_checkpoint(model::ModelParams::init(dims, 1), ckpt);
  EvalOptions o;
  o.checkpoint = ckpt;
  o.pool = pool;
  o.out = dir.file("r.json");
  o.resamples = 100;
  CHECK_THROWS_WITH(cmd_eval(o), doctest::Contains("pool missing class"));
  CHECK(run_args({"eval", "--ckpt", ckpt, "--pool", pool, "--out", o.out}) == 1);
  CHECK(run_args({"eval", "--ckpt", dir.file("none.ckpt"), "--pool", pool, "--out", o.out}) == 1);
}

TEST_CASE("synth, train, attack, eval and report through the command line") {
  TempDir dir("pipeline");
  write_text(dir.file("train.cfg"), "n_generators = 2\nn_domains = 2\nrows_per_cell = 20\nseed = 1\n");
  write_text(dir.file("val.cfg"),
             "n_generators = 2\nn_domains = 2\nrows_per_cell = 6\nseed = 2\nid_prefix = v-\n");
  write_text(dir.file("eval.cfg"), "n_generators = 2\nn_domains = 2\nrows_per_cell = 8\n"
                                   "attack_fraction = 0\nseed = 3\nid_prefix = e-\n");
  REQUIRE(run_args({"synth", "--spec", dir.file("train.cfg"), "--out", dir.file("train.jsonl")}) == 0);
  REQUIRE(run_args({"synth", "--spec", dir.file("val.cfg"), "--out", dir.file("val.jsonl")}) == 0);
  REQUIRE(run_args({"synth", "--spec", dir.file("eval.cfg"), "--out", dir.file("eval.jsonl")}) == 0);
  CHECK(fs::exists(labels_path_for(dir.file("train.jsonl"))));

  write_text(dir.file("model.cfg"),
             "train = train.jsonl\nvalidation = val.jsonl\nseed = 5\nvocab = 512\nhidden = 8\n"
             "total_steps = 20\nwarmup_steps = 2\nlr_peak = 0.01\nbatch_size = 8\n"
             "eval_every = 10\nswa_start = 10\nmax_seq_len = 128\n");
  REQUIRE(run_args({"train", "--config", dir.file("model.cfg"), "--out", dir.file("m.ckpt")}) == 0);
  const auto first = model::load_checkpoint(dir.file("m.ckpt")).hash();
  const auto again = cmd_train(dir.file("model.cfg"), dir.file("m2.ckpt"));
  CHECK(again.checkpoint_hash == first);
  CHECK(again.swa_steps.size() == 2);
  {
    std::ifstream diag(dir.file("m.ckpt") + ".diag.csv");
    std::string header;
    std::getline(diag, header);
    CHECK(header.rfind("step,lr,L_main", 0) == 0);
  }

  REQUIRE(run_args({"attack", "--in", dir.file("eval.jsonl"), "--out", dir.file("eval_att.jsonl"),
                    "--kinds", "homoglyph,case_flip", "--rate", "0.1", "--seed", "4"}) == 0);
  REQUIRE(run_args({"eval", "--ckpt", dir.file("m.ckpt"), "--pool", dir.file("eval_att.jsonl"),
                    "--out", dir.file("report.json"), "--scores", dir.file("a.csv"),
                    "--resamples", "200"}) == 0);
  std::ifstream rin(dir.file("report.json"));
  const auto report = nlohmann::json::parse(rin);
  CHECK(report["per_attack"]["0.05"]["entries"].contains("homoglyph"));
  CHECK(report["per_attack"]["0.05"]["entries"].contains("case_flip"));

  REQUIRE(run_args({"eval", "--ckpt", dir.file("m2.ckpt"), "--pool", dir.file("eval_att.jsonl"),
                    "--out", dir.file("report2.json"), "--scores", dir.file("b.csv"),
                    "--resamples", "200"}) == 0);
  REQUIRE(run_args({"report", "--a", dir.file("a.csv"), "--b", dir.file("b.csv"), "--out",
                    dir.file("diff.json"), "--resamples", "200"}) == 0);
  std::ifstream din(dir.file("diff.json"));
  const auto diff = nlohmann::json::parse(din);
  CHECK(diff.dump().find("point") != std::string::npos);
}
