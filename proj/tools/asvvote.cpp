// Copyright 2026 The asvvote Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end.  Settings come from the built-in defaults, then
// the --config file, then the flags, each overriding the one before.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "asvvote/config.hpp"
#include "asvvote/experiment.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> threads;
  bool no_timing = false;
};

asvvote::ExperimentConfig resolve(const Overrides& o) {
  asvvote::ExperimentConfig c;
  if (!o.config_path.empty()) c = asvvote::load_config(o.config_path, c);
  if (o.seed) c.seed = *o.seed;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.threads) c.threads = *o.threads;
  if (o.no_timing) c.timing = false;
  c.validate();
  return c;
}

void print_rows(const std::vector<asvvote::ReportRow>& rows, const std::string& path,
                bool timing) {
  std::fputs(asvvote::format_report(rows, timing).c_str(), stdout);
  fmt::print(stderr, "wrote {} rows to {}\n", rows.size(), path);
}

}  // namespace

int main(int argc, char** argv) {
  asvvote::tune_allocator();
  CLI::App app{"Adversarial attacks and voting defenses on a toy speaker verifier"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config_path, "YAML config file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Global seed");
  app.add_option("--out", o.out_dir, "Output directory");
  app.add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--no-timing", o.no_timing, "Write 0 in the wall_time column");
  app.fallthrough();

  auto* gen = app.add_subcommand("gen-corpus", "Synthesize the corpus, manifest and trials");
  auto* train = app.add_subcommand("train", "Train the speaker embedding model");
  auto* eval = app.add_subcommand("evaluate", "Attack and defense grid -> report.csv");
  auto* votes = app.add_subcommand("sweep-votes", "FAR/FRR versus number of votes");
  auto* iters = app.add_subcommand("sweep-iters", "Perfect-knowledge FAR versus attack iterations");

  CLI11_PARSE(app, argc, argv);

  try {
    const asvvote::ExperimentConfig c = resolve(o);
    if (gen->parsed()) {
      const std::uint64_t hash = asvvote::cmd_gen_corpus(c);
      fmt::print("{:016x}\n", hash);
      fmt::print(stderr, "corpus written to {}\n", c.corpus_path());
    } else if (train->parsed()) {
      const asvvote::TrainResult r = asvvote::cmd_train(c);
      for (const auto& e : r.history) {
        fmt::print("epoch {} loss {:.6f}{}\n", e.epoch, e.loss,
                   e.dev_eer ? fmt::format(" dev_eer {:.4f}", *e.dev_eer) : "");
      }
      fmt::print(stderr, "checkpoint written to {}\n", c.checkpoint_path());
    } else if (eval->parsed()) {
      print_rows(asvvote::cmd_evaluate(c), c.out_dir + "/report.csv", c.timing);
    } else if (votes->parsed()) {
      print_rows(asvvote::cmd_sweep_votes(c), c.out_dir + "/sweep_votes.csv", c.timing);
    } else if (iters->parsed()) {
      print_rows(asvvote::cmd_sweep_iters(c), c.out_dir + "/sweep_iters.csv", c.timing);
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
