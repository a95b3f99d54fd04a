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

// Experiment runner behind the command-line subcommands.
//
// Every command is a pure function of the configuration and the files it
// reads.  Per-trial work runs on a worker pool; rows are assembled in grid
// order, so the output does not depend on the thread count.

#ifndef ASVVOTE_EXPERIMENT_HPP_
#define ASVVOTE_EXPERIMENT_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asvvote/attack.hpp"
#include "asvvote/corpus.hpp"
#include "asvvote/defense.hpp"
#include "asvvote/metrics.hpp"
#include "asvvote/model.hpp"

namespace asvvote {

enum class AttackKind { kNone, kLimited, kPerfect };
enum class DefenseKind { kNone, kVoting, kGaussian, kMean, kMedian };

std::string_view attack_kind_name(AttackKind kind);
AttackKind parse_attack_kind(std::string_view name);
std::string_view defense_kind_name(DefenseKind kind);
DefenseKind parse_defense_kind(std::string_view name);

struct SweepVotesConfig {
  double epsilon = 5.0;
  double sigma = 15.0;
  std::vector<std::size_t> k_values = {0, 1, 2, 5, 10, 20, 50};
};

struct SweepItersConfig {
  double epsilon = 5.0;
  double sigma = 15.0;
  std::size_t k_votes = 5;
  std::vector<std::size_t> n_values = {1, 5, 10, 20, 40};
  // The same step for every N, so a larger N means a larger budget.
  // Defaults to epsilon / 5.
  std::optional<double> step_alpha;
};

struct ExperimentConfig {
  std::uint64_t seed = 20210;
  std::string out_dir = "run";
  std::string corpus_dir;  // empty: <out_dir>/corpus
  std::string checkpoint;  // empty: <out_dir>/model.ckpt
  std::size_t threads = 1;
  bool timing = true;

  CorpusConfig corpus;
  TrainConfig train;

  // evaluate: every attack setting against every defense setting.
  std::vector<AttackKind> attack_kinds = {AttackKind::kNone, AttackKind::kLimited};
  std::vector<double> epsilons = {1.0, 5.0, 10.0};
  std::size_t n_iters = 5;
  std::optional<double> step_alpha;  // default epsilon / n_iters
  bool export_adversarial = false;

  std::vector<DefenseKind> defense_kinds = {DefenseKind::kNone, DefenseKind::kVoting,
                                            DefenseKind::kGaussian, DefenseKind::kMean,
                                            DefenseKind::kMedian};
  std::vector<double> sigmas = {1.0, 15.0, 30.0, 60.0, 90.0, 120.0};
  std::size_t k_votes = 50;
  std::size_t kernel_size = 3;
  double gaussian_std = 1.0;

  SweepVotesConfig sweep_votes;
  SweepItersConfig sweep_iters;

  std::string corpus_path() const;
  std::string checkpoint_path() const;
  void validate() const;
};

struct AttackSetting {
  AttackKind kind = AttackKind::kNone;
  double epsilon = 0.0;
  std::size_t n_iters = 0;
  std::optional<double> step_alpha;
};

struct DefenseSetting {
  DefenseKind kind = DefenseKind::kNone;
  double sigma = 0.0;
  std::size_t k_votes = 0;
  FilterSpec filter;
};

// Grid order: attacks in config order (none first if listed), each epsilon
// in order; defenses likewise with voting expanded over the sigmas.
std::vector<AttackSetting> attack_grid(const ExperimentConfig& config);
std::vector<DefenseSetting> defense_grid(const ExperimentConfig& config);

struct ReportRow {
  AttackSetting attack;
  DefenseSetting defense;
  double far = 0.0;
  double frr = 0.0;
  std::size_t n_trials = 0;
  double wall_time = 0.0;
  std::optional<std::size_t> budget;  // forward+backward passes per trial
};

// attack_kind,epsilon,n_iters,defense_kind,sigma,k_votes,far,frr,n_trials,wall_time
// (plus budget when any row carries one).  Not-applicable cells are empty.
std::string format_report(const std::vector<ReportRow>& rows, bool timing);
void write_report(const std::string& path, const std::vector<ReportRow>& rows, bool timing);

// Stops glibc from returning the top of the heap to the kernel after every
// large free.  Scoring allocates and frees waveform-sized buffers in a tight
// loop, and the default trimming turns that into brk churn (about a quarter
// of the run time).  No-op elsewhere.
void tune_allocator();

// Runs fn(i) for i in [0, n) on `threads` workers.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

// Shared state for evaluating one model on one corpus: cached embeddings,
// clean scores and the threshold calibrated on the development trials.
class Evaluator {
 public:
  Evaluator(const Corpus& corpus, const AsvModel& model, const ExperimentConfig& config);

  const Threshold& threshold() const { return threshold_; }
  const std::vector<Trial>& dev_trials() const { return dev_; }
  const std::vector<Trial>& eval_trials() const { return eval_; }
  const std::vector<double>& dev_scores() const { return dev_scores_; }
  const std::vector<double>& eval_scores() const { return eval_scores_; }

  std::uint64_t defense_seed(const Trial& t) const;
  std::uint64_t attack_seed(const Trial& t) const;

  // Adversarial test waveforms for every evaluation trial.  For kPerfect the
  // attacker differentiates through `defense`.
  std::vector<AdversarialResult> attack(const AttackSetting& attack,
                                        const DefenseSetting& defense) const;

  // Defended scores of the evaluation trials; `inputs` are the test
  // waveforms (clean when empty).
  std::vector<double> defended_scores(const DefenseSetting& defense,
                                      const std::vector<AdversarialResult>* inputs) const;

  ReportRow row(const AttackSetting& attack, const DefenseSetting& defense,
                std::span<const double> scores, double wall_time) const;

  // `on_attack` sees each batch of adversarial waveforms once; the defense
  // is kNone unless the attacker adapted to it.
  using AttackCallback = std::function<void(const AttackSetting&, const DefenseSetting&,
                                            const std::vector<AdversarialResult>&)>;
  std::vector<ReportRow> evaluate_grid(const AttackCallback& on_attack = {}) const;
  std::vector<ReportRow> sweep_votes() const;
  std::vector<ReportRow> sweep_iters() const;

 private:
  const Corpus& corpus_;
  const AsvModel& model_;
  ExperimentConfig config_;
  std::vector<Trial> dev_;
  std::vector<Trial> eval_;
  std::map<std::string, std::size_t> index_;   // utterance id -> position
  std::vector<std::vector<double>> embeddings_;
  std::vector<double> dev_scores_;
  std::vector<double> eval_scores_;
  Threshold threshold_;

  const std::vector<double>& embedding(const std::string& utterance_id) const;
  const std::vector<double>& waveform(const std::string& utterance_id) const;
};

// Subcommands.  Each returns normally only when every requested output was
// written; failures throw Error with the failing stage in the message.
std::uint64_t cmd_gen_corpus(const ExperimentConfig& config);
TrainResult cmd_train(const ExperimentConfig& config);
std::vector<ReportRow> cmd_evaluate(const ExperimentConfig& config);
std::vector<ReportRow> cmd_sweep_votes(const ExperimentConfig& config);
std::vector<ReportRow> cmd_sweep_iters(const ExperimentConfig& config);

// Training data and per-epoch dev EER for a corpus.
std::vector<LabeledWaveform> training_set(const Corpus& corpus);
double dev_eer(const AsvModel& model, const Corpus& corpus, std::size_t threads = 1);

}  // namespace asvvote

#endif  // ASVVOTE_EXPERIMENT_HPP_
