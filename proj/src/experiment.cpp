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

#include "asvvote/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include <fmt/format.h>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "asvvote/error.hpp"
#include "asvvote/rng.hpp"
#include "asvvote/wav.hpp"

namespace asvvote {

namespace fs = std::filesystem;

std::string_view attack_kind_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::kNone:
      return "none";
    case AttackKind::kLimited:
      return "limited";
    case AttackKind::kPerfect:
      return "perfect";
  }
  return "unknown";
}

AttackKind parse_attack_kind(std::string_view name) {
  if (name == "none") return AttackKind::kNone;
  if (name == "limited") return AttackKind::kLimited;
  if (name == "perfect") return AttackKind::kPerfect;
  throw Error("unknown attack kind '" + std::string(name) + "'");
}

std::string_view defense_kind_name(DefenseKind kind) {
  switch (kind) {
    case DefenseKind::kNone:
      return "none";
    case DefenseKind::kVoting:
      return "voting";
    case DefenseKind::kGaussian:
      return "gaussian";
    case DefenseKind::kMean:
      return "mean";
    case DefenseKind::kMedian:
      return "median";
  }
  return "unknown";
}

DefenseKind parse_defense_kind(std::string_view name) {
  if (name == "none") return DefenseKind::kNone;
  if (name == "voting") return DefenseKind::kVoting;
  if (name == "gaussian") return DefenseKind::kGaussian;
  if (name == "mean") return DefenseKind::kMean;
  if (name == "median") return DefenseKind::kMedian;
  throw Error("unknown defense kind '" + std::string(name) + "'");
}

std::string ExperimentConfig::corpus_path() const {
  return corpus_dir.empty() ? (fs::path(out_dir) / "corpus").string() : corpus_dir;
}

std::string ExperimentConfig::checkpoint_path() const {
  return checkpoint.empty() ? (fs::path(out_dir) / "model.ckpt").string() : checkpoint;
}

void ExperimentConfig::validate() const {
  if (threads < 1) throw Error("config: threads must be >= 1");
  if (out_dir.empty()) throw Error("config: output directory is empty");
  if (n_iters < 1) throw Error("config: attack.n_iters must be >= 1");
  for (double e : epsilons) {
    if (!(e >= 0.0)) throw Error("config: attack epsilons must be >= 0");
  }
  for (double s : sigmas) {
    if (!(s >= 0.0)) throw Error("config: defense sigmas must be >= 0");
  }
  FilterSpec{FilterKind::kGaussian, kernel_size, gaussian_std}.validate();
  if (sweep_votes.k_values.empty()) throw Error("config: sweep_votes.k_values is empty");
  if (sweep_iters.n_values.empty()) throw Error("config: sweep_iters.n_values is empty");
  for (std::size_t n : sweep_iters.n_values) {
    if (n < 1) throw Error("config: sweep_iters.n_values must be >= 1");
  }
}

std::vector<AttackSetting> attack_grid(const ExperimentConfig& config) {
  std::vector<AttackSetting> grid;
  for (AttackKind kind : config.attack_kinds) {
    if (kind == AttackKind::kNone) {
      grid.push_back({});
      continue;
    }
    for (double eps : config.epsilons) {
      grid.push_back({kind, eps, config.n_iters, config.step_alpha});
    }
  }
  return grid;
}

std::vector<DefenseSetting> defense_grid(const ExperimentConfig& config) {
  std::vector<DefenseSetting> grid;
  for (DefenseKind kind : config.defense_kinds) {
    switch (kind) {
      case DefenseKind::kNone:
        grid.push_back({});
        break;
      case DefenseKind::kVoting:
        for (double sigma : config.sigmas) {
          grid.push_back({DefenseKind::kVoting, sigma, config.k_votes, {}});
        }
        break;
      case DefenseKind::kGaussian:
      case DefenseKind::kMean:
      case DefenseKind::kMedian: {
        DefenseSetting d;
        d.kind = kind;
        d.filter.kind = kind == DefenseKind::kGaussian ? FilterKind::kGaussian
                        : kind == DefenseKind::kMean   ? FilterKind::kMean
                                                       : FilterKind::kMedian;
        d.filter.kernel_size = config.kernel_size;
        d.filter.gaussian_std = config.gaussian_std;
        grid.push_back(d);
        break;
      }
    }
  }
  return grid;
}

std::string format_report(const std::vector<ReportRow>& rows, bool timing) {
  const bool with_budget =
      std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.budget.has_value(); });
  std::string out =
      "attack_kind,epsilon,n_iters,defense_kind,sigma,k_votes,far,frr,n_trials,wall_time";
  if (with_budget) out += ",budget";
  out += '\n';
  for (const ReportRow& r : rows) {
    const bool voting = r.defense.kind == DefenseKind::kVoting;
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}", attack_kind_name(r.attack.kind),
                       r.attack.epsilon, r.attack.n_iters, defense_kind_name(r.defense.kind),
                       voting ? fmt::format("{}", r.defense.sigma) : std::string(),
                       voting ? fmt::format("{}", r.defense.k_votes) : std::string(), r.far,
                       r.frr, r.n_trials, timing ? r.wall_time : 0.0);
    if (with_budget) out += r.budget ? fmt::format(",{}", *r.budget) : std::string(",");
    out += '\n';
  }
  return out;
}

void write_report(const std::string& path, const std::vector<ReportRow>& rows, bool timing) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  f << format_report(rows, timing);
  if (!f) throw Error("write to '" + path + "' failed");
}

void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
  mallopt(M_TOP_PAD, 16 << 20);
#endif
}

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(threads, n); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next = n;
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs one stage and prefixes any failure with the stage name.
template <typename F>
auto stage(std::string_view name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw Error(std::string(name) + ": " + e.what());
  }
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error("cannot create output directory '" + dir + "'" +
                (ec ? ": " + ec.message() : std::string()));
  }
}

FeatureConfig features_for(const ExperimentConfig& config, const FeatureConfig& base) {
  FeatureConfig f = base;
  f.sample_rate = config.corpus.sample_rate;
  return f;
}

}  // namespace

Evaluator::Evaluator(const Corpus& corpus, const AsvModel& model, const ExperimentConfig& config)
    : corpus_(corpus), model_(model), config_(config) {
  config_.validate();
  corpus.trials.validate();
  dev_ = corpus.trials.subset(Partition::kDev);
  eval_ = corpus.trials.subset(Partition::kEval);
  for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
    const Utterance& u = corpus.utterances[i];
    if (u.sample_rate != model.config().features.sample_rate) {
      throw Error(fmt::format("utterance '{}' has sample rate {} but the model expects {}",
                              u.utterance_id, u.sample_rate,
                              model.config().features.sample_rate));
    }
    index_.emplace(u.utterance_id, i);
  }
  std::set<std::string> needed;
  for (const Trial& t : corpus.trials.trials) {
    needed.insert(t.enroll_id);
    needed.insert(t.test_id);
  }
  std::vector<std::size_t> todo;
  for (const std::string& id : needed) {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error("trial refers to unknown utterance '" + id + "'");
    todo.push_back(it->second);
  }
  embeddings_.resize(corpus.utterances.size());
  parallel_for(todo.size(), config_.threads, [&](std::size_t k) {
    embeddings_[todo[k]] = embed(model_, corpus_.utterances[todo[k]].waveform);
  });

  auto score_all = [&](const std::vector<Trial>& trials) {
    std::vector<double> s;
    for (const Trial& t : trials) s.push_back(cosine(embedding(t.enroll_id), embedding(t.test_id)));
    return s;
  };
  dev_scores_ = score_all(dev_);
  eval_scores_ = score_all(eval_);
  std::vector<double> tgt, ntgt;
  for (std::size_t i = 0; i < dev_.size(); ++i) {
    (dev_[i].is_target ? tgt : ntgt).push_back(dev_scores_[i]);
  }
  threshold_ = calibrate_threshold(tgt, ntgt);
}

const std::vector<double>& Evaluator::embedding(const std::string& utterance_id) const {
  return embeddings_[index_.at(utterance_id)];
}

const std::vector<double>& Evaluator::waveform(const std::string& utterance_id) const {
  return corpus_.utterances[index_.at(utterance_id)].waveform;
}

std::uint64_t Evaluator::defense_seed(const Trial& t) const {
  return derive_seed(config_.seed, t.trial_id, std::string_view("defense"));
}

std::uint64_t Evaluator::attack_seed(const Trial& t) const {
  return derive_seed(config_.seed, t.trial_id, std::string_view("attack"));
}

std::vector<AdversarialResult> Evaluator::attack(const AttackSetting& attack,
                                                 const DefenseSetting& defense) const {
  if (attack.kind == AttackKind::kNone) throw Error("attack: no attack requested");
  std::vector<AdversarialResult> out(eval_.size());
  parallel_for(eval_.size(), config_.threads, [&](std::size_t i) {
    const Trial& t = eval_[i];
    const ModelScorer scorer = ModelScorer::from_embedding(model_, embedding(t.enroll_id));
    AttackConfig ac;
    ac.epsilon = attack.epsilon;
    ac.n_iters = attack.n_iters;
    ac.step_alpha = attack.step_alpha;
    if (attack.kind == AttackKind::kPerfect) {
      if (defense.kind == DefenseKind::kVoting) {
        ac.knowledge = AttackKnowledge::kPerfectVsVoting;
        ac.vote = {defense.sigma, defense.k_votes, attack_seed(t)};
      } else if (defense.kind != DefenseKind::kNone) {
        ac.knowledge = AttackKnowledge::kPerfectVsFilter;
        ac.filter = defense.filter;
      }
    }
    out[i] = run_attack(scorer, waveform(t.test_id), t.is_target, ac);
  });
  return out;
}

std::vector<double> Evaluator::defended_scores(
    const DefenseSetting& defense, const std::vector<AdversarialResult>* inputs) const {
  std::vector<double> out(eval_.size());
  parallel_for(eval_.size(), config_.threads, [&](std::size_t i) {
    const Trial& t = eval_[i];
    const std::vector<double>& x = inputs ? (*inputs)[i].x_adv : waveform(t.test_id);
    const ModelScorer scorer = ModelScorer::from_embedding(model_, embedding(t.enroll_id));
    switch (defense.kind) {
      case DefenseKind::kNone:
        out[i] = inputs ? scorer.score(x) : eval_scores_[i];
        break;
      case DefenseKind::kVoting:
        out[i] = vote_score(scorer, x, VoteConfig{defense.sigma, defense.k_votes, defense_seed(t)});
        break;
      default:
        out[i] = FilteredScorer(scorer, defense.filter).score(x);
        break;
    }
  });
  return out;
}

ReportRow Evaluator::row(const AttackSetting& attack, const DefenseSetting& defense,
                         std::span<const double> scores, double wall_time) const {
  std::vector<double> tgt, ntgt;
  for (std::size_t i = 0; i < eval_.size(); ++i) {
    (eval_[i].is_target ? tgt : ntgt).push_back(scores[i]);
  }
  ReportRow r;
  r.attack = attack;
  r.defense = defense;
  r.far = eval_far(ntgt, threshold_.tau);
  r.frr = eval_frr(tgt, threshold_.tau);
  r.n_trials = eval_.size();
  r.wall_time = wall_time;
  return r;
}

std::vector<ReportRow> Evaluator::evaluate_grid(const AttackCallback& on_attack) const {
  const std::vector<AttackSetting> attacks = attack_grid(config_);
  const std::vector<DefenseSetting> defenses = defense_grid(config_);
  if (attacks.empty()) throw Error("evaluate: attack grid is empty");
  if (defenses.empty()) throw Error("evaluate: defense grid is empty");
  std::vector<ReportRow> rows;
  for (const AttackSetting& a : attacks) {
    std::vector<AdversarialResult> shared;
    for (const DefenseSetting& d : defenses) {
      const auto start = Clock::now();
      std::vector<AdversarialResult> adapted;
      const std::vector<AdversarialResult>* inputs = nullptr;
      if (a.kind == AttackKind::kLimited) {
        if (shared.empty()) {
          shared = attack(a, {});
          if (on_attack) on_attack(a, {}, shared);
        }
        inputs = &shared;
      } else if (a.kind == AttackKind::kPerfect) {
        adapted = attack(a, d);
        if (on_attack) on_attack(a, d, adapted);
        inputs = &adapted;
      }
      const std::vector<double> scores = defended_scores(d, inputs);
      rows.push_back(row(a, d, scores, seconds_since(start)));
    }
  }
  return rows;
}

std::vector<ReportRow> Evaluator::sweep_votes() const {
  std::vector<std::size_t> ks = config_.sweep_votes.k_values;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  const AttackSetting a{AttackKind::kLimited, config_.sweep_votes.epsilon, config_.n_iters,
                        config_.step_alpha};
  const auto attack_start = Clock::now();
  const std::vector<AdversarialResult> adv = attack(a, {});
  const double attack_time = seconds_since(attack_start);
  std::vector<ReportRow> rows;
  for (std::size_t k : ks) {
    const DefenseSetting d{DefenseKind::kVoting, config_.sweep_votes.sigma, k, {}};
    auto start = Clock::now();
    std::vector<double> scores = defended_scores(d, nullptr);
    rows.push_back(row({}, d, scores, seconds_since(start)));
    start = Clock::now();
    scores = defended_scores(d, &adv);
    rows.push_back(row(a, d, scores, seconds_since(start) + (k == ks.front() ? attack_time : 0.0)));
  }
  return rows;
}

std::vector<ReportRow> Evaluator::sweep_iters() const {
  const SweepItersConfig& c = config_.sweep_iters;
  std::vector<std::size_t> ns = c.n_values;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  const DefenseSetting d{DefenseKind::kVoting, c.sigma, c.k_votes, {}};
  std::vector<ReportRow> rows;
  for (std::size_t n : ns) {
    const AttackSetting a{AttackKind::kPerfect, c.epsilon, n,
                          c.step_alpha ? *c.step_alpha : c.epsilon / 5.0};
    const auto start = Clock::now();
    const std::vector<AdversarialResult> adv = attack(a, d);
    const std::vector<double> scores = defended_scores(d, &adv);
    ReportRow r = row(a, d, scores, seconds_since(start));
    r.budget = n * (c.k_votes + 1);
    for (const AdversarialResult& x : adv) {
      if (c.epsilon > 0.0 && x.forward_backward_count != *r.budget) {
        throw Error(fmt::format("sweep-iters: attack used {} passes, expected {}",
                                x.forward_backward_count, *r.budget));
      }
    }
    rows.push_back(r);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

std::vector<LabeledWaveform> training_set(const Corpus& corpus) {
  std::vector<LabeledWaveform> out;
  out.reserve(corpus.utterances.size());
  for (const Utterance& u : corpus.utterances) out.push_back({u.speaker_id, u.waveform});
  return out;
}

double dev_eer(const AsvModel& model, const Corpus& corpus, std::size_t threads) {
  const std::vector<Trial> dev = corpus.trials.subset(Partition::kDev);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < corpus.utterances.size(); ++i) {
    index.emplace(corpus.utterances[i].utterance_id, i);
  }
  std::set<std::size_t> needed;
  for (const Trial& t : dev) {
    needed.insert(index.at(t.enroll_id));
    needed.insert(index.at(t.test_id));
  }
  const std::vector<std::size_t> todo(needed.begin(), needed.end());
  std::vector<std::vector<double>> emb(corpus.utterances.size());
  parallel_for(todo.size(), threads, [&](std::size_t k) {
    emb[todo[k]] = embed(model, corpus.utterances[todo[k]].waveform);
  });
  std::vector<double> tgt, ntgt;
  for (const Trial& t : dev) {
    const double s = cosine(emb[index.at(t.enroll_id)], emb[index.at(t.test_id)]);
    (t.is_target ? tgt : ntgt).push_back(s);
  }
  return calibrate_threshold(tgt, ntgt).eer();
}

std::uint64_t cmd_gen_corpus(const ExperimentConfig& config) {
  config.validate();
  const std::string dir = config.corpus_path();
  stage("gen-corpus", [&] { ensure_directory(dir); });
  CorpusConfig cc = config.corpus;
  cc.seed = config.seed;
  const Corpus corpus = stage("gen-corpus", [&] { return generate_corpus(cc); });
  return stage("gen-corpus: write", [&] { return write_corpus(corpus, dir); });
}

namespace {

Corpus load_corpus(const ExperimentConfig& config) {
  return stage("load corpus", [&] { return read_corpus(config.corpus_path()); });
}

AsvModel load_model(const ExperimentConfig& config) {
  return stage("load checkpoint", [&] { return load_checkpoint(config.checkpoint_path()); });
}

}  // namespace

TrainResult cmd_train(const ExperimentConfig& config) {
  config.validate();
  stage("train", [&] { ensure_directory(config.out_dir); });
  const Corpus corpus = load_corpus(config);
  TrainConfig tc = config.train;
  tc.model.features = features_for(config, tc.model.features);
  tc.seed = derive_seed(config.seed, "train");
  const std::vector<LabeledWaveform> data = training_set(corpus);
  TrainResult result = stage("train", [&] {
    return train(data, tc, [&](const AsvModel& m, std::size_t) -> std::optional<double> {
      return dev_eer(m, corpus, config.threads);
    });
  });
  stage("train: write checkpoint", [&] { save_checkpoint(result.model, config.checkpoint_path()); });
  stage("train: write log", [&] {
    const std::string path = (fs::path(config.out_dir) / "train_log.csv").string();
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + path + "' for writing");
    f << "epoch,loss,dev_eer\n";
    for (const EpochStats& e : result.history) {
      f << fmt::format("{},{},{}\n", e.epoch, e.loss,
                       e.dev_eer ? fmt::format("{}", *e.dev_eer) : std::string());
    }
    if (!f) throw Error("write to '" + path + "' failed");
  });
  return result;
}

namespace {

void export_adversarial(const ExperimentConfig& config, const std::vector<Trial>& trials,
                        const AttackSetting& a, const DefenseSetting& d,
                        const std::vector<AdversarialResult>& adv, std::ofstream& manifest) {
  std::string variant = fmt::format("{}_eps{}_n{}", attack_kind_name(a.kind), a.epsilon, a.n_iters);
  if (d.kind != DefenseKind::kNone) {
    variant += fmt::format("_vs_{}", defense_kind_name(d.kind));
    if (d.kind == DefenseKind::kVoting) variant += fmt::format("_s{}_k{}", d.sigma, d.k_votes);
  }
  const fs::path rel = fs::path("adversarial") / variant;
  ensure_directory((fs::path(config.out_dir) / rel).string());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const fs::path file = rel / (trials[i].trial_id + ".wav");
    write_wav((fs::path(config.out_dir) / file).string(), adv[i].x_adv,
              static_cast<std::uint32_t>(config.corpus.sample_rate));
    manifest << fmt::format("{},{},{},{},{}\n", trials[i].trial_id, file.generic_string(),
                            a.epsilon, a.n_iters, variant);
  }
}

}  // namespace

std::vector<ReportRow> cmd_evaluate(const ExperimentConfig& config) {
  config.validate();
  stage("evaluate", [&] { ensure_directory(config.out_dir); });
  const Corpus corpus = load_corpus(config);
  const AsvModel model = load_model(config);
  const Evaluator ev = stage("evaluate: score", [&] { return Evaluator(corpus, model, config); });

  stage("evaluate: write scores", [&] {
    std::vector<Trial> trials = ev.dev_trials();
    trials.insert(trials.end(), ev.eval_trials().begin(), ev.eval_trials().end());
    std::vector<double> scores = ev.dev_scores();
    scores.insert(scores.end(), ev.eval_scores().begin(), ev.eval_scores().end());
    write_score_csv((fs::path(config.out_dir) / "scores.csv").string(), trials, scores);
  });

  std::ofstream manifest;
  Evaluator::AttackCallback on_attack;
  if (config.export_adversarial) {
    const std::string path = (fs::path(config.out_dir) / "adversarial_manifest.csv").string();
    manifest.open(path, std::ios::binary | std::ios::trunc);
    if (!manifest) throw Error("evaluate: cannot open '" + path + "' for writing");
    manifest << "trial_id,path,epsilon,n_iters,variant\n";
    on_attack = [&](const AttackSetting& a, const DefenseSetting& d,
                    const std::vector<AdversarialResult>& adv) {
      export_adversarial(config, ev.eval_trials(), a, d, adv, manifest);
    };
  }
  const std::vector<ReportRow> rows =
      stage("evaluate: grid", [&] { return ev.evaluate_grid(on_attack); });
  stage("evaluate: write report", [&] {
    write_report((fs::path(config.out_dir) / "report.csv").string(), rows, config.timing);
  });
  return rows;
}

std::vector<ReportRow> cmd_sweep_votes(const ExperimentConfig& config) {
  config.validate();
  stage("sweep-votes", [&] { ensure_directory(config.out_dir); });
  const Corpus corpus = load_corpus(config);
  const AsvModel model = load_model(config);
  const Evaluator ev = stage("sweep-votes: score", [&] { return Evaluator(corpus, model, config); });
  const std::vector<ReportRow> rows = stage("sweep-votes", [&] { return ev.sweep_votes(); });
  stage("sweep-votes: write report", [&] {
    write_report((fs::path(config.out_dir) / "sweep_votes.csv").string(), rows, config.timing);
  });
  return rows;
}

std::vector<ReportRow> cmd_sweep_iters(const ExperimentConfig& config) {
  config.validate();
  stage("sweep-iters", [&] { ensure_directory(config.out_dir); });
  const Corpus corpus = load_corpus(config);
  const AsvModel model = load_model(config);
  const Evaluator ev = stage("sweep-iters: score", [&] { return Evaluator(corpus, model, config); });
  const std::vector<ReportRow> rows = stage("sweep-iters", [&] { return ev.sweep_iters(); });
  stage("sweep-iters: write report", [&] {
    write_report((fs::path(config.out_dir) / "sweep_iters.csv").string(), rows, config.timing);
  });
  return rows;
}

}  // namespace asvvote
