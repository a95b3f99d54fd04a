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

#include "asvvote/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "asvvote/error.hpp"

namespace asvvote {

std::string_view partition_name(Partition p) {
  return p == Partition::kDev ? "dev" : "eval";
}

Partition parse_partition(std::string_view name) {
  if (name == "dev") return Partition::kDev;
  if (name == "eval") return Partition::kEval;
  throw Error("unknown partition '" + std::string(name) + "'");
}

void TrialSet::validate() const {
  std::size_t counts[2][2] = {};
  for (const Trial& t : trials) {
    ++counts[t.partition == Partition::kDev ? 0 : 1][t.is_target ? 1 : 0];
  }
  for (int p = 0; p < 2; ++p) {
    if (counts[p][0] == 0 || counts[p][1] == 0) {
      throw Error(fmt::format(
          "TrialSet: {} partition needs target and non-target trials "
          "(targets {}, non-targets {})",
          p == 0 ? "dev" : "eval", counts[p][1], counts[p][0]));
    }
  }
}

std::vector<Trial> TrialSet::subset(Partition p) const {
  std::vector<Trial> out;
  for (const Trial& t : trials) {
    if (t.partition == p) out.push_back(t);
  }
  return out;
}

double false_accept_rate(std::span<const double> nontarget_scores, double tau) {
  if (nontarget_scores.empty()) throw Error("false_accept_rate: empty score set");
  const auto accepted = std::count_if(nontarget_scores.begin(), nontarget_scores.end(),
                                      [tau](double s) { return s >= tau; });
  return static_cast<double>(accepted) / static_cast<double>(nontarget_scores.size());
}

double false_reject_rate(std::span<const double> target_scores, double tau) {
  if (target_scores.empty()) throw Error("false_reject_rate: empty score set");
  const auto rejected = std::count_if(target_scores.begin(), target_scores.end(),
                                      [tau](double s) { return s < tau; });
  return static_cast<double>(rejected) / static_cast<double>(target_scores.size());
}

Threshold calibrate_threshold(std::span<const double> target_scores,
                              std::span<const double> nontarget_scores) {
  if (target_scores.empty() || nontarget_scores.empty()) {
    throw Error("calibrate_threshold: need non-empty target and non-target scores");
  }
  std::vector<double> tgt(target_scores.begin(), target_scores.end());
  std::vector<double> ntgt(nontarget_scores.begin(), nontarget_scores.end());
  std::sort(tgt.begin(), tgt.end());
  std::sort(ntgt.begin(), ntgt.end());
  std::vector<double> pooled(tgt);
  pooled.insert(pooled.end(), ntgt.begin(), ntgt.end());
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  std::vector<double> candidates;
  candidates.reserve(pooled.size() + 1);
  candidates.push_back(pooled.front() - 1.0);
  for (std::size_t i = 0; i + 1 < pooled.size(); ++i) {
    candidates.push_back(pooled[i] + 0.5 * (pooled[i + 1] - pooled[i]));
  }
  candidates.push_back(pooled.back() + 1.0);

  const double nt = static_cast<double>(tgt.size());
  const double nn = static_cast<double>(ntgt.size());
  Threshold best;
  double best_gap = std::numeric_limits<double>::infinity();
  for (double tau : candidates) {
    // Sorted lists: rejected targets are those below tau, accepted
    // non-targets those at or above it.
    const auto rejected = std::lower_bound(tgt.begin(), tgt.end(), tau) - tgt.begin();
    const auto accepted = ntgt.end() - std::lower_bound(ntgt.begin(), ntgt.end(), tau);
    const double frr = static_cast<double>(rejected) / nt;
    const double far = static_cast<double>(accepted) / nn;
    const double gap = std::abs(far - frr);
    if (gap < best_gap) {
      best_gap = gap;
      best = Threshold{tau, far, frr};
    }
  }
  return best;
}

TrialSet split_trials(std::vector<Trial> trials, double dev_fraction,
                      std::uint64_t seed) {
  if (!(dev_fraction > 0.0 && dev_fraction < 1.0)) {
    throw Error("split_trials: dev_fraction must be in (0, 1)");
  }
  std::vector<std::size_t> targets;
  std::vector<std::size_t> nontargets;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    (trials[i].is_target ? targets : nontargets).push_back(i);
  }
  const auto n_dev = static_cast<std::size_t>(
      std::llround(dev_fraction * static_cast<double>(trials.size())));
  auto dev_tgt = static_cast<std::size_t>(
      std::llround(dev_fraction * static_cast<double>(targets.size())));
  dev_tgt = std::min(dev_tgt, n_dev);
  const std::size_t dev_ntgt = n_dev - dev_tgt;
  if (dev_tgt == 0 || dev_tgt >= targets.size() || dev_ntgt == 0 ||
      dev_ntgt >= nontargets.size()) {
    throw Error(fmt::format(
        "split_trials: {} targets and {} non-targets cannot fill both "
        "partitions with both trial types at dev_fraction {}",
        targets.size(), nontargets.size(), dev_fraction));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(targets.begin(), targets.end(), rng);
  std::shuffle(nontargets.begin(), nontargets.end(), rng);
  for (Trial& t : trials) t.partition = Partition::kEval;
  for (std::size_t i = 0; i < dev_tgt; ++i) trials[targets[i]].partition = Partition::kDev;
  for (std::size_t i = 0; i < dev_ntgt; ++i) trials[nontargets[i]].partition = Partition::kDev;
  TrialSet set{std::move(trials)};
  set.validate();
  return set;
}

void write_score_csv(const std::string& path, std::span<const Trial> trials,
                     std::span<const double> scores) {
  if (trials.size() != scores.size()) throw Error("write_score_csv: size mismatch");
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("write_score_csv: cannot open '" + path + "'");
  out << "trial_id,enroll_id,test_id,is_target,partition,score\n";
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Trial& t = trials[i];
    out << fmt::format("{},{},{},{},{},{:.17g}\n", t.trial_id, t.enroll_id,
                       t.test_id, t.is_target ? 1 : 0,
                       partition_name(t.partition), scores[i]);
  }
  if (!out) throw Error("write_score_csv: write to '" + path + "' failed");
}

}  // namespace asvvote
