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

// Trials, threshold calibration and error rates.
//
// A trial is accepted when its score is >= tau.  FAR counts accepted
// non-target trials; FRR counts target trials with score < tau.  The same
// arithmetic serves development, evaluation and voted scores.

#ifndef ASVVOTE_METRICS_HPP_
#define ASVVOTE_METRICS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace asvvote {

enum class Partition { kDev, kEval };

std::string_view partition_name(Partition p);
Partition parse_partition(std::string_view name);

struct Trial {
  std::string trial_id;
  std::string enroll_id;
  std::string test_id;
  bool is_target = false;
  Partition partition = Partition::kDev;

  bool operator==(const Trial&) const = default;
};

struct TrialSet {
  std::vector<Trial> trials;

  // Throws unless both partitions hold at least one target and one
  // non-target trial.
  void validate() const;
  std::vector<Trial> subset(Partition p) const;
};

// |{s >= tau}| / |scores|
double false_accept_rate(std::span<const double> nontarget_scores, double tau);
// |{s < tau}| / |scores|
double false_reject_rate(std::span<const double> target_scores, double tau);

inline double dev_far(std::span<const double> s, double tau) { return false_accept_rate(s, tau); }
inline double dev_frr(std::span<const double> s, double tau) { return false_reject_rate(s, tau); }
inline double eval_far(std::span<const double> s, double tau) { return false_accept_rate(s, tau); }
inline double eval_frr(std::span<const double> s, double tau) { return false_reject_rate(s, tau); }
inline double vote_far(std::span<const double> s, double tau) { return false_accept_rate(s, tau); }
inline double vote_frr(std::span<const double> s, double tau) { return false_reject_rate(s, tau); }

struct Threshold {
  double tau = 0.0;
  double dev_far = 0.0;
  double dev_frr = 0.0;

  double eer() const { return 0.5 * (dev_far + dev_frr); }
};

// Picks tau among the midpoints of adjacent distinct pooled scores plus one
// point below the minimum and one above the maximum, minimizing
// |FAR - FRR|; ties go to the smaller tau.
Threshold calibrate_threshold(std::span<const double> target_scores,
                              std::span<const double> nontarget_scores);

// Stratified deterministic split.  round(dev_fraction * n) trials go to the
// development side, split between targets and non-targets in proportion.
TrialSet split_trials(std::vector<Trial> trials, double dev_fraction,
                      std::uint64_t seed);

// CSV with columns trial_id,enroll_id,test_id,is_target,partition,score.
void write_score_csv(const std::string& path, std::span<const Trial> trials,
                     std::span<const double> scores);

}  // namespace asvvote

#endif  // ASVVOTE_METRICS_HPP_
