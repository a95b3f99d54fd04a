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

// Basic Iterative Method against a verification score.
//
//   x^0 = x_t
//   x^{n+1} = clip_[-1,1]( clip_eps^{x_t}( x^n + alpha * lambda * sign(grad f(x^n)) ) )
//
// lambda = +1 on non-target trials (push the score up) and -1 on target
// trials (push it down).  epsilon and alpha are in 16-bit amplitude units
// and divided by 32768 before use.  sign(0) = 0.

#ifndef ASVVOTE_ATTACK_HPP_
#define ASVVOTE_ATTACK_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "asvvote/defense.hpp"
#include "asvvote/scorer.hpp"

namespace asvvote {

class AsvModel;

enum class AttackKnowledge { kLimited, kPerfectVsVoting, kPerfectVsFilter };

std::string_view knowledge_name(AttackKnowledge k);

struct AttackConfig {
  double epsilon = 5.0;
  std::size_t n_iters = 5;
  // Defaults to epsilon / n_iters.
  std::optional<double> step_alpha;
  AttackKnowledge knowledge = AttackKnowledge::kLimited;
  // Perfect knowledge of voting: K and sigma of the defense, and the
  // attacker's own noise seed (never the defense's).
  VoteConfig vote;
  // Perfect knowledge of a filter.
  FilterSpec filter;

  double alpha() const;
  void validate() const;
};

struct AdversarialResult {
  std::vector<double> x_adv;
  double linf_distance = 0.0;  // float domain
  double score_before = 0.0;
  double score_after = 0.0;
  std::size_t forward_backward_count = 0;
  // ||x^n - x_t||_inf after every iteration n = 1..N.
  std::vector<double> iterate_linf;
};

AdversarialResult bim(const Scorer& scorer, std::span<const double> x_t,
                      bool is_target, const AttackConfig& config);

// Each iteration draws K fresh neighbors of the current iterate from the
// attacker's stream and steps along the sign of the gradient of the mean of
// the K + 1 scores.
AdversarialResult bim_adaptive_vs_voting(const Scorer& scorer, std::span<const double> x_t,
                                         bool is_target, const AttackConfig& config,
                                         const VoteConfig& vote);

// BIM on f(filter(x)).
AdversarialResult bim_vs_filter(const Scorer& scorer, const FilterSpec& filter,
                                std::span<const double> x_t, bool is_target,
                                const AttackConfig& config);

// Dispatches on config.knowledge.
AdversarialResult run_attack(const Scorer& scorer, std::span<const double> x_t,
                             bool is_target, const AttackConfig& config);

// Convenience forms scoring against enrollment waveform x_e.
AdversarialResult bim(const AsvModel& model, std::span<const double> x_t,
                      std::span<const double> x_e, bool is_target, const AttackConfig& config);
AdversarialResult bim_adaptive_vs_voting(const AsvModel& model, std::span<const double> x_t,
                                         std::span<const double> x_e, bool is_target,
                                         const AttackConfig& config, const VoteConfig& vote);
AdversarialResult bim_vs_filter(const AsvModel& model, const FilterSpec& filter,
                                std::span<const double> x_t, std::span<const double> x_e,
                                bool is_target, const AttackConfig& config);

}  // namespace asvvote

#endif  // ASVVOTE_ATTACK_HPP_
