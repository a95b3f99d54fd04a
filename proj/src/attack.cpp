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

#include "asvvote/attack.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "asvvote/error.hpp"
#include "asvvote/model.hpp"
#include "asvvote/wav.hpp"

namespace asvvote {

std::string_view knowledge_name(AttackKnowledge k) {
  switch (k) {
    case AttackKnowledge::kLimited:
      return "limited";
    case AttackKnowledge::kPerfectVsVoting:
      return "perfect_vs_voting";
    case AttackKnowledge::kPerfectVsFilter:
      return "perfect_vs_filter";
  }
  return "unknown";
}

double AttackConfig::alpha() const {
  return step_alpha ? *step_alpha : epsilon / static_cast<double>(n_iters);
}

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw Error("AttackConfig: epsilon must be finite and >= 0");
  }
  if (n_iters < 1) throw Error("AttackConfig: n_iters must be >= 1");
  if (epsilon > 0.0 && !(alpha() > 0.0)) {
    throw Error("AttackConfig: step_alpha must be > 0 when epsilon > 0");
  }
  if (knowledge == AttackKnowledge::kPerfectVsVoting) vote.validate();
  if (knowledge == AttackKnowledge::kPerfectVsFilter) filter.validate();
}

namespace {

// Returns f(x) and writes the ascent gradient; adds to the budget counter.
using GradientFn = std::function<double(std::span<const double> x, std::size_t iteration,
                                        std::vector<double>& grad, std::size_t& budget)>;

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double linf(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

AdversarialResult run_bim(const Scorer& plain, std::span<const double> x_t, bool is_target,
                          const AttackConfig& config, const GradientFn& gradient) {
  config.validate();
  if (x_t.empty()) throw Error("bim: empty waveform");
  const double eps = config.epsilon / kPcmScale;
  const double alpha = config.alpha() / kPcmScale;
  const double lambda = is_target ? -1.0 : 1.0;

  AdversarialResult r;
  r.score_before = plain.score(x_t);
  r.x_adv.assign(x_t.begin(), x_t.end());
  if (config.epsilon == 0.0) {
    r.score_after = r.score_before;
    r.iterate_linf.assign(config.n_iters, 0.0);
    return r;
  }
  std::vector<double> grad;
  for (std::size_t n = 0; n < config.n_iters; ++n) {
    gradient(r.x_adv, n, grad, r.forward_backward_count);
    if (grad.size() != x_t.size()) throw Error("bim: gradient has wrong size");
    for (std::size_t i = 0; i < grad.size(); ++i) {
      if (!std::isfinite(grad[i])) {
        throw Error("bim: non-finite gradient at iteration " + std::to_string(n + 1));
      }
    }
    for (std::size_t i = 0; i < x_t.size(); ++i) {
      double v = r.x_adv[i] + alpha * lambda * sign(grad[i]);
      v = std::clamp(v, x_t[i] - eps, x_t[i] + eps);
      r.x_adv[i] = std::clamp(v, -1.0, 1.0);
    }
    r.iterate_linf.push_back(linf(r.x_adv, x_t));
  }
  r.linf_distance = r.iterate_linf.back();
  r.score_after = plain.score(r.x_adv);
  return r;
}

}  // namespace

AdversarialResult bim(const Scorer& scorer, std::span<const double> x_t, bool is_target,
                      const AttackConfig& config) {
  return run_bim(scorer, x_t, is_target, config,
                 [&](std::span<const double> x, std::size_t, std::vector<double>& grad,
                     std::size_t& budget) {
                   ++budget;
                   return scorer.score_and_gradient(x, grad);
                 });
}

AdversarialResult bim_adaptive_vs_voting(const Scorer& scorer, std::span<const double> x_t,
                                         bool is_target, const AttackConfig& config,
                                         const VoteConfig& vote) {
  vote.validate();
  std::mt19937_64 rng(vote.seed);
  const double std = vote.sigma / kPcmScale;
  std::vector<double> neighbor;
  std::vector<double> g;
  return run_bim(
      scorer, x_t, is_target, config,
      [&](std::span<const double> x, std::size_t, std::vector<double>& grad,
          std::size_t& budget) {
        double total = scorer.score_and_gradient(x, grad);
        ++budget;
        std::normal_distribution<double> noise(0.0, 1.0);
        neighbor.resize(x.size());
        for (std::size_t k = 0; k < vote.k_votes; ++k) {
          for (std::size_t i = 0; i < x.size(); ++i) {
            const double n = std > 0.0 ? std * noise(rng) : 0.0;
            neighbor[i] = std::clamp(x[i] + n, -1.0, 1.0);
          }
          total += scorer.score_and_gradient(neighbor, g);
          ++budget;
          for (std::size_t i = 0; i < x.size(); ++i) {
            // The range clip passes no gradient where it is active.
            const bool clipped = neighbor[i] == -1.0 || neighbor[i] == 1.0;
            if (!clipped) grad[i] += g[i];
          }
        }
        const double inv = 1.0 / static_cast<double>(vote.k_votes + 1);
        for (double& v : grad) v *= inv;
        return total * inv;
      });
}

AdversarialResult bim_vs_filter(const Scorer& scorer, const FilterSpec& filter,
                                std::span<const double> x_t, bool is_target,
                                const AttackConfig& config) {
  return bim(FilteredScorer(scorer, filter), x_t, is_target, config);
}

AdversarialResult run_attack(const Scorer& scorer, std::span<const double> x_t,
                             bool is_target, const AttackConfig& config) {
  switch (config.knowledge) {
    case AttackKnowledge::kLimited:
      return bim(scorer, x_t, is_target, config);
    case AttackKnowledge::kPerfectVsVoting:
      return bim_adaptive_vs_voting(scorer, x_t, is_target, config, config.vote);
    case AttackKnowledge::kPerfectVsFilter:
      return bim_vs_filter(scorer, config.filter, x_t, is_target, config);
  }
  throw Error("run_attack: unknown knowledge level");
}

AdversarialResult bim(const AsvModel& model, std::span<const double> x_t,
                      std::span<const double> x_e, bool is_target, const AttackConfig& config) {
  return bim(ModelScorer(model, x_e), x_t, is_target, config);
}

AdversarialResult bim_adaptive_vs_voting(const AsvModel& model, std::span<const double> x_t,
                                         std::span<const double> x_e, bool is_target,
                                         const AttackConfig& config, const VoteConfig& vote) {
  return bim_adaptive_vs_voting(ModelScorer(model, x_e), x_t, is_target, config, vote);
}

AdversarialResult bim_vs_filter(const AsvModel& model, const FilterSpec& filter,
                                std::span<const double> x_t, std::span<const double> x_e,
                                bool is_target, const AttackConfig& config) {
  return bim_vs_filter(ModelScorer(model, x_e), filter, x_t, is_target, config);
}

}  // namespace asvvote
