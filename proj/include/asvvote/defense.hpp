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

// Voting defense and filter baselines.
//
// Voting scores a test waveform by averaging f over the waveform itself and
// K neighbors drawn from an isotropic Gaussian around it:
//
//   s_vote = (f(x) + sum_k f(x + n_k)) / (K + 1),  n_k ~ N(0, (sigma/32768)^2 I)
//
// sigma is given in 16-bit amplitude units.

#ifndef ASVVOTE_DEFENSE_HPP_
#define ASVVOTE_DEFENSE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "asvvote/scorer.hpp"

namespace asvvote {

class AsvModel;

struct VoteConfig {
  double sigma = 60.0;
  std::size_t k_votes = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

// Draws the K neighbors, clipped to [-1, 1].
std::vector<std::vector<double>> sample_neighbors(std::span<const double> x,
                                                  const VoteConfig& config);

double vote_score(const Scorer& scorer, std::span<const double> x_t,
                  const VoteConfig& config);
double vote_score(const AsvModel& model, std::span<const double> x_t,
                  std::span<const double> x_e, const VoteConfig& config);

enum class FilterKind { kGaussian, kMean, kMedian };

std::string_view filter_name(FilterKind kind);
FilterKind parse_filter(std::string_view name);

struct FilterSpec {
  FilterKind kind = FilterKind::kMean;
  std::size_t kernel_size = 3;
  double gaussian_std = 1.0;  // samples

  void validate() const;
  bool operator==(const FilterSpec&) const = default;
};

// Normalized truncated Gaussian taps, length kernel_size.
std::vector<double> gaussian_kernel(std::size_t kernel_size, double std_samples);

// Sliding-window filter with replicate padding at both edges.
std::vector<double> apply_filter(std::span<const double> x, const FilterSpec& spec);

// Vector-Jacobian product of apply_filter at `x`: J^T grad_out.  Exact for
// the linear filters; for the median the gradient of each output goes to
// the input sample that was selected as the window median.
std::vector<double> filter_vjp(std::span<const double> x, const FilterSpec& spec,
                               std::span<const double> grad_out);

// f(filter(x)), differentiable through the filter.
class FilteredScorer final : public Scorer {
 public:
  FilteredScorer(const Scorer& inner, FilterSpec spec);

  double score(std::span<const double> x) const override;
  double score_and_gradient(std::span<const double> x,
                            std::vector<double>& grad) const override;

 private:
  const Scorer& inner_;
  FilterSpec spec_;
};

}  // namespace asvvote

#endif  // ASVVOTE_DEFENSE_HPP_
