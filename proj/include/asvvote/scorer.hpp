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

#ifndef ASVVOTE_SCORER_HPP_
#define ASVVOTE_SCORER_HPP_

#include <span>
#include <utility>
#include <vector>

namespace asvvote {

// A verification score s = f(x, x_e) with the enrollment side held fixed,
// seen as a function of the test waveform x.  Implementations are immutable
// and callable from several threads at once.
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual double score(std::span<const double> x) const = 0;

  // Returns f(x) and overwrites `grad` with df/dx.
  virtual double score_and_gradient(std::span<const double> x,
                                    std::vector<double>& grad) const = 0;
};

// f(x) = w . x + bias.  Closed-form stand-in for the neural scorer.
class LinearScorer final : public Scorer {
 public:
  explicit LinearScorer(std::vector<double> weights, double bias = 0.0)
      : weights_(std::move(weights)), bias_(bias) {}

  double score(std::span<const double> x) const override;
  double score_and_gradient(std::span<const double> x,
                            std::vector<double>& grad) const override;

  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<double> weights_;
  double bias_;
};

}  // namespace asvvote

#endif  // ASVVOTE_SCORER_HPP_
