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

#include "asvvote/defense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "asvvote/error.hpp"
#include "asvvote/model.hpp"
#include "asvvote/wav.hpp"

namespace asvvote {

void VoteConfig::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error("VoteConfig: sigma must be finite and >= 0");
  }
}

namespace {

// Streams neighbors one at a time so K = 50 never holds 50 copies.
class NeighborSampler {
 public:
  NeighborSampler(std::span<const double> x, const VoteConfig& config)
      : x_(x), std_(config.sigma / kPcmScale), rng_(config.seed) {}

  void next(std::vector<double>& out) {
    out.resize(x_.size());
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t i = 0; i < x_.size(); ++i) {
      const double n = std_ > 0.0 ? std_ * noise(rng_) : 0.0;
      out[i] = std::clamp(x_[i] + n, -1.0, 1.0);
    }
  }

 private:
  std::span<const double> x_;
  double std_;
  std::mt19937_64 rng_;
};

}  // namespace

std::vector<std::vector<double>> sample_neighbors(std::span<const double> x,
                                                  const VoteConfig& config) {
  config.validate();
  NeighborSampler sampler(x, config);
  std::vector<std::vector<double>> out(config.k_votes);
  for (auto& n : out) sampler.next(n);
  return out;
}

double vote_score(const Scorer& scorer, std::span<const double> x_t,
                  const VoteConfig& config) {
  config.validate();
  double total = scorer.score(x_t);
  // With sigma = 0 every neighbor is x itself and the mean is f(x); return
  // it directly instead of a rounded sum of K + 1 equal terms.
  if (config.k_votes == 0 || config.sigma == 0.0) return total;
  NeighborSampler sampler(x_t, config);
  std::vector<double> neighbor;
  for (std::size_t k = 0; k < config.k_votes; ++k) {
    sampler.next(neighbor);
    total += scorer.score(neighbor);
  }
  return total / static_cast<double>(config.k_votes + 1);
}

double vote_score(const AsvModel& model, std::span<const double> x_t,
                  std::span<const double> x_e, const VoteConfig& config) {
  return vote_score(ModelScorer(model, x_e), x_t, config);
}

// ---------------------------------------------------------------------------
// Filters
// ---------------------------------------------------------------------------

std::string_view filter_name(FilterKind kind) {
  switch (kind) {
    case FilterKind::kGaussian:
      return "gaussian";
    case FilterKind::kMean:
      return "mean";
    case FilterKind::kMedian:
      return "median";
  }
  return "unknown";
}

FilterKind parse_filter(std::string_view name) {
  if (name == "gaussian") return FilterKind::kGaussian;
  if (name == "mean") return FilterKind::kMean;
  if (name == "median") return FilterKind::kMedian;
  throw Error("unknown filter kind '" + std::string(name) + "'");
}

void FilterSpec::validate() const {
  if (kernel_size == 0 || kernel_size % 2 == 0) {
    throw Error("FilterSpec: kernel_size must be odd and >= 1, got " +
                std::to_string(kernel_size));
  }
  if (kind == FilterKind::kGaussian && !(gaussian_std > 0.0)) {
    throw Error("FilterSpec: gaussian_std must be > 0");
  }
}

std::vector<double> gaussian_kernel(std::size_t kernel_size, double std_samples) {
  FilterSpec{FilterKind::kGaussian, kernel_size, std_samples}.validate();
  const auto r = static_cast<std::ptrdiff_t>(kernel_size / 2);
  std::vector<double> k(kernel_size);
  double total = 0.0;
  for (std::ptrdiff_t j = -r; j <= r; ++j) {
    const double d = static_cast<double>(j) / std_samples;
    k[static_cast<std::size_t>(j + r)] = std::exp(-0.5 * d * d);
    total += k[static_cast<std::size_t>(j + r)];
  }
  for (double& v : k) v /= total;
  return k;
}

namespace {

std::size_t clamp_index(std::ptrdiff_t i, std::size_t n) {
  return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1));
}

// Linear filters are evaluated in centered form
//   y_i = x_i + sum_{j != 0} w_j (x_{i+j} - x_i),
// equal to sum_j w_j x_{i+j} when the taps sum to one, and exact on
// constant signals.  The mean filter divides the sum of differences by k so
// its taps are exactly 1/k.
struct LinearTaps {
  std::vector<double> weights;  // per offset, center entry unused
  double divisor = 1.0;
};

LinearTaps linear_taps(const FilterSpec& spec) {
  LinearTaps taps;
  if (spec.kind == FilterKind::kMean) {
    taps.weights.assign(spec.kernel_size, 1.0);
    taps.divisor = static_cast<double>(spec.kernel_size);
  } else {
    taps.weights = gaussian_kernel(spec.kernel_size, spec.gaussian_std);
  }
  return taps;
}

std::size_t median_source(std::span<const double> x, std::size_t i, std::size_t k,
                          std::vector<std::size_t>& window) {
  const auto r = static_cast<std::ptrdiff_t>(k / 2);
  window.clear();
  for (std::ptrdiff_t j = -r; j <= r; ++j) {
    window.push_back(clamp_index(static_cast<std::ptrdiff_t>(i) + j, x.size()));
  }
  auto mid = window.begin() + r;
  std::nth_element(window.begin(), mid, window.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && a < b);
  });
  return *mid;
}

}  // namespace

std::vector<double> apply_filter(std::span<const double> x, const FilterSpec& spec) {
  spec.validate();
  if (x.empty()) throw Error("apply_filter: empty signal");
  const std::size_t n = x.size();
  const auto r = static_cast<std::ptrdiff_t>(spec.kernel_size / 2);
  std::vector<double> y(n);
  if (spec.kind == FilterKind::kMedian) {
    std::vector<std::size_t> window;
    for (std::size_t i = 0; i < n; ++i) y[i] = x[median_source(x, i, spec.kernel_size, window)];
    return y;
  }
  const LinearTaps taps = linear_taps(spec);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t j = -r; j <= r; ++j) {
      if (j == 0) continue;
      const double d = x[clamp_index(static_cast<std::ptrdiff_t>(i) + j, n)] - x[i];
      acc += taps.weights[static_cast<std::size_t>(j + r)] * d;
    }
    y[i] = x[i] + acc / taps.divisor;
  }
  return y;
}

std::vector<double> filter_vjp(std::span<const double> x, const FilterSpec& spec,
                               std::span<const double> grad_out) {
  spec.validate();
  if (x.empty()) throw Error("filter_vjp: empty signal");
  if (grad_out.size() != x.size()) throw Error("filter_vjp: gradient size mismatch");
  const std::size_t n = x.size();
  const auto r = static_cast<std::ptrdiff_t>(spec.kernel_size / 2);
  std::vector<double> gx(n, 0.0);
  if (spec.kind == FilterKind::kMedian) {
    std::vector<std::size_t> window;
    for (std::size_t i = 0; i < n; ++i) {
      gx[median_source(x, i, spec.kernel_size, window)] += grad_out[i];
    }
    return gx;
  }
  const LinearTaps taps = linear_taps(spec);
  double off_center = 0.0;
  for (std::ptrdiff_t j = -r; j <= r; ++j) {
    if (j != 0) off_center += taps.weights[static_cast<std::size_t>(j + r)];
  }
  off_center /= taps.divisor;
  for (std::size_t i = 0; i < n; ++i) {
    gx[i] += grad_out[i] * (1.0 - off_center);
    for (std::ptrdiff_t j = -r; j <= r; ++j) {
      if (j == 0) continue;
      const double w = taps.weights[static_cast<std::size_t>(j + r)] / taps.divisor;
      gx[clamp_index(static_cast<std::ptrdiff_t>(i) + j, n)] += w * grad_out[i];
    }
  }
  return gx;
}

FilteredScorer::FilteredScorer(const Scorer& inner, FilterSpec spec)
    : inner_(inner), spec_(spec) {
  spec_.validate();
}

double FilteredScorer::score(std::span<const double> x) const {
  return inner_.score(apply_filter(x, spec_));
}

double FilteredScorer::score_and_gradient(std::span<const double> x,
                                          std::vector<double>& grad) const {
  const std::vector<double> y = apply_filter(x, spec_);
  std::vector<double> gy;
  const double s = inner_.score_and_gradient(y, gy);
  grad = filter_vjp(x, spec_, gy);
  return s;
}

}  // namespace asvvote
