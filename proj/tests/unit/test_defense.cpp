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
#include <set>

#include <gtest/gtest.h>

#include "asvvote/error.hpp"
#include "asvvote/model.hpp"
#include "asvvote/wav.hpp"
#include "test_util.hpp"

namespace asvvote {
namespace {

using asvvote::testing::random_vector;
using V = std::vector<double>;

const FilterKind kAllFilters[] = {FilterKind::kGaussian, FilterKind::kMean, FilterKind::kMedian};

// ---------------------------------------------------------------------------
// Neighbors and voting
// ---------------------------------------------------------------------------

TEST(Neighbors, ZeroSigmaGivesCopies) {
  const V x = random_vector(50, 1);
  const auto n = sample_neighbors(x, {0.0, 7, 3});
  ASSERT_EQ(n.size(), 7u);
  for (const V& v : n) EXPECT_EQ(v, x);
}

TEST(Neighbors, SameSeedSameDraws) {
  const V x = random_vector(50, 1, -0.5, 0.5);
  EXPECT_EQ(sample_neighbors(x, {30.0, 5, 9}), sample_neighbors(x, {30.0, 5, 9}));
  EXPECT_NE(sample_neighbors(x, {30.0, 5, 9}), sample_neighbors(x, {30.0, 5, 10}));
}

TEST(Neighbors, ClippedToValidRange) {
  const V x{1.0, -1.0, 0.99999};
  for (const V& v : sample_neighbors(x, {3000.0, 100, 4})) {
    for (double s : v) {
      EXPECT_LE(s, 1.0);
      EXPECT_GE(s, -1.0);
    }
  }
}

TEST(Neighbors, NoiseStatistics) {
  // Per-coordinate estimator check over K = 10000 draws.
  const V x(8, 0.1);
  const double sigma = 30.0 / kPcmScale;
  const auto n = sample_neighbors(x, {30.0, 10000, 77});
  for (std::size_t i = 0; i < x.size(); ++i) {
    double s = 0.0, s2 = 0.0;
    for (const V& v : n) {
      const double d = v[i] - x[i];
      s += d;
      s2 += d * d;
    }
    const double k = static_cast<double>(n.size());
    const double mean = s / k;
    const double std = std::sqrt(s2 / k - mean * mean);
    EXPECT_LT(std::abs(mean), 4.0 * sigma / std::sqrt(k)) << i;
    EXPECT_LT(std::abs(std / sigma - 1.0), 0.02) << i;
  }
}

TEST(VoteConfig, Validation) {
  EXPECT_THROW((VoteConfig{-1.0, 5, 0}).validate(), Error);
  EXPECT_THROW((VoteConfig{std::nan(""), 5, 0}).validate(), Error);
  EXPECT_NO_THROW((VoteConfig{0.0, 0, 0}).validate());
}

TEST(Vote, DegenerateCasesEqualPlainScore) {
  ModelConfig c;
  c.hidden_dim = 8;
  c.embedding_dim = 4;
  const AsvModel m(c, 2, 5);
  const V xe = random_vector(900, 2, -0.5, 0.5);
  const V xt = random_vector(900, 3, -0.5, 0.5);
  const double s = score(m, xt, xe);
  EXPECT_EQ(vote_score(m, xt, xe, {60.0, 0, 1}), s);
  EXPECT_NEAR(vote_score(m, xt, xe, {0.0, 9, 1}), s, 1e-12);
}

TEST(Vote, LinearScorerClosedForm) {
  const V w = random_vector(64, 4);
  const LinearScorer f(w, 0.25);
  const V x = random_vector(64, 5, -0.5, 0.5);
  const VoteConfig cfg{45.0, 12, 123};
  double expected = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) expected += w[i] * x[i];
  double noise = 0.0;
  for (const V& n : sample_neighbors(x, cfg)) {
    for (std::size_t i = 0; i < x.size(); ++i) noise += w[i] * (n[i] - x[i]);
  }
  expected += 0.25 + noise / static_cast<double>(cfg.k_votes + 1);
  EXPECT_NEAR(vote_score(f, x, cfg), expected, 1e-12);
}

TEST(VoteProperty, VarianceShrinksWithVotes) {
  const V w = random_vector(32, 6);
  const LinearScorer f(w);
  const V x = random_vector(32, 7, -0.5, 0.5);
  auto variance = [&](std::size_t k) {
    double s = 0.0, s2 = 0.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const double v = vote_score(f, x, {60.0, k, seed});
      s += v;
      s2 += v * v;
    }
    return s2 / 200.0 - (s / 200.0) * (s / 200.0);
  };
  EXPECT_LT(variance(49), variance(9) / 3.0);
}

// ---------------------------------------------------------------------------
// Filters
// ---------------------------------------------------------------------------

TEST(Filter, MeanHandExample) {
  EXPECT_EQ(apply_filter(V{0, 3, 6}, {FilterKind::kMean, 3, 1.0}), (V{1, 3, 5}));
}

TEST(Filter, MedianHandExample) {
  EXPECT_EQ(apply_filter(V{1, 9, 1}, {FilterKind::kMedian, 3, 1.0}), (V{1, 1, 1}));
}

TEST(Filter, GaussianOnConstant) {
  const V x(17, 0.3125);
  EXPECT_EQ(apply_filter(x, {FilterKind::kGaussian, 5, 1.3}), x);
}

TEST(Filter, GaussianKernel) {
  const V k = gaussian_kernel(5, 1.0);
  ASSERT_EQ(k.size(), 5u);
  EXPECT_NEAR(std::accumulate(k.begin(), k.end(), 0.0), 1.0, 1e-15);
  EXPECT_EQ(k[0], k[4]);
  EXPECT_EQ(k[1], k[3]);
  EXPECT_NEAR(k[1] / k[2], std::exp(-0.5), 1e-15);
  EXPECT_NEAR(k[0] / k[2], std::exp(-2.0), 1e-15);
}

TEST(Filter, KernelSizeOneIsIdentity) {
  const V x = random_vector(30, 8);
  for (FilterKind kind : kAllFilters) EXPECT_EQ(apply_filter(x, {kind, 1, 1.0}), x);
}

TEST(Filter, Errors) {
  EXPECT_THROW(apply_filter(V{}, {FilterKind::kMean, 3, 1.0}), Error);
  EXPECT_THROW(apply_filter(V{1, 2}, {FilterKind::kMean, 4, 1.0}), Error);
  EXPECT_THROW(apply_filter(V{1, 2}, {FilterKind::kGaussian, 3, 0.0}), Error);
  EXPECT_EQ(parse_filter(filter_name(FilterKind::kMedian)), FilterKind::kMedian);
  EXPECT_THROW(parse_filter("box"), Error);
}

TEST(FilterProperty, IdempotentOnConstants) {
  for (FilterKind kind : kAllFilters) {
    for (double c : {-0.7, 0.0, 0.123456789}) {
      const V x(11, c);
      EXPECT_EQ(apply_filter(x, {kind, 5, 1.0}), x) << filter_name(kind);
    }
  }
}

TEST(FilterProperty, LinearFiltersCommuteWithScaling) {
  const V x = random_vector(40, 9);
  for (FilterKind kind : {FilterKind::kGaussian, FilterKind::kMean}) {
    const FilterSpec spec{kind, 5, 1.0};
    const V fx = apply_filter(x, spec);
    // Power-of-two factors scale every rounding step exactly.
    for (double c : {2.0, 0.25, -4.0}) {
      V cx(x);
      for (double& v : cx) v *= c;
      const V fcx = apply_filter(cx, spec);
      for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(fcx[i], c * fx[i]);
    }
    V cx(x);
    for (double& v : cx) v *= 0.3;
    const V fcx = apply_filter(cx, spec);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(fcx[i], 0.3 * fx[i], 1e-15);
  }
}

TEST(FilterProperty, MedianOutputsAreInputValues) {
  const V x = random_vector(60, 10);
  const std::set<double> values(x.begin(), x.end());
  for (std::size_t k : {3u, 5u, 7u}) {
    for (double v : apply_filter(x, {FilterKind::kMedian, k, 1.0})) EXPECT_TRUE(values.count(v));
  }
}

TEST(FilterProperty, MedianMatchesSortOracle) {
  const V x = random_vector(25, 11);
  const std::size_t k = 5;
  const V y = apply_filter(x, {FilterKind::kMedian, k, 1.0});
  for (std::size_t i = 0; i < x.size(); ++i) {
    V w;
    for (int j = -2; j <= 2; ++j) {
      const auto idx = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(i) + j, 0,
                                                  static_cast<std::ptrdiff_t>(x.size()) - 1);
      w.push_back(x[static_cast<std::size_t>(idx)]);
    }
    std::sort(w.begin(), w.end());
    EXPECT_EQ(y[i], w[2]);
  }
}

TEST(FilterProperty, VjpMatchesFiniteDifferencesForLinearFilters) {
  const V x = random_vector(20, 12);
  const V g = random_vector(20, 13);
  for (FilterKind kind : {FilterKind::kGaussian, FilterKind::kMean}) {
    const FilterSpec spec{kind, 5, 1.2};
    const V vjp = filter_vjp(x, spec, g);
    const auto fd = ad::finite_diff_gradient(
        [&](std::span<const double> p) {
          const V y = apply_filter(p, spec);
          return std::inner_product(y.begin(), y.end(), g.begin(), 0.0);
        },
        x, 1e-6);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(vjp[i], fd[i], 1e-8);
  }
}

TEST(FilteredScorer, GradientThroughMeanFilter) {
  const V w = random_vector(30, 14);
  const LinearScorer inner(w);
  const FilterSpec spec{FilterKind::kMean, 3, 1.0};
  const FilteredScorer f(inner, spec);
  const V x = random_vector(30, 15, -0.5, 0.5);
  V g;
  const double s = f.score_and_gradient(x, g);
  EXPECT_NEAR(s, inner.score(apply_filter(x, spec)), 1e-15);
  const auto fd = ad::finite_diff_gradient([&](std::span<const double> p) { return f.score(p); },
                                           x, 1e-6);
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_LT(asvvote::testing::rel_error(g[i], fd[i]), 1e-4) << i;
  }
}

TEST(FilteredScorer, MedianRoutesGradientToSelectedSample) {
  const V w{1.0, 10.0, 100.0};
  const LinearScorer inner(w);
  const FilteredScorer f(inner, {FilterKind::kMedian, 3, 1.0});
  // Windows (5,5,1) (5,1,3) (1,3,3) select samples 0, 2 and 2.
  V g;
  f.score_and_gradient(V{5, 1, 3}, g);
  EXPECT_EQ(g, (V{1.0, 0.0, 110.0}));
}

}  // namespace
}  // namespace asvvote
