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

#include "asvvote/features.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include <gtest/gtest.h>

#include "asvvote/error.hpp"
#include "test_util.hpp"

namespace asvvote {
namespace {

using asvvote::testing::random_vector;

TEST(FrameSignal, FrameCounts) {
  EXPECT_EQ(frame_signal(std::vector<double>(400, 0.0), 400, 160).rows(), 1u);
  EXPECT_EQ(frame_signal(std::vector<double>(560, 0.0), 400, 160).rows(), 2u);
  EXPECT_EQ(num_frames(560, 400, 160), 2u);
}

TEST(FrameSignal, TooShortIsAnError) {
  try {
    frame_signal(std::vector<double>(300, 0.0), 400, 160);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("utterance too short"), std::string::npos);
  }
}

TEST(FrameSignal, FrameCoversHopOffset) {
  std::vector<double> x(20);
  std::iota(x.begin(), x.end(), 0.0);
  const ad::Tensor f = frame_signal(x, 5, 4);
  ASSERT_EQ(f.rows(), 4u);
  for (std::size_t i = 0; i < f.rows(); ++i) {
    for (std::size_t j = 0; j < 5; ++j) EXPECT_EQ(f.at(i, j), static_cast<double>(i * 4 + j));
  }
}

TEST(Hamming, EndpointsMidpointSymmetry) {
  for (std::size_t n : {2u, 7u, 200u, 201u}) {
    const auto w = hamming_window(n);
    EXPECT_NEAR(w[0], 0.08, 1e-15);
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(w[i], w[n - 1 - i]) << n << " " << i;
    if (n % 2 == 1) EXPECT_NEAR(w[(n - 1) / 2], 1.0, 1e-15);
  }
  EXPECT_THROW(hamming_window(1), Error);
}

TEST(PowerSpectrum, ZeroFrame) {
  for (double v : power_spectrum(std::vector<double>(16, 0.0), 16)) EXPECT_EQ(v, 0.0);
}

TEST(PowerSpectrum, ConstantFrameIsPureDc) {
  const double c = 0.3;
  const std::size_t n = 32;
  const auto p = power_spectrum(std::vector<double>(n, c), n);
  ASSERT_EQ(p.size(), n / 2 + 1);
  EXPECT_NEAR(p[0], (c * n) * (c * n), 1e-10);
  for (std::size_t k = 1; k < p.size(); ++k) EXPECT_LT(p[k], 1e-9);
}

TEST(PowerSpectrum, FourCycleSinusoidPeaksAtBinFour) {
  const std::size_t n = 64;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2.0 * std::numbers::pi * 4.0 * i / n + 0.3);
  const auto p = power_spectrum(x, n);
  // Brute-force DFT oracle.
  for (std::size_t k = 0; k < p.size(); ++k) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      re += x[i] * std::cos(2.0 * std::numbers::pi * k * i / n);
      im -= x[i] * std::sin(2.0 * std::numbers::pi * k * i / n);
    }
    EXPECT_NEAR(p[k], re * re + im * im, 1e-9);
  }
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  EXPECT_GT(p[4] / total, 0.99);
}

TEST(MelFilterbank, ShapeAndRows) {
  const FeatureConfig c;
  const ad::Tensor m = mel_filterbank(c);
  ASSERT_EQ(m.rows(), c.n_mels);
  ASSERT_EQ(m.cols(), c.n_bins());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (std::size_t k = 0; k < m.cols(); ++k) {
      EXPECT_GE(m.at(r, k), 0.0);
      s += m.at(r, k);
    }
    EXPECT_GT(s, 0.0) << "row " << r;
  }
  EXPECT_NEAR(hz_to_mel(700.0), 2595.0 * std::log10(2.0), 1e-9);
  EXPECT_NEAR(mel_to_hz(hz_to_mel(1234.5)), 1234.5, 1e-9);
}

TEST(MelFilterbank, AdjacentFiltersOverlap) {
  const ad::Tensor m = mel_filterbank(FeatureConfig{});
  for (std::size_t r = 0; r + 1 < m.rows(); ++r) {
    bool overlap = false;
    for (std::size_t k = 0; k < m.cols(); ++k) overlap |= m.at(r, k) > 0 && m.at(r + 1, k) > 0;
    EXPECT_TRUE(overlap) << r;
  }
}

TEST(FeatureConfig, Validation) {
  FeatureConfig c;
  c.win_length = 300;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.hop_length = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.n_mels = 0;
  EXPECT_THROW(c.validate(), Error);
  const FeatureConfig ms = FeatureConfig::from_milliseconds(8000, 25, 10, 256, 24);
  EXPECT_EQ(ms.win_length, 200u);
  EXPECT_EQ(ms.hop_length, 80u);
}

TEST(Fbank, ZeroWaveformIsLogFloor) {
  const FeatureConfig c;
  const ad::Tensor f = FbankExtractor(c).extract(std::vector<double>(800, 0.0));
  ASSERT_EQ(f.cols(), c.n_mels);
  for (double v : f.values()) EXPECT_DOUBLE_EQ(v, std::log(c.log_floor));
}

TEST(Fbank, FlatPowerGivesRowSum) {
  // A unit impulse at the start of a rectangular frame has |X[k]|^2 = 1 for
  // every bin, so each cell is log(row sum + floor).  With a Hamming window
  // the impulse is scaled by w[0]^2 = 0.0064.
  FeatureConfig c;
  c.win_length = 256;
  c.hop_length = 256;
  std::vector<double> x(256, 0.0);
  x[0] = 1.0;
  const ad::Tensor f = FbankExtractor(c).extract(x);
  const ad::Tensor m = mel_filterbank(c);
  const double w0 = hamming_window(256)[0];
  for (std::size_t r = 0; r < c.n_mels; ++r) {
    double s = 0.0;
    for (std::size_t k = 0; k < m.cols(); ++k) s += m.at(r, k);
    EXPECT_NEAR(f.at(0, r), std::log(w0 * w0 * s + c.log_floor), 1e-12);
  }
}

TEST(Fbank, GradientOfSumMatchesFiniteDifferences) {
  const FeatureConfig c;
  const FbankExtractor fx(c);
  const auto x = random_vector(560, 4, -0.5, 0.5);
  ad::Tape tape;
  ad::Var w = tape.leaf(ad::Tensor::vector(x));
  const ad::Tensor g = tape.backward(ad::sum(fx.extract(w))).wrt(w);
  const std::vector<std::size_t> coords{0, 17, 100, 199, 200, 333, 480, 559};
  const auto fd = ad::finite_diff_gradient(
      [&](std::span<const double> p) {
        const ad::Tensor f = fx.extract(p);
        double s = 0.0;
        for (double v : f.values()) s += v;
        return s;
      },
      x, 1e-6, coords);
  for (std::size_t i : coords) {
    EXPECT_LT(asvvote::testing::rel_error(g[i], fd[i]), 1e-4) << i;
  }
}

TEST(FbankProperty, Deterministic) {
  const FbankExtractor fx{FeatureConfig{}};
  const auto x = random_vector(1000, 5);
  EXPECT_EQ(fx.extract(x).values(), fx.extract(x).values());
}

TEST(FbankProperty, ScalingShiftsByTwoLogC) {
  const FeatureConfig c;
  const FbankExtractor fx(c);
  const auto x = random_vector(1000, 6, -0.3, 0.3);
  std::vector<double> x2(x);
  for (double& v : x2) v *= 2.0;
  const ad::Tensor a = fx.extract(x);
  const ad::Tensor b = fx.extract(x2);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::exp(a[i]) > 1e4 * c.log_floor) {
      EXPECT_NEAR(b[i] - a[i], 2.0 * std::log(2.0), 1e-3);
      ++checked;
    }
  }
  EXPECT_GT(checked, a.size() / 2);
}

}  // namespace
}  // namespace asvvote
