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

// Differentiable log-mel filterbank front-end.

#ifndef ASVVOTE_FEATURES_HPP_
#define ASVVOTE_FEATURES_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "asvvote/autodiff.hpp"

namespace asvvote {

struct FeatureConfig {
  double sample_rate = 8000.0;
  std::size_t win_length = 200;  // 25 ms
  std::size_t hop_length = 80;   // 10 ms
  std::size_t n_fft = 256;
  std::size_t n_mels = 24;
  double log_floor = 1e-8;

  // Window and shift given in milliseconds, rounded to whole samples.
  static FeatureConfig from_milliseconds(double sample_rate, double win_ms,
                                         double hop_ms, std::size_t n_fft,
                                         std::size_t n_mels);

  std::size_t n_bins() const { return n_fft / 2 + 1; }
  void validate() const;

  bool operator==(const FeatureConfig&) const = default;
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// w[i] = 0.54 - 0.46 cos(2 pi i / (n - 1)).
std::vector<double> hamming_window(std::size_t n);

// Triangular HTK-mel filters, [n_mels, n_fft / 2 + 1].
ad::Tensor mel_filterbank(const FeatureConfig& config);

std::size_t num_frames(std::size_t length, std::size_t win, std::size_t hop);

// [n_frames, win]; trailing samples that do not fill a frame are dropped.
ad::Tensor frame_signal(std::span<const double> waveform, std::size_t win,
                        std::size_t hop);

// |DFT(frame zero-padded to n_fft)[k]|^2 for k = 0 .. n_fft / 2.
std::vector<double> power_spectrum(std::span<const double> frame,
                                   std::size_t n_fft);

// Holds the window, DFT and mel matrices for one configuration.  Immutable
// after construction and safe to share across threads.
class FbankExtractor {
 public:
  explicit FbankExtractor(const FeatureConfig& config);

  const FeatureConfig& config() const { return config_; }

  // [n_frames, n_mels] log-mel features recorded on the waveform's tape.
  ad::Var extract(ad::Var waveform) const;

  // Same features computed on a private tape.
  ad::Tensor extract(std::span<const double> waveform) const;

 private:
  FeatureConfig config_;
  ad::Tensor window_;    // [win]
  ad::Tensor dft_cos_;   // [win, n_bins]
  ad::Tensor dft_sin_;   // [win, n_bins]
  ad::Tensor mel_t_;     // [n_bins, n_mels]
};

}  // namespace asvvote

#endif  // ASVVOTE_FEATURES_HPP_
