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
#include <string>

#include "asvvote/error.hpp"

namespace asvvote {

FeatureConfig FeatureConfig::from_milliseconds(double sample_rate,
                                               double win_ms, double hop_ms,
                                               std::size_t n_fft,
                                               std::size_t n_mels) {
  FeatureConfig c;
  c.sample_rate = sample_rate;
  c.win_length = static_cast<std::size_t>(std::lround(sample_rate * win_ms / 1000.0));
  c.hop_length = static_cast<std::size_t>(std::lround(sample_rate * hop_ms / 1000.0));
  c.n_fft = n_fft;
  c.n_mels = n_mels;
  c.validate();
  return c;
}

void FeatureConfig::validate() const {
  if (!(sample_rate > 0.0)) throw Error("FeatureConfig: sample_rate must be > 0");
  if (win_length < 2) throw Error("FeatureConfig: win_length must be >= 2");
  if (win_length > n_fft) {
    throw Error("FeatureConfig: win_length " + std::to_string(win_length) +
                " exceeds n_fft " + std::to_string(n_fft));
  }
  if (hop_length < 1) throw Error("FeatureConfig: hop_length must be >= 1");
  if (n_mels < 1) throw Error("FeatureConfig: n_mels must be >= 1");
  if (!(log_floor > 0.0)) throw Error("FeatureConfig: log_floor must be > 0");
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

std::vector<double> hamming_window(std::size_t n) {
  if (n < 2) throw Error("hamming_window: n must be >= 2");
  std::vector<double> w(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom);
  }
  // cos() is not exactly symmetric in floating point; mirror the first half.
  for (std::size_t i = 0; i < n / 2; ++i) w[n - 1 - i] = w[i];
  return w;
}

ad::Tensor mel_filterbank(const FeatureConfig& config) {
  config.validate();
  const std::size_t bins = config.n_bins();
  const std::size_t mels = config.n_mels;
  const double top = hz_to_mel(config.sample_rate / 2.0);
  std::vector<double> edges(mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(mels + 1));
  }
  ad::Tensor fb = ad::Tensor::zeros({mels, bins});
  for (std::size_t m = 0; m < mels; ++m) {
    const double lo = edges[m];
    const double mid = edges[m + 1];
    const double hi = edges[m + 2];
    double row_sum = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * config.sample_rate /
                       static_cast<double>(config.n_fft);
      double w = 0.0;
      if (f > lo && f <= mid) {
        w = (f - lo) / (mid - lo);
      } else if (f > mid && f < hi) {
        w = (hi - f) / (hi - mid);
      }
      fb[m * bins + k] = w;
      row_sum += w;
    }
    if (!(row_sum > 0.0)) {
      throw Error("mel_filterbank: filter " + std::to_string(m) +
                  " covers no FFT bin; reduce n_mels or raise n_fft");
    }
  }
  return fb;
}

std::size_t num_frames(std::size_t length, std::size_t win, std::size_t hop) {
  if (win == 0 || hop == 0) throw Error("frame_signal: win and hop must be >= 1");
  if (length < win) {
    throw Error("frame_signal: utterance too short (" + std::to_string(length) +
                " samples, window " + std::to_string(win) + ")");
  }
  return (length - win) / hop + 1;
}

ad::Tensor frame_signal(std::span<const double> waveform, std::size_t win,
                        std::size_t hop) {
  const std::size_t frames = num_frames(waveform.size(), win, hop);
  ad::Tensor out = ad::Tensor::zeros({frames, win});
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t j = 0; j < win; ++j) out[f * win + j] = waveform[f * hop + j];
  }
  return out;
}

std::vector<double> power_spectrum(std::span<const double> frame,
                                   std::size_t n_fft) {
  if (frame.size() > n_fft) {
    throw Error("power_spectrum: frame of " + std::to_string(frame.size()) +
                " samples exceeds n_fft " + std::to_string(n_fft));
  }
  const std::size_t bins = n_fft / 2 + 1;
  std::vector<double> power(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t n = 0; n < frame.size(); ++n) {
      // Reduce k*n mod n_fft so the angle stays small and exact-ish.
      const double angle = 2.0 * std::numbers::pi *
                           static_cast<double>((k * n) % n_fft) /
                           static_cast<double>(n_fft);
      re += frame[n] * std::cos(angle);
      im -= frame[n] * std::sin(angle);
    }
    power[k] = re * re + im * im;
  }
  return power;
}

FbankExtractor::FbankExtractor(const FeatureConfig& config) : config_(config) {
  config_.validate();
  const std::size_t win = config_.win_length;
  const std::size_t bins = config_.n_bins();
  const std::size_t n_fft = config_.n_fft;
  window_ = ad::Tensor::vector(hamming_window(win));
  // Zero padding to n_fft means only the first `win` rows of the DFT matrix
  // contribute.
  dft_cos_ = ad::Tensor::zeros({win, bins});
  dft_sin_ = ad::Tensor::zeros({win, bins});
  for (std::size_t n = 0; n < win; ++n) {
    for (std::size_t k = 0; k < bins; ++k) {
      const double angle = 2.0 * std::numbers::pi *
                           static_cast<double>((k * n) % n_fft) /
                           static_cast<double>(n_fft);
      dft_cos_[n * bins + k] = std::cos(angle);
      dft_sin_[n * bins + k] = -std::sin(angle);
    }
  }
  const ad::Tensor fb = mel_filterbank(config_);
  mel_t_ = ad::Tensor::zeros({bins, config_.n_mels});
  for (std::size_t m = 0; m < config_.n_mels; ++m) {
    for (std::size_t k = 0; k < bins; ++k) {
      mel_t_[k * config_.n_mels + m] = fb[m * bins + k];
    }
  }
}

ad::Var FbankExtractor::extract(ad::Var waveform) const {
  ad::Tape& tape = waveform.tape();
  ad::Var frames = ad::frame_slice(waveform, config_.win_length, config_.hop_length);
  ad::Var windowed = ad::mul(frames, tape.constant(window_));
  ad::Var re = ad::matmul(windowed, tape.constant(dft_cos_));
  ad::Var im = ad::matmul(windowed, tape.constant(dft_sin_));
  ad::Var power = ad::add(ad::square(re), ad::square(im));
  ad::Var mel = ad::matmul(power, tape.constant(mel_t_));
  return ad::log(ad::add_scalar(mel, config_.log_floor));
}

ad::Tensor FbankExtractor::extract(std::span<const double> waveform) const {
  ad::Tape tape;
  ad::Var x = tape.constant(
      ad::Tensor::vector(std::vector<double>(waveform.begin(), waveform.end())));
  return extract(x).value();
}

}  // namespace asvvote
