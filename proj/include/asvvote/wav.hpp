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

// Mono 16-bit PCM WAV files.  Float samples map to integers as
// round(x * 32768), clamped to [-32768, 32767].

#ifndef ASVVOTE_WAV_HPP_
#define ASVVOTE_WAV_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace asvvote {

inline constexpr double kPcmScale = 32768.0;

struct WavData {
  std::vector<double> samples;
  std::uint32_t sample_rate = 0;
};

std::int16_t to_pcm16(double x);
double from_pcm16(std::int16_t v);

std::vector<std::uint8_t> encode_wav(std::span<const double> samples,
                                     std::uint32_t sample_rate);
WavData decode_wav(std::span<const std::uint8_t> bytes);

void write_wav(const std::string& path, std::span<const double> samples,
               std::uint32_t sample_rate);
WavData read_wav(const std::string& path);

}  // namespace asvvote

#endif  // ASVVOTE_WAV_HPP_
