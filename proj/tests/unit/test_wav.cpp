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

#include "asvvote/wav.hpp"

#include <cstring>

#include <gtest/gtest.h>

#include "asvvote/error.hpp"
#include "test_util.hpp"

namespace asvvote {
namespace {

TEST(Pcm16, Mapping) {
  EXPECT_EQ(to_pcm16(0.0), 0);
  EXPECT_EQ(to_pcm16(0.5), 16384);
  EXPECT_EQ(to_pcm16(-1.0), -32768);
  EXPECT_EQ(to_pcm16(1.0), 32767);
  EXPECT_EQ(to_pcm16(2.0), 32767);
  EXPECT_EQ(to_pcm16(1.4 / 32768.0), 1);
  EXPECT_EQ(to_pcm16(1.6 / 32768.0), 2);
  EXPECT_EQ(from_pcm16(-32768), -1.0);
  for (int v = -32768; v <= 32767; v += 7) {
    EXPECT_EQ(to_pcm16(from_pcm16(static_cast<std::int16_t>(v))), v);
  }
}

TEST(Wav, HeaderLayout) {
  const auto bytes = encode_wav(std::vector<double>{0.0, 0.5, -0.5}, 8000);
  ASSERT_EQ(bytes.size(), 44u + 6u);
  EXPECT_EQ(std::memcmp(bytes.data(), "RIFF", 4), 0);
  EXPECT_EQ(std::memcmp(bytes.data() + 8, "WAVEfmt ", 8), 0);
  EXPECT_EQ(bytes[22], 1);                        // mono
  EXPECT_EQ(bytes[24] | (bytes[25] << 8), 8000);  // sample rate
  EXPECT_EQ(bytes[34], 16);                       // bits per sample
  EXPECT_EQ(std::memcmp(bytes.data() + 36, "data", 4), 0);
  EXPECT_EQ(bytes[40], 6);
  EXPECT_EQ(bytes[46], 0x00);  // 16384 little-endian
  EXPECT_EQ(bytes[47], 0x40);
}

TEST(Wav, RoundTripOnPcmGrid) {
  const auto dir = asvvote::testing::temp_dir("wav");
  std::vector<double> x;
  for (int v : {-32768, -1, 0, 1, 12345, 32767}) x.push_back(from_pcm16(static_cast<std::int16_t>(v)));
  const std::string path = (dir / "a.wav").string();
  write_wav(path, x, 16000);
  const WavData back = read_wav(path);
  EXPECT_EQ(back.samples, x);
  EXPECT_EQ(back.sample_rate, 16000u);
}

TEST(Wav, RejectsBadInput) {
  EXPECT_THROW(decode_wav(std::vector<std::uint8_t>(10, 0)), Error);
  auto bytes = encode_wav(std::vector<double>{0.1, 0.2}, 8000);
  auto stereo = bytes;
  stereo[22] = 2;
  EXPECT_THROW(decode_wav(stereo), Error);
  bytes.resize(bytes.size() - 3);
  EXPECT_THROW(decode_wav(bytes), Error);
  EXPECT_THROW(read_wav("/nonexistent/x.wav"), Error);
}

}  // namespace
}  // namespace asvvote
