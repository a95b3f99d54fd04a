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

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "asvvote/error.hpp"

namespace asvvote {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

}  // namespace

std::int16_t to_pcm16(double x) {
  const double scaled = std::nearbyint(x * kPcmScale);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

double from_pcm16(std::int16_t v) { return static_cast<double>(v) / kPcmScale; }

std::vector<std::uint8_t> encode_wav(std::span<const double> samples,
                                     std::uint32_t sample_rate) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, sample_rate);
  put_u32(out, sample_rate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double x : samples) put_u16(out, static_cast<std::uint16_t>(to_pcm16(x)));
  return out;
}

WavData decode_wav(std::span<const std::uint8_t> b) {
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 ||
      std::memcmp(b.data() + 8, "WAVE", 4) != 0) {
    throw Error("decode_wav: not a RIFF/WAVE file");
  }
  WavData wav;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const std::uint32_t size = get_u32(b, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > b.size()) throw Error("decode_wav: truncated chunk");
    if (std::memcmp(b.data() + pos, "fmt ", 4) == 0) {
      if (size < 16) throw Error("decode_wav: short fmt chunk");
      const std::uint16_t format = get_u16(b, body);
      const std::uint16_t channels = get_u16(b, body + 2);
      const std::uint16_t bits = get_u16(b, body + 14);
      if (format != 1 || channels != 1 || bits != 16) {
        throw Error("decode_wav: only mono 16-bit PCM is supported");
      }
      wav.sample_rate = get_u32(b, body + 4);
      have_fmt = true;
    } else if (std::memcmp(b.data() + pos, "data", 4) == 0) {
      if (!have_fmt) throw Error("decode_wav: data chunk before fmt chunk");
      wav.samples.resize(size / 2);
      for (std::size_t i = 0; i < wav.samples.size(); ++i) {
        wav.samples[i] = from_pcm16(static_cast<std::int16_t>(get_u16(b, body + 2 * i)));
      }
      return wav;
    }
    pos = body + size + (size & 1);
  }
  throw Error("decode_wav: no data chunk");
}

void write_wav(const std::string& path, std::span<const double> samples,
               std::uint32_t sample_rate) {
  const std::vector<std::uint8_t> bytes = encode_wav(samples, sample_rate);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("write_wav: cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write_wav: write to '" + path + "' failed");
}

WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("read_wav: cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_wav(bytes);
}

}  // namespace asvvote
