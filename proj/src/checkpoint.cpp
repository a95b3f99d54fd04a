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

// Binary checkpoint container.  All integers and floats little-endian:
//
//   "ASVVCKPT"                      8 bytes
//   u32 version (1)
//   u32 n_settings
//     { u32 key_len, key bytes, f64 value } * n_settings
//   u32 n_tensors
//     { u32 name_len, name bytes, u32 rank, u64 dims[rank], f64 data[] }

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "asvvote/error.hpp"
#include "asvvote/model.hpp"

namespace asvvote {

namespace {

constexpr char kMagic[8] = {'A', 'S', 'V', 'V', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

class ByteWriter {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u32(std::uint32_t v) { little(v); }
  void u64(std::uint64_t v) { little(v); }
  void f64(double v) { little(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  template <typename T>
  void little(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}
  void raw(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() { return little<std::uint32_t>(); }
  std::uint64_t u64() { return little<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(little<std::uint64_t>()); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw Error("checkpoint: truncated data");
  }
  template <typename T>
  T little() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(in_[pos_ + i]) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::vector<std::pair<std::string, double>> settings_of(const ModelConfig& c) {
  const FeatureConfig& f = c.features;
  return {
      {"sample_rate", f.sample_rate},
      {"win_length", static_cast<double>(f.win_length)},
      {"hop_length", static_cast<double>(f.hop_length)},
      {"n_fft", static_cast<double>(f.n_fft)},
      {"n_mels", static_cast<double>(f.n_mels)},
      {"log_floor", f.log_floor},
      {"hidden_dim", static_cast<double>(c.hidden_dim)},
      {"attention_dim", static_cast<double>(c.attention_dim)},
      {"embedding_dim", static_cast<double>(c.embedding_dim)},
      {"pooling", static_cast<double>(static_cast<int>(c.pooling))},
      {"asp_floor", c.asp_floor},
  };
}

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const AsvModel& model) {
  ByteWriter w;
  w.raw(kMagic, sizeof(kMagic));
  w.u32(kVersion);
  const auto settings = settings_of(model.config());
  w.u32(static_cast<std::uint32_t>(settings.size()));
  for (const auto& [key, value] : settings) {
    w.str(key);
    w.f64(value);
  }
  w.u32(static_cast<std::uint32_t>(model.parameters().size()));
  for (const auto& [name, t] : model.parameters()) {
    w.str(name);
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) w.u64(d);
    for (double v : t.data()) w.f64(v);
  }
  return w.take();
}

AsvModel deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  char magic[8];
  r.raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error("checkpoint: bad magic, not an asvvote checkpoint");
  }
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw Error("checkpoint: unsupported version " + std::to_string(version));
  }
  std::map<std::string, double> settings;
  for (std::uint32_t n = r.u32(), i = 0; i < n; ++i) {
    std::string key = r.str();
    settings[key] = r.f64();
  }
  auto get = [&](const char* key) {
    auto it = settings.find(key);
    if (it == settings.end()) throw Error(std::string("checkpoint: missing setting ") + key);
    return it->second;
  };
  auto count = [&](const char* key) { return static_cast<std::size_t>(get(key)); };
  ModelConfig c;
  c.features.sample_rate = get("sample_rate");
  c.features.win_length = count("win_length");
  c.features.hop_length = count("hop_length");
  c.features.n_fft = count("n_fft");
  c.features.n_mels = count("n_mels");
  c.features.log_floor = get("log_floor");
  c.hidden_dim = count("hidden_dim");
  c.attention_dim = count("attention_dim");
  c.embedding_dim = count("embedding_dim");
  const int pooling = static_cast<int>(get("pooling"));
  if (pooling < 0 || pooling > 2) throw Error("checkpoint: bad pooling kind");
  c.pooling = static_cast<PoolingKind>(pooling);
  c.asp_floor = get("asp_floor");

  ParameterList params;
  for (std::uint32_t n = r.u32(), i = 0; i < n; ++i) {
    std::string name = r.str();
    const std::uint32_t rank = r.u32();
    if (rank > 8) throw Error("checkpoint: tensor '" + name + "' has absurd rank");
    ad::Shape shape(rank);
    std::size_t numel = 1;
    for (auto& d : shape) {
      d = static_cast<std::size_t>(r.u64());
      numel *= d;
    }
    if (numel > bytes.size() / 8) throw Error("checkpoint: tensor '" + name + "' too large");
    std::vector<double> data(numel);
    for (double& v : data) v = r.f64();
    params.emplace_back(std::move(name), ad::Tensor(std::move(shape), std::move(data)));
  }
  if (!r.done()) throw Error("checkpoint: trailing bytes");
  return AsvModel(c, std::move(params));
}

void save_checkpoint(const AsvModel& model, const std::string& path) {
  const std::vector<std::uint8_t> bytes = serialize_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("save_checkpoint: cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("save_checkpoint: write to '" + path + "' failed");
}

AsvModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_checkpoint: cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace asvvote
