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

#include "asvvote/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "asvvote/error.hpp"
#include "asvvote/rng.hpp"
#include "asvvote/wav.hpp"

namespace asvvote {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kHarmonics = 24;
constexpr double kPeak = 0.5;

double formant_gain(const SpeakerProfile& p, std::span<const double> centers, double f) {
  double g = 0.0;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const double d = (f - centers[k]) / p.formant_bandwidths[k];
    g += 1.0 / (1.0 + d * d);
  }
  return g;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != header) {
    throw Error("'" + path + "' has an unexpected header");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(fmt::format("'{}': row {} has {} cells, expected {}", path,
                              rows.size() + 1, cells.size(), header.size()));
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::string manifest_row(const Utterance& u) {
  return fmt::format("{},{},wav/{}.wav,{:.6f},{}", u.utterance_id, u.speaker_id,
                     u.utterance_id, u.duration(), u.seed);
}

std::string trial_row(const Trial& t) {
  return fmt::format("{},{},{},{},{}", t.trial_id, t.enroll_id, t.test_id,
                     t.is_target ? 1 : 0, partition_name(t.partition));
}

}  // namespace

SpeakerProfile gen_speaker(std::uint64_t seed, std::string speaker_id) {
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  SpeakerProfile p;
  p.speaker_id = speaker_id.empty() ? fmt::format("spk_{:016x}", seed) : std::move(speaker_id);
  p.fundamental_freq = std::exp(uniform(std::log(80.0), std::log(300.0)));
  p.harmonic_amplitudes.resize(kHarmonics);
  p.harmonic_amplitudes[0] = 1.0;
  for (std::size_t h = 1; h < kHarmonics; ++h) {
    p.harmonic_amplitudes[h] = uniform(0.2, 1.0) / static_cast<double>(h + 1);
  }
  const std::size_t n_formants = unit(rng) < 0.5 ? 2 : 3;
  const double ranges[3][2] = {{300.0, 900.0}, {900.0, 2300.0}, {2300.0, 3400.0}};
  for (std::size_t k = 0; k < n_formants; ++k) {
    p.formant_centers.push_back(uniform(ranges[k][0], ranges[k][1]));
    p.formant_bandwidths.push_back(uniform(60.0, 200.0));
  }
  p.noise_level = uniform(5e-5, 1e-3);
  p.fundamental_freq = std::clamp(p.fundamental_freq, 80.0, 300.0);
  return p;
}

Utterance synth_utterance(const SpeakerProfile& profile, double duration_seconds,
                          std::uint64_t seed, double sample_rate,
                          std::string utterance_id) {
  if (!(duration_seconds > 0.0)) {
    throw Error("synth_utterance: duration must be positive");
  }
  if (!(sample_rate > 0.0)) throw Error("synth_utterance: sample_rate must be positive");
  const auto n = static_cast<std::size_t>(std::llround(duration_seconds * sample_rate));
  if (n < 2) throw Error("synth_utterance: duration shorter than two samples");

  std::mt19937_64 rng(splitmix64(seed ^ fnv1a64(profile.speaker_id)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  std::normal_distribution<double> normal(0.0, 1.0);

  const double pitch = profile.fundamental_freq * (1.0 + uniform(-0.0025, 0.0025));
  std::vector<double> centers = profile.formant_centers;
  for (double& c : centers) c *= 1.0 + uniform(-0.1, 0.1);

  const double nyquist = 0.5 * sample_rate;
  std::vector<double> amp(profile.harmonic_amplitudes.size());
  std::vector<double> phase(amp.size());
  for (std::size_t h = 0; h < amp.size(); ++h) {
    const double f = pitch * static_cast<double>(h + 1);
    phase[h] = uniform(0.0, 2.0 * std::numbers::pi);
    if (f >= 0.95 * nyquist) continue;
    if (h == 0) {
      amp[h] = profile.harmonic_amplitudes[0];
    } else {
      const double jitter = std::exp(0.4 * normal(rng));
      amp[h] = std::min(0.7, profile.harmonic_amplitudes[h] * jitter *
                                 (0.15 + formant_gain(profile, centers, f)));
    }
  }

  // Syllable envelope: voiced bumps separated by short pauses.
  std::vector<double> env(n, 0.0);
  double t = uniform(0.0, 0.05);
  while (t < duration_seconds) {
    const double len = uniform(0.12, 0.30);
    const auto a = static_cast<std::size_t>(t * sample_rate);
    const auto b = std::min(n, static_cast<std::size_t>((t + len) * sample_rate));
    // Levels span 60 dB, so quiet syllables sit near the noise floor.
    const double level = std::exp(uniform(std::log(1e-3), 0.0));
    for (std::size_t i = a; i < b; ++i) {
      const double u = static_cast<double>(i - a) / static_cast<double>(b - a);
      env[i] = level * std::sqrt(std::sin(std::numbers::pi * u));
    }
    t += len + uniform(0.03, 0.12);
  }

  std::vector<double> x(n, 0.0);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (env[i] == 0.0) continue;
    const double ti = static_cast<double>(i) / sample_rate;
    double v = 0.0;
    for (std::size_t h = 0; h < amp.size(); ++h) {
      if (amp[h] == 0.0) continue;
      v += amp[h] * std::sin(2.0 * std::numbers::pi * pitch * static_cast<double>(h + 1) * ti +
                             phase[h]);
    }
    x[i] = env[i] * v;
    peak = std::max(peak, std::abs(x[i]));
  }
  if (peak > 0.0) {
    for (double& v : x) v /= peak;
  }
  // The noise floor varies from one recording to the next around the
  // speaker's typical level.
  const double noise = profile.noise_level * std::exp(normal(rng));
  for (double& v : x) v += noise * normal(rng);

  double final_peak = 0.0;
  for (double v : x) final_peak = std::max(final_peak, std::abs(v));
  for (double& v : x) v = from_pcm16(to_pcm16(kPeak * v / final_peak));

  Utterance u;
  u.utterance_id = utterance_id.empty() ? fmt::format("{}_{:016x}", profile.speaker_id, seed)
                                        : std::move(utterance_id);
  u.speaker_id = profile.speaker_id;
  u.waveform = std::move(x);
  u.sample_rate = sample_rate;
  u.seed = seed;
  return u;
}

const Utterance& Corpus::utterance(const std::string& id) const {
  for (const Utterance& u : utterances) {
    if (u.utterance_id == id) return u;
  }
  throw Error("corpus has no utterance '" + id + "'");
}

std::vector<Trial> build_trials(std::span<const Utterance> utterances,
                                std::size_t n_target, std::size_t n_nontarget,
                                std::uint64_t seed) {
  using Pair = std::pair<std::size_t, std::size_t>;
  std::vector<Pair> targets;
  std::vector<Pair> nontargets;
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    for (std::size_t j = i + 1; j < utterances.size(); ++j) {
      if (utterances[i].utterance_id == utterances[j].utterance_id) continue;
      (utterances[i].speaker_id == utterances[j].speaker_id ? targets : nontargets)
          .emplace_back(i, j);
    }
  }
  if (targets.size() < n_target || nontargets.size() < n_nontarget) {
    throw Error(fmt::format(
        "build_trials: insufficient utterances; short by {} target and {} "
        "non-target pairs",
        n_target > targets.size() ? n_target - targets.size() : 0,
        n_nontarget > nontargets.size() ? n_nontarget - nontargets.size() : 0));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(targets.begin(), targets.end(), rng);
  std::shuffle(nontargets.begin(), nontargets.end(), rng);

  std::vector<std::pair<Pair, bool>> chosen;
  for (std::size_t i = 0; i < n_target; ++i) chosen.emplace_back(targets[i], true);
  for (std::size_t i = 0; i < n_nontarget; ++i) chosen.emplace_back(nontargets[i], false);
  std::shuffle(chosen.begin(), chosen.end(), rng);

  std::bernoulli_distribution flip(0.5);
  std::vector<Trial> trials;
  trials.reserve(chosen.size());
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    auto [pair, is_target] = chosen[k];
    if (flip(rng)) std::swap(pair.first, pair.second);
    Trial t;
    t.trial_id = fmt::format("t{:05}", k);
    t.enroll_id = utterances[pair.first].utterance_id;
    t.test_id = utterances[pair.second].utterance_id;
    t.is_target = is_target;
    trials.push_back(std::move(t));
  }
  return trials;
}

Corpus generate_corpus(const CorpusConfig& config) {
  if (config.n_speakers < 2) throw Error("generate_corpus: need at least 2 speakers");
  if (config.utterances_per_speaker < 2) {
    throw Error("generate_corpus: need at least 2 utterances per speaker");
  }
  Corpus corpus;
  for (std::size_t s = 0; s < config.n_speakers; ++s) {
    corpus.speakers.push_back(
        gen_speaker(derive_seed(config.seed, "speaker", s), fmt::format("spk{:02}", s)));
  }
  for (std::size_t s = 0; s < config.n_speakers; ++s) {
    for (std::size_t u = 0; u < config.utterances_per_speaker; ++u) {
      const std::uint64_t seed = derive_seed(config.seed, "utterance",
                                             s * config.utterances_per_speaker + u);
      corpus.utterances.push_back(synth_utterance(
          corpus.speakers[s], config.duration_seconds, seed, config.sample_rate,
          fmt::format("{}_u{:02}", corpus.speakers[s].speaker_id, u)));
    }
  }
  std::vector<Trial> trials =
      build_trials(corpus.utterances, config.n_target_trials, config.n_nontarget_trials,
                   derive_seed(config.seed, "trials"));
  corpus.trials = split_trials(std::move(trials), config.dev_fraction,
                               derive_seed(config.seed, "split"));
  return corpus;
}

std::uint64_t corpus_hash(const Corpus& corpus) {
  std::uint64_t h = fnv1a64("utterance_id,speaker_id,path,duration,seed\n");
  for (const Utterance& u : corpus.utterances) {
    h = fnv1a64(manifest_row(u) + "\n", h);
    for (double v : u.waveform) {
      const auto pcm = static_cast<std::uint16_t>(to_pcm16(v));
      const std::uint8_t bytes[2] = {static_cast<std::uint8_t>(pcm),
                                     static_cast<std::uint8_t>(pcm >> 8)};
      h = fnv1a64(bytes, h);
    }
  }
  for (const Trial& t : corpus.trials.trials) h = fnv1a64(trial_row(t) + "\n", h);
  return h;
}

void write_trials_csv(const std::string& path, std::span<const Trial> trials) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("write_trials_csv: cannot open '" + path + "'");
  out << "trial_id,enroll_id,test_id,is_target,partition\n";
  for (const Trial& t : trials) out << trial_row(t) << '\n';
  if (!out) throw Error("write_trials_csv: write to '" + path + "' failed");
}

std::vector<Trial> read_trials_csv(const std::string& path) {
  std::vector<Trial> trials;
  for (auto& row : read_csv(path, {"trial_id", "enroll_id", "test_id", "is_target",
                                   "partition"})) {
    Trial t;
    t.trial_id = row[0];
    t.enroll_id = row[1];
    t.test_id = row[2];
    if (row[3] != "0" && row[3] != "1") {
      throw Error("'" + path + "': is_target must be 0 or 1 in trial " + row[0]);
    }
    t.is_target = row[3] == "1";
    t.partition = parse_partition(row[4]);
    trials.push_back(std::move(t));
  }
  return trials;
}

std::uint64_t write_corpus(const Corpus& corpus, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "wav", ec);
  if (ec) throw Error("write_corpus: cannot create '" + dir + "': " + ec.message());
  const std::string manifest_path = (fs::path(dir) / "manifest.csv").string();
  std::ofstream manifest(manifest_path, std::ios::trunc);
  if (!manifest) throw Error("write_corpus: cannot open '" + manifest_path + "'");
  manifest << "utterance_id,speaker_id,path,duration,seed\n";
  for (const Utterance& u : corpus.utterances) {
    write_wav((fs::path(dir) / "wav" / (u.utterance_id + ".wav")).string(), u.waveform,
              static_cast<std::uint32_t>(u.sample_rate));
    manifest << manifest_row(u) << '\n';
  }
  if (!manifest) throw Error("write_corpus: write to '" + manifest_path + "' failed");
  write_trials_csv((fs::path(dir) / "trials.csv").string(), corpus.trials.trials);
  return corpus_hash(corpus);
}

Corpus read_corpus(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::exists(root / "manifest.csv")) {
    throw Error("read_corpus: no manifest.csv in '" + dir + "'");
  }
  Corpus corpus;
  for (auto& row : read_csv((root / "manifest.csv").string(),
                            {"utterance_id", "speaker_id", "path", "duration", "seed"})) {
    const WavData wav = read_wav((root / row[2]).string());
    Utterance u;
    u.utterance_id = row[0];
    u.speaker_id = row[1];
    u.waveform = wav.samples;
    u.sample_rate = wav.sample_rate;
    u.seed = std::stoull(row[4]);
    corpus.utterances.push_back(std::move(u));
  }
  corpus.trials.trials = read_trials_csv((root / "trials.csv").string());
  corpus.trials.validate();
  return corpus;
}

}  // namespace asvvote
