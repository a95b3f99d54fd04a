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

// Synthetic speakers and utterances.
//
// A speaker is a harmonic source (fundamental plus weighted harmonics)
// shaped by two or three formant resonances.  Utterances of one speaker
// share these traits and differ in phases, syllable envelope, small pitch
// and formant jitter, and additive noise.

#ifndef ASVVOTE_CORPUS_HPP_
#define ASVVOTE_CORPUS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "asvvote/metrics.hpp"

namespace asvvote {

struct SpeakerProfile {
  std::string speaker_id;
  double fundamental_freq = 120.0;         // Hz, [80, 300]
  std::vector<double> harmonic_amplitudes;  // [0] is the fundamental
  std::vector<double> formant_centers;      // Hz
  std::vector<double> formant_bandwidths;   // Hz
  double noise_level = 0.01;                // relative to the voiced peak

  bool operator==(const SpeakerProfile&) const = default;
};

struct Utterance {
  std::string utterance_id;
  std::string speaker_id;
  std::vector<double> waveform;
  double sample_rate = 8000.0;
  std::uint64_t seed = 0;

  double duration() const { return static_cast<double>(waveform.size()) / sample_rate; }
};

// Deterministic profile; `speaker_id` defaults to "spk_<seed hex>".
SpeakerProfile gen_speaker(std::uint64_t seed, std::string speaker_id = {});

// Peak-normalized to 0.5 and quantized to the 16-bit PCM grid, so writing
// the waveform to WAV and reading it back is lossless.
Utterance synth_utterance(const SpeakerProfile& profile, double duration_seconds,
                          std::uint64_t seed, double sample_rate = 8000.0,
                          std::string utterance_id = {});

struct CorpusConfig {
  std::size_t n_speakers = 20;
  std::size_t utterances_per_speaker = 10;
  double duration_seconds = 2.0;
  double sample_rate = 8000.0;
  std::size_t n_target_trials = 300;
  std::size_t n_nontarget_trials = 300;
  double dev_fraction = 400.0 / 600.0;
  std::uint64_t seed = 20210;
};

struct Corpus {
  std::vector<SpeakerProfile> speakers;
  std::vector<Utterance> utterances;
  TrialSet trials;

  const Utterance& utterance(const std::string& id) const;
};

// Pure function of the config.  Speakers are spk00, spk01, ...; utterances
// spkNN_uMM.
Corpus generate_corpus(const CorpusConfig& config);

// Target trials pair distinct utterances of one speaker, non-target trials
// utterances of different speakers; no pair repeats.  Partition tags are
// left at dev until split_trials assigns them.
std::vector<Trial> build_trials(std::span<const Utterance> utterances,
                                std::size_t n_target, std::size_t n_nontarget,
                                std::uint64_t seed);

// ---------------------------------------------------------------------------
// Files: <dir>/wav/<utterance_id>.wav, manifest.csv, trials.csv
// ---------------------------------------------------------------------------

// Writes the corpus and returns the manifest hash.
std::uint64_t write_corpus(const Corpus& corpus, const std::string& dir);
Corpus read_corpus(const std::string& dir);

// FNV-1a over the manifest rows, trial rows and 16-bit sample data.
std::uint64_t corpus_hash(const Corpus& corpus);

void write_trials_csv(const std::string& path, std::span<const Trial> trials);
std::vector<Trial> read_trials_csv(const std::string& path);

}  // namespace asvvote

#endif  // ASVVOTE_CORPUS_HPP_
