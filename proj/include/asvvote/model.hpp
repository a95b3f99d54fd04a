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

// Speaker embedding network and cosine scoring.
//
//   waveform -> log-mel fbank -> fixed input affine -> tanh MLP per frame
//            -> {mean | SAP | ASP} pooling -> linear -> L2 normalize
//
// The score of a trial is the cosine between the test and enrollment
// embeddings.  Training uses AM-softmax over a cosine classifier.

#ifndef ASVVOTE_MODEL_HPP_
#define ASVVOTE_MODEL_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "asvvote/autodiff.hpp"
#include "asvvote/features.hpp"
#include "asvvote/scorer.hpp"

namespace asvvote {

enum class PoolingKind { kMean, kSap, kAsp };

std::string_view pooling_name(PoolingKind kind);
PoolingKind parse_pooling(std::string_view name);

struct ModelConfig {
  FeatureConfig features;
  std::size_t hidden_dim = 64;
  std::size_t attention_dim = 32;
  std::size_t embedding_dim = 32;
  PoolingKind pooling = PoolingKind::kMean;
  double asp_floor = 1e-8;

  bool operator==(const ModelConfig&) const = default;
};

// Named parameter tensors in a fixed order.
using ParameterList = std::vector<std::pair<std::string, ad::Tensor>>;

class AsvModel {
 public:
  // Randomly initialized model with a classifier over `n_classes` speakers.
  AsvModel(const ModelConfig& config, std::size_t n_classes, std::uint64_t seed);
  // Model restored from explicit parameters (checkpoint loading).
  AsvModel(const ModelConfig& config, ParameterList params);

  const ModelConfig& config() const { return config_; }
  const FbankExtractor& extractor() const { return extractor_; }
  std::size_t n_classes() const;

  const ParameterList& parameters() const { return params_; }
  ParameterList& parameters() { return params_; }
  const ad::Tensor& parameter(std::string_view name) const;
  ad::Tensor& parameter(std::string_view name);

  // Feature standardization constants (global, not per utterance).
  void set_input_normalization(double shift, double scale);

 private:
  void check_parameters() const;

  ModelConfig config_;
  FbankExtractor extractor_;
  ParameterList params_;
};

// Parameters placed on a tape, by name.
class BoundParameters {
 public:
  // Leaves when `trainable`, constants otherwise.
  BoundParameters(const AsvModel& model, ad::Tape& tape, bool trainable);
  ad::Var operator[](std::string_view name) const;
  const std::map<std::string, ad::Var, std::less<>>& vars() const { return vars_; }

 private:
  std::map<std::string, ad::Var, std::less<>> vars_;
};

// Attention-weighted mean of frames [T, D] with logits [T, 1] -> [1, D].
ad::Var attentive_mean(ad::Var frames, ad::Var logits);
// [mean, sqrt(sum w f^2 - mean^2 + floor)] -> [1, 2D].
ad::Var attentive_stats(ad::Var frames, ad::Var logits, double floor);

// Attention logits tanh(frames W + b) v, [T, 1].
ad::Var attention_logits(ad::Var frames, ad::Var w, ad::Var b, ad::Var v);
ad::Var pool_sap(ad::Var frames, ad::Var w, ad::Var b, ad::Var v);
ad::Var pool_asp(ad::Var frames, ad::Var w, ad::Var b, ad::Var v,
                 double floor = 1e-8);

// Unit embedding [1, embedding_dim] of `waveform` (rank 1) on its tape.
ad::Var embed(const AsvModel& model, const BoundParameters& params,
              ad::Var waveform);
std::vector<double> embed(const AsvModel& model, std::span<const double> waveform);

double cosine(std::span<const double> a, std::span<const double> b);

// s = f(x_t, x_e): cosine of the two embeddings.
double score(const AsvModel& model, std::span<const double> x_t,
             std::span<const double> x_e);

// Mean over the batch of
//   -log(e^{s(cos_y - m)} / (e^{s(cos_y - m)} + sum_{j != y} e^{s cos_j})).
// `cosines` is [B, C].
ad::Var am_softmax_loss(ad::Var cosines, std::span<const std::size_t> labels,
                        double scale, double margin);

// f(x) = cosine(embed(x), enrollment embedding).
class ModelScorer final : public Scorer {
 public:
  ModelScorer(const AsvModel& model, std::span<const double> enrollment);

  // Skips the enrollment forward pass when the embedding is already known.
  static ModelScorer from_embedding(const AsvModel& model,
                                    std::vector<double> enrollment_embedding);

  double score(std::span<const double> x) const override;
  double score_and_gradient(std::span<const double> x,
                            std::vector<double>& grad) const override;

  const std::vector<double>& enrollment_embedding() const { return enroll_; }

 private:
  ModelScorer(const AsvModel& model, std::vector<double> embedding, bool);

  const AsvModel& model_;
  std::vector<double> enroll_;
};

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainConfig {
  ModelConfig model;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  // Multiply the learning rate by `lr_decay` every `lr_decay_epochs` epochs
  // (1.0 disables).
  double lr_decay = 1.0;
  std::size_t lr_decay_epochs = 2;
  double am_scale = 30.0;
  double am_margin = 0.1;
  double segment_seconds = 2.0;
  std::uint64_t seed = 1;
};

struct LabeledWaveform {
  std::string speaker_id;
  std::vector<double> samples;
};

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;
  std::optional<double> dev_eer;
};

// Called after every epoch with the current model; may return a dev EER.
using EpochCallback =
    std::function<std::optional<double>(const AsvModel&, std::size_t epoch)>;

struct TrainResult {
  AsvModel model;
  std::vector<EpochStats> history;
};

TrainResult train(std::span<const LabeledWaveform> corpus,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

// ---------------------------------------------------------------------------
// Checkpoints (layout in docs/checkpoint.md)
// ---------------------------------------------------------------------------

void save_checkpoint(const AsvModel& model, const std::string& path);
AsvModel load_checkpoint(const std::string& path);

std::vector<std::uint8_t> serialize_checkpoint(const AsvModel& model);
AsvModel deserialize_checkpoint(std::span<const std::uint8_t> bytes);

}  // namespace asvvote

#endif  // ASVVOTE_MODEL_HPP_
