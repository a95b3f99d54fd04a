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

#include "asvvote/model.hpp"

#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "asvvote/corpus.hpp"
#include "asvvote/error.hpp"
#include "test_util.hpp"

namespace asvvote {
namespace {

using asvvote::testing::random_vector;
using asvvote::testing::rel_error;

ModelConfig small_config(PoolingKind pooling = PoolingKind::kMean) {
  ModelConfig c;
  c.hidden_dim = 12;
  c.attention_dim = 6;
  c.embedding_dim = 8;
  c.pooling = pooling;
  return c;
}

const PoolingKind kAllPoolings[] = {PoolingKind::kMean, PoolingKind::kSap, PoolingKind::kAsp};

double norm(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

TEST(Embed, UnitNormAndDeterministic) {
  for (PoolingKind p : kAllPoolings) {
    const AsvModel m(small_config(p), 3, 7);
    const auto x = random_vector(1600, 1, -0.5, 0.5);
    const auto e = embed(m, x);
    EXPECT_EQ(e.size(), 8u);
    EXPECT_NEAR(norm(e), 1.0, 1e-9) << pooling_name(p);
    EXPECT_EQ(e, embed(m, x));
  }
}

TEST(Embed, TooShortWaveformFails) {
  const AsvModel m(small_config(), 3, 7);
  EXPECT_THROW(embed(m, std::vector<double>(100, 0.1)), Error);
}

TEST(Embed, ProjectedGradientMatchesFiniteDifferences) {
  for (PoolingKind p : kAllPoolings) {
    SCOPED_TRACE(std::string(pooling_name(p)));
    const AsvModel m(small_config(p), 3, 9);
    const auto x = random_vector(1200, 2, -0.5, 0.5);
    const auto w = random_vector(8, 3);
    ad::Tape tape;
    BoundParameters params(m, tape, false);
    ad::Var xv = tape.leaf(ad::Tensor::vector(x));
    ad::Var e = embed(m, params, xv);
    ad::Var y = ad::sum(ad::mul(e, tape.constant(ad::Tensor::matrix(1, 8, w))));
    const ad::Tensor g = tape.backward(y).wrt(xv);
    const std::vector<std::size_t> coords{3, 150, 401, 777, 1100, 1199};
    const auto fd = ad::finite_diff_gradient(
        [&](std::span<const double> p2) {
          const auto e2 = embed(m, p2);
          return std::inner_product(e2.begin(), e2.end(), w.begin(), 0.0);
        },
        x, 1e-6, coords);
    for (std::size_t i : coords) EXPECT_LT(rel_error(g[i], fd[i]), 1e-4) << i;
  }
}

TEST(Score, SelfSimilarityAndSymmetry) {
  const AsvModel m(small_config(PoolingKind::kSap), 3, 11);
  const auto a = random_vector(1000, 4, -0.5, 0.5);
  const auto b = random_vector(1000, 5, -0.5, 0.5);
  EXPECT_NEAR(score(m, a, a), 1.0, 1e-9);
  EXPECT_LT(std::abs(score(m, a, b) - score(m, b, a)), 1e-12);
  const double s = score(m, a, b);
  EXPECT_GE(s, -1.0);
  EXPECT_LE(s, 1.0);
}

TEST(Score, CosineOnStubEmbeddings) {
  EXPECT_DOUBLE_EQ(cosine(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_NEAR(cosine(std::vector<double>{1, 0}, std::vector<double>{1, 1}), 0.70710678, 1e-8);
}

TEST(ModelScorer, GradientMatchesFiniteDifferences) {
  const AsvModel m(small_config(), 3, 13);
  const auto xe = random_vector(1000, 6, -0.5, 0.5);
  const auto xt = random_vector(1000, 7, -0.5, 0.5);
  const ModelScorer s(m, xe);
  std::vector<double> g;
  const double v = s.score_and_gradient(xt, g);
  EXPECT_NEAR(v, score(m, xt, xe), 1e-12);
  const std::vector<std::size_t> coords{0, 99, 500, 999};
  const auto fd = ad::finite_diff_gradient(
      [&](std::span<const double> p) { return s.score(p); }, xt, 1e-6, coords);
  for (std::size_t i : coords) EXPECT_LT(rel_error(g[i], fd[i]), 1e-4) << i;
  const ModelScorer from_emb = ModelScorer::from_embedding(m, embed(m, xe));
  EXPECT_EQ(from_emb.score(xt), s.score(xt));
  EXPECT_THROW(ModelScorer::from_embedding(m, {1.0, 0.0}), Error);
}

// ---------------------------------------------------------------------------
// Pooling
// ---------------------------------------------------------------------------

ad::Tensor frames_3x2() { return ad::Tensor::matrix(3, 2, {1, 2, 3, 4, 8, -6}); }

TEST(Pooling, SapWithEqualLogitsIsMean) {
  ad::Tape tape;
  ad::Var f = tape.leaf(frames_3x2());
  ad::Var w = tape.leaf(ad::Tensor::matrix(2, 3, random_vector(6, 1)));
  ad::Var b = tape.leaf(ad::Tensor::matrix(1, 3, random_vector(3, 2)));
  ad::Var v = tape.leaf(ad::Tensor::matrix(3, 1, {0, 0, 0}));
  const ad::Tensor out = pool_sap(f, w, b, v).value();
  const ad::Tensor mean_pool = ad::scale(ad::sum(f, 0), 1.0 / 3.0).value();
  ASSERT_EQ(out.size(), 2u);
  EXPECT_NEAR(out[0], mean_pool[0], 1e-14);
  EXPECT_NEAR(out[1], mean_pool[1], 1e-14);
}

TEST(Pooling, SingleFrame) {
  ad::Tape tape;
  ad::Var f = tape.leaf(ad::Tensor::matrix(1, 2, {0.5, -2}));
  ad::Var logits = tape.leaf(ad::Tensor::matrix(1, 1, {0.7}));
  const ad::Tensor sap = attentive_mean(f, logits).value();
  EXPECT_DOUBLE_EQ(sap[0], 0.5);
  EXPECT_DOUBLE_EQ(sap[1], -2.0);
  const double floor = 1e-8;
  const ad::Tensor asp = attentive_stats(f, logits, floor).value();
  ASSERT_EQ(asp.size(), 4u);
  EXPECT_DOUBLE_EQ(asp[0], 0.5);
  EXPECT_DOUBLE_EQ(asp[1], -2.0);
  EXPECT_NEAR(asp[2], std::sqrt(floor), 1e-12);
  EXPECT_NEAR(asp[3], std::sqrt(floor), 1e-12);
}

TEST(Pooling, LogitsZeroAndLn3WeighQuarterThreeQuarters) {
  ad::Tape tape;
  ad::Var f = tape.leaf(ad::Tensor::matrix(2, 2, {4, 8, 0, -4}));
  ad::Var logits = tape.leaf(ad::Tensor::matrix(2, 1, {0.0, std::log(3.0)}));
  const ad::Tensor out = attentive_mean(f, logits).value();
  EXPECT_NEAR(out[0], 0.25 * 4 + 0.75 * 0, 1e-15);
  EXPECT_NEAR(out[1], 0.25 * 8 + 0.75 * -4, 1e-15);
}

TEST(Pooling, AspUniformWeightsOnZeroAndTwo) {
  const double floor = 1e-8;
  ad::Tape tape;
  ad::Var f = tape.leaf(ad::Tensor::matrix(2, 1, {0, 2}));
  ad::Var logits = tape.leaf(ad::Tensor::matrix(2, 1, {0, 0}));
  const ad::Tensor out = attentive_stats(f, logits, floor).value();
  ASSERT_EQ(out.size(), 2u);
  EXPECT_DOUBLE_EQ(out[0], 1.0);
  EXPECT_NEAR(out[1], std::sqrt(1.0 + floor), 1e-15);
}

TEST(Pooling, AspDoublesDimension) {
  ad::Tape tape;
  ad::Var f = tape.leaf(frames_3x2());
  ad::Var w = tape.leaf(ad::Tensor::matrix(2, 3, random_vector(6, 1)));
  ad::Var b = tape.leaf(ad::Tensor::matrix(1, 3, random_vector(3, 2)));
  ad::Var v = tape.leaf(ad::Tensor::matrix(3, 1, random_vector(3, 3)));
  EXPECT_EQ(pool_asp(f, w, b, v).value().size(), 4u);
}

TEST(Pooling, ZeroFramesIsAnError) {
  ad::Tape tape;
  ad::Var f = tape.leaf(ad::Tensor::zeros({0, 2}));
  ad::Var logits = tape.leaf(ad::Tensor::zeros({0, 1}));
  EXPECT_THROW(attentive_mean(f, logits), Error);
  EXPECT_THROW(attentive_stats(f, logits, 1e-8), Error);
}

// ---------------------------------------------------------------------------
// AM-softmax
// ---------------------------------------------------------------------------

double am_loss(std::vector<double> cos, std::size_t label, double s, double m) {
  ad::Tape tape;
  const std::size_t c = cos.size();
  ad::Var v = tape.leaf(ad::Tensor::matrix(1, c, std::move(cos)));
  const std::vector<std::size_t> labels{label};
  return am_softmax_loss(v, labels, s, m).value().item();
}

TEST(AmSoftmax, TwoClassHandValue) {
  EXPECT_NEAR(am_loss({1, -1}, 0, 1.0, 0.0), std::log(1.0 + std::exp(-2.0)), 1e-12);
  EXPECT_NEAR(am_loss({1, -1}, 0, 1.0, 0.0), 0.126928, 1e-6);
}

TEST(AmSoftmax, ZeroMarginIsScaledCrossEntropy) {
  const std::vector<double> cos{0.3, -0.2, 0.8, 0.1};
  const double s = 7.0;
  double z = 0.0;
  for (double c : cos) z += std::exp(s * c);
  EXPECT_NEAR(am_loss(cos, 2, s, 0.0), -std::log(std::exp(s * 0.8) / z), 1e-12);
}

TEST(AmSoftmax, ConfidentCorrectClassIsNearZero) {
  EXPECT_LT(am_loss({-1, 1, -1, -1}, 1, 30.0, 0.1), 1e-10);
}

TEST(AmSoftmax, InvalidInputs) {
  EXPECT_THROW(am_loss({0.1, 0.2}, 2, 30.0, 0.1), Error);
  EXPECT_THROW(am_loss({0.1, 0.2}, 0, 0.0, 0.1), Error);
  EXPECT_THROW(am_loss({0.1, 0.2}, 0, 30.0, 1.0), Error);
}

TEST(AmSoftmaxProperty, DecreasingInTrueClassCosine) {
  double prev = am_loss({-1.0, 0.2, -0.4}, 0, 30.0, 0.1);
  for (int i = 1; i <= 40; ++i) {
    const double c = -1.0 + 2.0 * i / 40.0;
    const double l = am_loss({c, 0.2, -0.4}, 0, 30.0, 0.1);
    EXPECT_LT(l, prev) << c;
    prev = l;
  }
}

TEST(AmSoftmaxProperty, GradientMatchesFiniteDifferences) {
  const std::vector<double> cos = random_vector(6, 8);
  const std::vector<std::size_t> labels{1, 2};
  ad::Tape tape;
  ad::Var v = tape.leaf(ad::Tensor::matrix(2, 3, cos));
  const ad::Tensor g = tape.backward(am_softmax_loss(v, labels, 30.0, 0.1)).wrt(v);
  const auto fd = ad::finite_diff_gradient(
      [&](std::span<const double> p) {
        ad::Tape t;
        ad::Var pv = t.leaf(ad::Tensor::matrix(2, 3, {p.begin(), p.end()}));
        return am_softmax_loss(pv, labels, 30.0, 0.1).value().item();
      },
      cos, 1e-7);
  for (std::size_t i = 0; i < fd.size(); ++i) EXPECT_LT(rel_error(g[i], fd[i]), 1e-5) << i;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

std::vector<LabeledWaveform> tiny_corpus(std::size_t speakers, std::size_t per_speaker) {
  std::vector<LabeledWaveform> out;
  for (std::size_t s = 0; s < speakers; ++s) {
    const SpeakerProfile p = gen_speaker(100 + s, "s" + std::to_string(s));
    for (std::size_t u = 0; u < per_speaker; ++u) {
      out.push_back({p.speaker_id, synth_utterance(p, 0.5, 1000 * s + u).waveform});
    }
  }
  return out;
}

TrainConfig tiny_train_config() {
  TrainConfig c;
  c.model = small_config();
  c.epochs = 6;
  c.batch_size = 4;
  c.learning_rate = 1e-2;
  c.segment_seconds = 0.3;
  return c;
}

TEST(Train, OneSpeakerIsAnError) {
  EXPECT_THROW(train(tiny_corpus(1, 4), tiny_train_config()), Error);
}

TEST(Train, SameSeedGivesIdenticalParameters) {
  const auto data = tiny_corpus(3, 3);
  const TrainResult a = train(data, tiny_train_config());
  const TrainResult b = train(data, tiny_train_config());
  ASSERT_EQ(a.model.parameters().size(), b.model.parameters().size());
  for (std::size_t i = 0; i < a.model.parameters().size(); ++i) {
    EXPECT_EQ(a.model.parameters()[i].second.values(), b.model.parameters()[i].second.values());
  }
}

TEST(Train, LossDecreasesAndCallbackRuns) {
  std::size_t calls = 0;
  const TrainResult r = train(tiny_corpus(3, 4), tiny_train_config(),
                              [&](const AsvModel&, std::size_t) -> std::optional<double> {
                                ++calls;
                                return 0.5;
                              });
  ASSERT_EQ(r.history.size(), 6u);
  EXPECT_EQ(calls, 6u);
  EXPECT_LT(r.history.back().loss, r.history.front().loss);
  EXPECT_EQ(r.history.back().dev_eer, 0.5);
}

TEST(AsvModelProperty, ParametersFinite) {
  const AsvModel m(small_config(PoolingKind::kAsp), 4, 3);
  for (const auto& [name, t] : m.parameters()) {
    for (double v : t.values()) EXPECT_TRUE(std::isfinite(v)) << name;
  }
  EXPECT_EQ(m.n_classes(), 4u);
}

}  // namespace
}  // namespace asvvote
