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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "asvvote/error.hpp"

namespace asvvote {

namespace {

ad::Tensor xavier(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  ad::Tensor t = ad::Tensor::zeros({fan_in, fan_out});
  for (double& v : t.data()) v = dist(rng);
  return t;
}

std::size_t pooled_dim(const ModelConfig& c) {
  return c.pooling == PoolingKind::kAsp ? 2 * c.hidden_dim : c.hidden_dim;
}

bool uses_attention(PoolingKind kind) { return kind != PoolingKind::kMean; }

// Expected parameter shapes, in storage order (classifier excluded).
std::vector<std::pair<std::string, ad::Shape>> expected_shapes(const ModelConfig& c) {
  const std::size_t h = c.hidden_dim;
  std::vector<std::pair<std::string, ad::Shape>> s = {
      {"input_norm", {2}},
      {"w1", {c.features.n_mels, h}},
      {"b1", {1, h}},
      {"w2", {h, h}},
      {"b2", {1, h}},
  };
  if (uses_attention(c.pooling)) {
    s.push_back({"att_w", {h, c.attention_dim}});
    s.push_back({"att_b", {1, c.attention_dim}});
    s.push_back({"att_v", {c.attention_dim, 1}});
  }
  s.push_back({"proj_w", {pooled_dim(c), c.embedding_dim}});
  s.push_back({"proj_b", {1, c.embedding_dim}});
  return s;
}

}  // namespace

std::string_view pooling_name(PoolingKind kind) {
  switch (kind) {
    case PoolingKind::kMean:
      return "mean";
    case PoolingKind::kSap:
      return "sap";
    case PoolingKind::kAsp:
      return "asp";
  }
  return "unknown";
}

PoolingKind parse_pooling(std::string_view name) {
  if (name == "mean") return PoolingKind::kMean;
  if (name == "sap" || name == "SAP") return PoolingKind::kSap;
  if (name == "asp" || name == "ASP") return PoolingKind::kAsp;
  throw Error("unknown pooling kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// AsvModel
// ---------------------------------------------------------------------------

AsvModel::AsvModel(const ModelConfig& config, std::size_t n_classes,
                   std::uint64_t seed)
    : config_(config), extractor_(config.features) {
  if (n_classes < 2) throw Error("AsvModel: need at least 2 classes");
  std::mt19937_64 rng(seed);
  for (const auto& [name, shape] : expected_shapes(config_)) {
    if (name == "input_norm") {
      params_.emplace_back(name, ad::Tensor::vector({0.0, 1.0}));
    } else if (name.front() == 'b' || name == "att_b" || name == "proj_b") {
      params_.emplace_back(name, ad::Tensor::zeros(shape));
    } else {
      params_.emplace_back(name, xavier(shape[0], shape[1], rng));
    }
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  ad::Tensor cls = ad::Tensor::zeros({n_classes, config_.embedding_dim});
  for (double& v : cls.data()) v = normal(rng);
  params_.emplace_back("classifier", std::move(cls));
  check_parameters();
}

AsvModel::AsvModel(const ModelConfig& config, ParameterList params)
    : config_(config), extractor_(config.features), params_(std::move(params)) {
  check_parameters();
}

void AsvModel::check_parameters() const {
  for (const auto& [name, shape] : expected_shapes(config_)) {
    const ad::Tensor& t = parameter(name);
    if (t.shape() != shape) {
      throw Error("AsvModel: parameter '" + name + "' has shape " +
                  ad::shape_to_string(t.shape()) + ", expected " +
                  ad::shape_to_string(shape));
    }
  }
  const ad::Tensor& cls = parameter("classifier");
  if (cls.rank() != 2 || cls.cols() != config_.embedding_dim || cls.rows() < 2) {
    throw Error("AsvModel: classifier has shape " + ad::shape_to_string(cls.shape()));
  }
  for (const auto& [name, t] : params_) {
    for (double v : t.data()) {
      if (!std::isfinite(v)) throw Error("AsvModel: parameter '" + name + "' is not finite");
    }
  }
}

std::size_t AsvModel::n_classes() const { return parameter("classifier").rows(); }

const ad::Tensor& AsvModel::parameter(std::string_view name) const {
  for (const auto& [n, t] : params_) {
    if (n == name) return t;
  }
  throw Error("AsvModel: no parameter named '" + std::string(name) + "'");
}

ad::Tensor& AsvModel::parameter(std::string_view name) {
  return const_cast<ad::Tensor&>(std::as_const(*this).parameter(name));
}

void AsvModel::set_input_normalization(double shift, double scale) {
  if (!std::isfinite(shift) || !(scale > 0.0) || !std::isfinite(scale)) {
    throw Error("AsvModel: invalid input normalization");
  }
  ad::Tensor& t = parameter("input_norm");
  t[0] = shift;
  t[1] = scale;
}

BoundParameters::BoundParameters(const AsvModel& model, ad::Tape& tape,
                                 bool trainable) {
  for (const auto& [name, t] : model.parameters()) {
    vars_.emplace(name, trainable ? tape.leaf(t) : tape.constant(t));
  }
}

ad::Var BoundParameters::operator[](std::string_view name) const {
  auto it = vars_.find(name);
  if (it == vars_.end()) {
    throw Error("BoundParameters: no parameter named '" + std::string(name) + "'");
  }
  return it->second;
}

// ---------------------------------------------------------------------------
// Pooling
// ---------------------------------------------------------------------------

namespace {

void require_frames(const char* op, ad::Var frames) {
  if (frames.value().rank() != 2 || frames.value().rows() == 0) {
    throw Error(std::string(op) + ": need at least one frame, got shape " +
                ad::shape_to_string(frames.shape()));
  }
}

}  // namespace

ad::Var attentive_mean(ad::Var frames, ad::Var logits) {
  require_frames("attentive_mean", frames);
  ad::Var w = ad::softmax(logits, 0);
  return ad::matmul(ad::transpose(w), frames);
}

ad::Var attentive_stats(ad::Var frames, ad::Var logits, double floor) {
  require_frames("attentive_stats", frames);
  ad::Var wt = ad::transpose(ad::softmax(logits, 0));
  ad::Var mu = ad::matmul(wt, frames);
  ad::Var second = ad::matmul(wt, ad::square(frames));
  ad::Var var = ad::add_scalar(ad::sub(second, ad::square(mu)), floor);
  ad::Var sd = ad::sqrt(var);
  const ad::Var parts[] = {mu, sd};
  return ad::concat(parts, 1);
}

ad::Var attention_logits(ad::Var frames, ad::Var w, ad::Var b, ad::Var v) {
  require_frames("attention", frames);
  return ad::matmul(ad::tanh(ad::add(ad::matmul(frames, w), b)), v);
}

ad::Var pool_sap(ad::Var frames, ad::Var w, ad::Var b, ad::Var v) {
  return attentive_mean(frames, attention_logits(frames, w, b, v));
}

ad::Var pool_asp(ad::Var frames, ad::Var w, ad::Var b, ad::Var v, double floor) {
  return attentive_stats(frames, attention_logits(frames, w, b, v), floor);
}

// ---------------------------------------------------------------------------
// Embedding and scoring
// ---------------------------------------------------------------------------

ad::Var embed(const AsvModel& model, const BoundParameters& p, ad::Var waveform) {
  const ModelConfig& c = model.config();
  const ad::Tensor& norm = model.parameter("input_norm");
  ad::Var feats = model.extractor().extract(waveform);
  ad::Var x = ad::scale(ad::add_scalar(feats, -norm[0]), norm[1]);
  ad::Var h = ad::tanh(ad::add(ad::matmul(x, p["w1"]), p["b1"]));
  h = ad::tanh(ad::add(ad::matmul(h, p["w2"]), p["b2"]));
  ad::Var pooled;
  switch (c.pooling) {
    case PoolingKind::kMean:
      pooled = ad::scale(ad::sum(h, 0), 1.0 / static_cast<double>(h.value().rows()));
      break;
    case PoolingKind::kSap:
      pooled = pool_sap(h, p["att_w"], p["att_b"], p["att_v"]);
      break;
    case PoolingKind::kAsp:
      pooled = pool_asp(h, p["att_w"], p["att_b"], p["att_v"], c.asp_floor);
      break;
  }
  ad::Var e = ad::add(ad::matmul(pooled, p["proj_w"]), p["proj_b"]);
  return ad::l2_normalize(e);
}

std::vector<double> embed(const AsvModel& model, std::span<const double> waveform) {
  ad::Tape tape;
  BoundParameters p(model, tape, false);
  ad::Var x = tape.constant(
      ad::Tensor::vector(std::vector<double>(waveform.begin(), waveform.end())));
  return embed(model, p, x).value().values();
}

double cosine(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error("cosine: dimension mismatch " + std::to_string(a.size()) + " vs " +
                std::to_string(b.size()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(na) * std::sqrt(nb);
  if (!(denom > 0.0)) throw Error("cosine: zero vector");
  return std::clamp(dot / denom, -1.0, 1.0);
}

double score(const AsvModel& model, std::span<const double> x_t,
             std::span<const double> x_e) {
  return cosine(embed(model, x_t), embed(model, x_e));
}

ModelScorer::ModelScorer(const AsvModel& model, std::span<const double> enrollment)
    : model_(model), enroll_(embed(model, enrollment)) {}

ModelScorer::ModelScorer(const AsvModel& model, std::vector<double> embedding, bool)
    : model_(model), enroll_(std::move(embedding)) {
  if (enroll_.size() != model.config().embedding_dim) {
    throw Error("ModelScorer: enrollment embedding has wrong dimension");
  }
}

ModelScorer ModelScorer::from_embedding(const AsvModel& model,
                                        std::vector<double> enrollment_embedding) {
  return ModelScorer(model, std::move(enrollment_embedding), true);
}

double ModelScorer::score(std::span<const double> x) const {
  return cosine(embed(model_, x), enroll_);
}

double ModelScorer::score_and_gradient(std::span<const double> x,
                                       std::vector<double>& grad) const {
  ad::Tape tape;
  BoundParameters p(model_, tape, false);
  ad::Var xv = tape.leaf(ad::Tensor::vector(std::vector<double>(x.begin(), x.end())));
  ad::Var e = embed(model_, p, xv);
  ad::Var s = ad::sum(ad::mul(e, tape.constant(ad::Tensor::matrix(1, enroll_.size(), enroll_))));
  ad::Gradients g = tape.backward(s);
  grad = g.wrt(xv).values();
  return s.value().item();
}

double LinearScorer::score(std::span<const double> x) const {
  if (x.size() != weights_.size()) throw Error("LinearScorer: dimension mismatch");
  double s = bias_;
  for (std::size_t i = 0; i < x.size(); ++i) s += weights_[i] * x[i];
  return s;
}

double LinearScorer::score_and_gradient(std::span<const double> x,
                                        std::vector<double>& grad) const {
  grad = weights_;
  return score(x);
}

// ---------------------------------------------------------------------------
// AM-softmax
// ---------------------------------------------------------------------------

ad::Var am_softmax_loss(ad::Var cosines, std::span<const std::size_t> labels,
                        double scale, double margin) {
  const ad::Tensor& cv = cosines.value();
  if (cv.rank() != 2) {
    throw Error("am_softmax_loss: cosines must be [batch, classes], got " +
                ad::shape_to_string(cv.shape()));
  }
  const std::size_t batch = cv.rows();
  const std::size_t classes = cv.cols();
  if (labels.size() != batch) throw Error("am_softmax_loss: label count mismatch");
  if (!(scale > 0.0)) throw Error("am_softmax_loss: scale must be > 0");
  if (!(margin >= 0.0 && margin < 1.0)) {
    throw Error("am_softmax_loss: margin must be in [0, 1)");
  }
  ad::Tensor onehot = ad::Tensor::zeros({batch, classes});
  for (std::size_t b = 0; b < batch; ++b) {
    if (labels[b] >= classes) {
      throw Error("am_softmax_loss: class index " + std::to_string(labels[b]) +
                  " out of range for " + std::to_string(classes) + " classes");
    }
    onehot[b * classes + labels[b]] = 1.0;
  }
  ad::Tape& tape = cosines.tape();
  ad::Var hot = tape.constant(onehot);
  // z = s (cos - m onehot)
  ad::Var z = ad::scale(ad::sub(cosines, ad::scale(hot, margin)), scale);
  const ad::Tensor& zv = z.value();
  ad::Tensor peak = ad::Tensor::zeros({batch, 1});
  for (std::size_t b = 0; b < batch; ++b) {
    double m = zv[b * classes];
    for (std::size_t c = 1; c < classes; ++c) m = std::max(m, zv[b * classes + c]);
    peak[b] = m;
  }
  ad::Var shift = tape.constant(peak);
  ad::Var lse = ad::add(ad::log(ad::sum(ad::exp(ad::sub(z, shift)), 1)), shift);
  ad::Var picked = ad::sum(ad::mul(z, hot), 1);
  return ad::mean(ad::sub(lse, picked));
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t step = 0;
};

}  // namespace

TrainResult train(std::span<const LabeledWaveform> corpus, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  std::set<std::string> speakers;
  for (const auto& u : corpus) speakers.insert(u.speaker_id);
  if (speakers.size() < 2) {
    throw Error("train: corpus needs at least 2 speakers, got " +
                std::to_string(speakers.size()));
  }
  std::map<std::string, std::size_t> label_of;
  std::map<std::string, std::size_t> count_of;
  for (const auto& s : speakers) label_of.emplace(s, label_of.size());
  for (const auto& u : corpus) ++count_of[u.speaker_id];
  for (const auto& [s, n] : count_of) {
    if (n < 2) throw Error("train: speaker '" + s + "' has fewer than 2 utterances");
  }
  if (config.batch_size == 0 || config.epochs == 0) {
    throw Error("train: batch_size and epochs must be >= 1");
  }
  if (!(config.learning_rate > 0.0)) throw Error("train: learning_rate must be > 0");

  std::mt19937_64 rng(config.seed);
  AsvModel model(config.model, speakers.size(), rng());

  const auto segment = static_cast<std::size_t>(
      std::lround(config.segment_seconds * config.model.features.sample_rate));
  const std::size_t min_len = config.model.features.win_length;
  for (const auto& u : corpus) {
    if (u.samples.size() < min_len) {
      throw Error("train: utterance of speaker '" + u.speaker_id + "' is too short");
    }
  }

  // Global feature statistics fix the input affine.
  {
    double total = 0.0;
    double total_sq = 0.0;
    std::size_t n = 0;
    for (const auto& u : corpus) {
      const ad::Tensor f = model.extractor().extract(u.samples);
      for (double v : f.data()) {
        total += v;
        total_sq += v * v;
        ++n;
      }
    }
    const double mean = total / static_cast<double>(n);
    const double var = std::max(total_sq / static_cast<double>(n) - mean * mean, 1e-12);
    model.set_input_normalization(mean, 1.0 / std::sqrt(var));
  }

  ParameterList& params = model.parameters();
  AdamState adam;
  for (const auto& [name, t] : params) {
    adam.m.emplace_back(t.size(), 0.0);
    adam.v.emplace_back(t.size(), 0.0);
  }
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  TrainResult result{model, {}};
  double lr = config.learning_rate;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      ad::Tape tape;
      BoundParameters p(model, tape, true);
      std::vector<ad::Var> rows;
      std::vector<std::size_t> labels;
      for (std::size_t i = start; i < end; ++i) {
        const LabeledWaveform& u = corpus[order[i]];
        std::size_t offset = 0;
        std::size_t len = u.samples.size();
        if (len > segment) {
          std::uniform_int_distribution<std::size_t> pick(0, len - segment);
          offset = pick(rng);
          len = segment;
        }
        std::vector<double> crop(u.samples.begin() + static_cast<std::ptrdiff_t>(offset),
                                 u.samples.begin() + static_cast<std::ptrdiff_t>(offset + len));
        ad::Var x = tape.constant(ad::Tensor::vector(std::move(crop)));
        rows.push_back(embed(model, p, x));
        labels.push_back(label_of.at(u.speaker_id));
      }
      ad::Var emb = ad::concat(rows, 0);
      ad::Var weights = ad::l2_normalize(p["classifier"]);
      ad::Var cos = ad::matmul(emb, ad::transpose(weights));
      ad::Var loss = am_softmax_loss(cos, labels, config.am_scale, config.am_margin);
      ad::Gradients g = tape.backward(loss);
      loss_sum += loss.value().item();
      ++batches;

      ++adam.step;
      const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam.step));
      const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam.step));
      for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k].first == "input_norm") continue;
        const ad::Tensor grad = g.wrt(p[params[k].first]);
        std::vector<double>& m = adam.m[k];
        std::vector<double>& v = adam.v[k];
        ad::Tensor& w = params[k].second;
        for (std::size_t i = 0; i < w.size(); ++i) {
          m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * grad[i];
          v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
          w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + kEps);
        }
      }
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = loss_sum / static_cast<double>(batches);
    if (on_epoch) stats.dev_eer = on_epoch(model, epoch);
    result.history.push_back(stats);
    if (config.lr_decay != 1.0 && config.lr_decay_epochs > 0 &&
        epoch % config.lr_decay_epochs == 0) {
      lr *= config.lr_decay;
    }
  }
  result.model = model;
  return result;
}

}  // namespace asvvote
