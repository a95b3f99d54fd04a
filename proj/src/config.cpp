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

#include "asvvote/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "asvvote/error.hpp"

namespace asvvote {

namespace {

// One mapping in the file.  Reads typed values and rejects keys nobody
// asked for when finished.
class Section {
 public:
  Section(YAML::Node node, std::string path, const std::string& origin)
      : node_(std::move(node)), path_(std::move(path)), origin_(origin) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) fail(path_, "expected a mapping");
  }

  Section child(const std::string& key) {
    known_.insert(key);
    return Section(lookup(key), qualified(key), origin_);
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    known_.insert(key);
    const YAML::Node v = lookup(key);
    if (!v || v.IsNull()) return;
    out = convert<T>(v, qualified(key));
  }

  template <typename T>
  void read(const std::string& key, std::optional<T>& out) {
    known_.insert(key);
    const YAML::Node v = lookup(key);
    if (!v) return;
    if (v.IsNull()) {
      out.reset();
      return;
    }
    out = convert<T>(v, qualified(key));
  }

  template <typename T, typename Parse>
  void read_list(const std::string& key, std::vector<T>& out, Parse parse) {
    known_.insert(key);
    const YAML::Node v = lookup(key);
    if (!v || v.IsNull()) return;
    if (!v.IsSequence()) fail(qualified(key), "expected a list");
    std::vector<T> items;
    for (std::size_t i = 0; i < v.size(); ++i) {
      items.push_back(parse(v[i], qualified(key) + "[" + std::to_string(i) + "]"));
    }
    out = std::move(items);
  }

  template <typename T>
  void read_list(const std::string& key, std::vector<T>& out) {
    read_list(key, out, [this](const YAML::Node& n, const std::string& where) {
      return convert<T>(n, where);
    });
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!known_.count(key)) fail(qualified(key), "unknown key");
    }
  }

  [[noreturn]] void fail(const std::string& where, const std::string& what) const {
    throw Error(origin_ + ": " + where + ": " + what);
  }

  template <typename T>
  T convert(const YAML::Node& n, const std::string& where) const {
    if (!n.IsScalar()) fail(where, "expected a scalar");
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        // yaml-cpp wraps negative numbers into huge unsigned values.
        if (!n.Scalar().empty() && n.Scalar()[0] == '-') fail(where, "must be >= 0");
      }
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(where, "invalid value '" + n.Scalar() + "'");
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  const std::string& origin_;
  std::set<std::string> known_;

  YAML::Node lookup(const std::string& key) const {
    if (!node_ || !node_.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
    return node_[key];
  }

  std::string qualified(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
};

template <typename Enum, typename Parse>
auto enum_parser(const Section& s, Parse parse) {
  return [&s, parse](const YAML::Node& n, const std::string& where) -> Enum {
    const std::string name = s.convert<std::string>(n, where);
    try {
      return parse(name);
    } catch (const Error& e) {
      s.fail(where, e.what());
    }
  };
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const ExperimentConfig& base,
                              const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw Error(origin + ": " + e.what());
  }
  ExperimentConfig c = base;
  Section top(root, "", origin);
  top.read("seed", c.seed);
  top.read("out", c.out_dir);
  top.read("corpus_dir", c.corpus_dir);
  top.read("checkpoint", c.checkpoint);
  top.read("threads", c.threads);
  top.read("timing", c.timing);

  Section corpus = top.child("corpus");
  corpus.read("n_speakers", c.corpus.n_speakers);
  corpus.read("utterances_per_speaker", c.corpus.utterances_per_speaker);
  corpus.read("duration_seconds", c.corpus.duration_seconds);
  corpus.read("sample_rate", c.corpus.sample_rate);
  corpus.read("n_target_trials", c.corpus.n_target_trials);
  corpus.read("n_nontarget_trials", c.corpus.n_nontarget_trials);
  corpus.read("dev_fraction", c.corpus.dev_fraction);
  corpus.finish();

  Section features = top.child("features");
  FeatureConfig& f = c.train.model.features;
  features.read("win_length", f.win_length);
  features.read("hop_length", f.hop_length);
  features.read("n_fft", f.n_fft);
  features.read("n_mels", f.n_mels);
  features.read("log_floor", f.log_floor);
  features.finish();

  Section model = top.child("model");
  ModelConfig& m = c.train.model;
  model.read("hidden_dim", m.hidden_dim);
  model.read("attention_dim", m.attention_dim);
  model.read("embedding_dim", m.embedding_dim);
  std::string pooling(pooling_name(m.pooling));
  model.read("pooling", pooling);
  try {
    m.pooling = parse_pooling(pooling);
  } catch (const Error& e) {
    model.fail("model.pooling", e.what());
  }
  model.read("asp_floor", m.asp_floor);
  model.finish();

  Section train = top.child("train");
  train.read("epochs", c.train.epochs);
  train.read("batch_size", c.train.batch_size);
  train.read("learning_rate", c.train.learning_rate);
  train.read("lr_decay", c.train.lr_decay);
  train.read("lr_decay_epochs", c.train.lr_decay_epochs);
  train.read("am_scale", c.train.am_scale);
  train.read("am_margin", c.train.am_margin);
  train.read("segment_seconds", c.train.segment_seconds);
  train.finish();

  Section attack = top.child("attack");
  attack.read_list("kinds", c.attack_kinds,
                   enum_parser<AttackKind>(attack, parse_attack_kind));
  attack.read_list("epsilons", c.epsilons);
  attack.read("n_iters", c.n_iters);
  attack.read("step_alpha", c.step_alpha);
  attack.read("export_adversarial", c.export_adversarial);
  attack.finish();

  Section defense = top.child("defense");
  defense.read_list("kinds", c.defense_kinds,
                    enum_parser<DefenseKind>(defense, parse_defense_kind));
  defense.read_list("sigmas", c.sigmas);
  defense.read("k_votes", c.k_votes);
  defense.read("kernel_size", c.kernel_size);
  defense.read("gaussian_std", c.gaussian_std);
  defense.finish();

  Section votes = top.child("sweep_votes");
  votes.read("epsilon", c.sweep_votes.epsilon);
  votes.read("sigma", c.sweep_votes.sigma);
  votes.read_list("k_values", c.sweep_votes.k_values);
  votes.finish();

  Section iters = top.child("sweep_iters");
  iters.read("epsilon", c.sweep_iters.epsilon);
  iters.read("sigma", c.sweep_iters.sigma);
  iters.read("k_votes", c.sweep_iters.k_votes);
  iters.read_list("n_values", c.sweep_iters.n_values);
  iters.read("step_alpha", c.sweep_iters.step_alpha);
  iters.finish();

  top.finish();
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(origin + ": " + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path, const ExperimentConfig& base) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << f.rdbuf();
  return parse_config(text.str(), base, path);
}

std::string format_config(const ExperimentConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  auto names = [](const auto& kinds, auto name) {
    std::vector<std::string> out;
    for (auto k : kinds) out.emplace_back(name(k));
    return out;
  };
  const FeatureConfig& f = c.train.model.features;
  const ModelConfig& m = c.train.model;
  e << YAML::BeginMap;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::Key << "out" << YAML::Value << c.out_dir;
  e << YAML::Key << "corpus_dir" << YAML::Value << c.corpus_dir;
  e << YAML::Key << "checkpoint" << YAML::Value << c.checkpoint;
  e << YAML::Key << "threads" << YAML::Value << c.threads;
  e << YAML::Key << "timing" << YAML::Value << c.timing;

  e << YAML::Key << "corpus" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "n_speakers" << YAML::Value << c.corpus.n_speakers;
  e << YAML::Key << "utterances_per_speaker" << YAML::Value << c.corpus.utterances_per_speaker;
  e << YAML::Key << "duration_seconds" << YAML::Value << c.corpus.duration_seconds;
  e << YAML::Key << "sample_rate" << YAML::Value << c.corpus.sample_rate;
  e << YAML::Key << "n_target_trials" << YAML::Value << c.corpus.n_target_trials;
  e << YAML::Key << "n_nontarget_trials" << YAML::Value << c.corpus.n_nontarget_trials;
  e << YAML::Key << "dev_fraction" << YAML::Value << c.corpus.dev_fraction;
  e << YAML::EndMap;

  e << YAML::Key << "features" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "win_length" << YAML::Value << f.win_length;
  e << YAML::Key << "hop_length" << YAML::Value << f.hop_length;
  e << YAML::Key << "n_fft" << YAML::Value << f.n_fft;
  e << YAML::Key << "n_mels" << YAML::Value << f.n_mels;
  e << YAML::Key << "log_floor" << YAML::Value << f.log_floor;
  e << YAML::EndMap;

  e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "hidden_dim" << YAML::Value << m.hidden_dim;
  e << YAML::Key << "attention_dim" << YAML::Value << m.attention_dim;
  e << YAML::Key << "embedding_dim" << YAML::Value << m.embedding_dim;
  e << YAML::Key << "pooling" << YAML::Value << std::string(pooling_name(m.pooling));
  e << YAML::Key << "asp_floor" << YAML::Value << m.asp_floor;
  e << YAML::EndMap;

  e << YAML::Key << "train" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "epochs" << YAML::Value << c.train.epochs;
  e << YAML::Key << "batch_size" << YAML::Value << c.train.batch_size;
  e << YAML::Key << "learning_rate" << YAML::Value << c.train.learning_rate;
  e << YAML::Key << "lr_decay" << YAML::Value << c.train.lr_decay;
  e << YAML::Key << "lr_decay_epochs" << YAML::Value << c.train.lr_decay_epochs;
  e << YAML::Key << "am_scale" << YAML::Value << c.train.am_scale;
  e << YAML::Key << "am_margin" << YAML::Value << c.train.am_margin;
  e << YAML::Key << "segment_seconds" << YAML::Value << c.train.segment_seconds;
  e << YAML::EndMap;

  e << YAML::Key << "attack" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kinds" << YAML::Value << YAML::Flow
    << names(c.attack_kinds, attack_kind_name);
  e << YAML::Key << "epsilons" << YAML::Value << YAML::Flow << c.epsilons;
  e << YAML::Key << "n_iters" << YAML::Value << c.n_iters;
  e << YAML::Key << "step_alpha" << YAML::Value;
  if (c.step_alpha) e << *c.step_alpha; else e << YAML::Null;
  e << YAML::Key << "export_adversarial" << YAML::Value << c.export_adversarial;
  e << YAML::EndMap;

  e << YAML::Key << "defense" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "kinds" << YAML::Value << YAML::Flow
    << names(c.defense_kinds, defense_kind_name);
  e << YAML::Key << "sigmas" << YAML::Value << YAML::Flow << c.sigmas;
  e << YAML::Key << "k_votes" << YAML::Value << c.k_votes;
  e << YAML::Key << "kernel_size" << YAML::Value << c.kernel_size;
  e << YAML::Key << "gaussian_std" << YAML::Value << c.gaussian_std;
  e << YAML::EndMap;

  e << YAML::Key << "sweep_votes" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "epsilon" << YAML::Value << c.sweep_votes.epsilon;
  e << YAML::Key << "sigma" << YAML::Value << c.sweep_votes.sigma;
  e << YAML::Key << "k_values" << YAML::Value << YAML::Flow << c.sweep_votes.k_values;
  e << YAML::EndMap;

  e << YAML::Key << "sweep_iters" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "epsilon" << YAML::Value << c.sweep_iters.epsilon;
  e << YAML::Key << "sigma" << YAML::Value << c.sweep_iters.sigma;
  e << YAML::Key << "k_votes" << YAML::Value << c.sweep_iters.k_votes;
  e << YAML::Key << "n_values" << YAML::Value << YAML::Flow << c.sweep_iters.n_values;
  e << YAML::Key << "step_alpha" << YAML::Value;
  if (c.sweep_iters.step_alpha) e << *c.sweep_iters.step_alpha; else e << YAML::Null;
  e << YAML::EndMap;

  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace asvvote
