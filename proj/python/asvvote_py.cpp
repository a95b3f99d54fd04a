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

// Python bindings: configuration, the subcommands and the scoring,
// attack and defense primitives.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "asvvote/attack.hpp"
#include "asvvote/config.hpp"
#include "asvvote/defense.hpp"
#include "asvvote/error.hpp"
#include "asvvote/experiment.hpp"
#include "asvvote/features.hpp"
#include "asvvote/metrics.hpp"
#include "asvvote/model.hpp"
#include "asvvote/rng.hpp"
#include "asvvote/wav.hpp"

namespace py = pybind11;
using namespace asvvote;

namespace {

py::dict row_dict(const ReportRow& r) {
  py::dict d;
  d["attack_kind"] = std::string(attack_kind_name(r.attack.kind));
  d["epsilon"] = r.attack.epsilon;
  d["n_iters"] = r.attack.n_iters;
  d["defense_kind"] = std::string(defense_kind_name(r.defense.kind));
  d["sigma"] = r.defense.kind == DefenseKind::kVoting ? py::cast(r.defense.sigma) : py::none();
  d["k_votes"] = r.defense.kind == DefenseKind::kVoting ? py::cast(r.defense.k_votes) : py::none();
  d["far"] = r.far;
  d["frr"] = r.frr;
  d["n_trials"] = r.n_trials;
  d["wall_time"] = r.wall_time;
  d["budget"] = r.budget ? py::cast(*r.budget) : py::none();
  return d;
}

py::list rows_list(const std::vector<ReportRow>& rows) {
  py::list out;
  for (const ReportRow& r : rows) out.append(row_dict(r));
  return out;
}

FilterSpec filter_spec(const std::string& kind, std::size_t kernel_size, double gaussian_std) {
  return {parse_filter(kind), kernel_size, gaussian_std};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Adversarial-robustness testbed for speaker verification";
  tune_allocator();
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  m.attr("PCM_SCALE") = kPcmScale;

  py::class_<ExperimentConfig>(m, "Config")
      .def(py::init<>())
      .def_static(
          "parse",
          [](const std::string& text) { return parse_config(text); }, py::arg("text"))
      .def_static(
          "load", [](const std::string& path) { return load_config(path); }, py::arg("path"))
      .def("to_yaml", [](const ExperimentConfig& c) { return format_config(c); })
      .def("validate", &ExperimentConfig::validate)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("out_dir", &ExperimentConfig::out_dir)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def_readwrite("timing", &ExperimentConfig::timing)
      .def_property_readonly("corpus_path", &ExperimentConfig::corpus_path)
      .def_property_readonly("checkpoint_path", &ExperimentConfig::checkpoint_path);

  m.def("gen_corpus", &cmd_gen_corpus, py::arg("config"),
        py::call_guard<py::gil_scoped_release>(), "Writes the corpus; returns its hash.");
  m.def(
      "train",
      [](const ExperimentConfig& c) {
        TrainResult r = [&] {
          py::gil_scoped_release release;
          return cmd_train(c);
        }();
        py::list history;
        for (const EpochStats& e : r.history) history.append(py::make_tuple(e.epoch, e.loss));
        return history;
      },
      py::arg("config"), "Trains and writes the checkpoint; returns [(epoch, loss)].");
  m.def(
      "evaluate",
      [](const ExperimentConfig& c) {
        std::vector<ReportRow> rows;
        {
          py::gil_scoped_release release;
          rows = cmd_evaluate(c);
        }
        return rows_list(rows);
      },
      py::arg("config"));
  m.def(
      "sweep_votes",
      [](const ExperimentConfig& c) {
        std::vector<ReportRow> rows;
        {
          py::gil_scoped_release release;
          rows = cmd_sweep_votes(c);
        }
        return rows_list(rows);
      },
      py::arg("config"));
  m.def(
      "sweep_iters",
      [](const ExperimentConfig& c) {
        std::vector<ReportRow> rows;
        {
          py::gil_scoped_release release;
          rows = cmd_sweep_iters(c);
        }
        return rows_list(rows);
      },
      py::arg("config"));

  py::class_<AsvModel>(m, "Model")
      .def_static(
          "load", [](const std::string& path) { return load_checkpoint(path); }, py::arg("path"))
      .def("save", [](const AsvModel& model, const std::string& path) { save_checkpoint(model, path); })
      .def("embed", [](const AsvModel& model, const std::vector<double>& x) { return embed(model, x); })
      .def(
          "score",
          [](const AsvModel& model, const std::vector<double>& x_t, const std::vector<double>& x_e) {
            return score(model, x_t, x_e);
          },
          py::arg("x_t"), py::arg("x_e"))
      .def(
          "score_and_gradient",
          [](const AsvModel& model, const std::vector<double>& x_t, const std::vector<double>& x_e) {
            std::vector<double> grad;
            const double s = ModelScorer(model, x_e).score_and_gradient(x_t, grad);
            return py::make_tuple(s, grad);
          },
          py::arg("x_t"), py::arg("x_e"))
      .def_property_readonly("n_classes", &AsvModel::n_classes);

  m.def(
      "fbank",
      [](const std::vector<double>& x, double sample_rate) {
        const ad::Tensor f = FbankExtractor(
                                 FeatureConfig::from_milliseconds(sample_rate, 25, 10, 256, 24))
                                 .extract(x);
        std::vector<std::vector<double>> rows(f.rows(), std::vector<double>(f.cols()));
        for (std::size_t i = 0; i < f.rows(); ++i) {
          for (std::size_t j = 0; j < f.cols(); ++j) rows[i][j] = f.at(i, j);
        }
        return rows;
      },
      py::arg("waveform"), py::arg("sample_rate") = 8000.0,
      "Log-mel filterbank with the default 25 ms / 10 ms framing.");

  m.def(
      "calibrate_threshold",
      [](const std::vector<double>& tgt, const std::vector<double>& ntgt) {
        const Threshold t = calibrate_threshold(tgt, ntgt);
        return py::make_tuple(t.tau, t.dev_far, t.dev_frr);
      },
      py::arg("target_scores"), py::arg("nontarget_scores"), "Returns (tau, far, frr).");
  m.def("false_accept_rate", [](const std::vector<double>& s, double tau) {
    return false_accept_rate(s, tau);
  });
  m.def("false_reject_rate", [](const std::vector<double>& s, double tau) {
    return false_reject_rate(s, tau);
  });

  m.def(
      "apply_filter",
      [](const std::vector<double>& x, const std::string& kind, std::size_t kernel_size,
         double gaussian_std) { return apply_filter(x, filter_spec(kind, kernel_size, gaussian_std)); },
      py::arg("x"), py::arg("kind"), py::arg("kernel_size") = 3, py::arg("gaussian_std") = 1.0);
  m.def(
      "vote_score",
      [](const AsvModel& model, const std::vector<double>& x_t, const std::vector<double>& x_e,
         double sigma, std::size_t k_votes, std::uint64_t seed) {
        return vote_score(model, x_t, x_e, VoteConfig{sigma, k_votes, seed});
      },
      py::arg("model"), py::arg("x_t"), py::arg("x_e"), py::arg("sigma"), py::arg("k_votes"),
      py::arg("seed"), "Sigma in 16-bit units.");
  m.def(
      "bim",
      [](const AsvModel& model, const std::vector<double>& x_t, const std::vector<double>& x_e,
         bool is_target, double epsilon, std::size_t n_iters, std::optional<double> step_alpha) {
        AttackConfig c;
        c.epsilon = epsilon;
        c.n_iters = n_iters;
        c.step_alpha = step_alpha;
        const AdversarialResult r = bim(model, x_t, x_e, is_target, c);
        py::dict d;
        d["x_adv"] = r.x_adv;
        d["linf_distance"] = r.linf_distance;
        d["score_before"] = r.score_before;
        d["score_after"] = r.score_after;
        d["forward_backward_count"] = r.forward_backward_count;
        return d;
      },
      py::arg("model"), py::arg("x_t"), py::arg("x_e"), py::arg("is_target"), py::arg("epsilon"),
      py::arg("n_iters") = 5, py::arg("step_alpha") = py::none(),
      "Epsilon and step in 16-bit units.");

  m.def(
      "read_wav",
      [](const std::string& path) {
        WavData w = read_wav(path);
        return py::make_tuple(w.samples, w.sample_rate);
      },
      py::arg("path"));
  m.def(
      "write_wav",
      [](const std::string& path, const std::vector<double>& x, std::uint32_t rate) {
        write_wav(path, x, rate);
      },
      py::arg("path"), py::arg("samples"), py::arg("sample_rate"));
  m.def(
      "derive_seed",
      [](std::uint64_t base, const std::string& tag, std::uint64_t index) {
        return derive_seed(base, tag, index);
      },
      py::arg("base"), py::arg("tag"), py::arg("index") = 0);
}
