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

#include "asvvote/autodiff.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <utility>

#include "asvvote/error.hpp"

namespace asvvote::ad {

namespace {

using RowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMajor>;
using ConstMapMat = Eigen::Map<const RowMajor>;

[[noreturn]] void shape_error(const char* op, const Shape& a, const Shape& b) {
  throw Error(std::string(op) + ": shape mismatch " + shape_to_string(a) +
              " vs " + shape_to_string(b));
}

[[noreturn]] void shape_error(const char* op, const Shape& a,
                              const std::string& what) {
  throw Error(std::string(op) + ": " + what + ", got " + shape_to_string(a));
}

void require_same_tape(const char* op, Var a, Var b) {
  if (!a.valid() || !b.valid() || &a.tape() != &b.tape()) {
    throw Error(std::string(op) + ": operands belong to different tapes");
  }
}

ConstMapMat as_matrix(const Tensor& t) {
  return ConstMapMat(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                     static_cast<Eigen::Index>(t.cols()));
}

MapMat as_matrix(Tensor& t) {
  return MapMat(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                static_cast<Eigen::Index>(t.cols()));
}

// How the right operand of a binary op maps onto the left operand's layout.
enum class Broadcast { kSame, kScalar, kRow, kCol };

Broadcast resolve_broadcast(const char* op, const Shape& a, const Shape& b) {
  if (a == b) return Broadcast::kSame;
  if (shape_numel(b) == 1) return Broadcast::kScalar;
  if (a.size() == 2) {
    if ((b.size() == 1 && b[0] == a[1]) ||
        (b.size() == 2 && b[0] == 1 && b[1] == a[1])) {
      return Broadcast::kRow;
    }
    if (b.size() == 2 && b[0] == a[0] && b[1] == 1) return Broadcast::kCol;
  }
  shape_error(op, a, b);
}

inline std::size_t broadcast_index(Broadcast mode, std::size_t i,
                                   std::size_t cols) {
  switch (mode) {
    case Broadcast::kSame:
      return i;
    case Broadcast::kScalar:
      return 0;
    case Broadcast::kRow:
      return i % cols;
    case Broadcast::kCol:
      return i / cols;
  }
  return i;
}

std::size_t trailing_dim(const Shape& s) { return s.empty() ? 1 : s.back(); }

template <typename Forward, typename GradA, typename GradB>
Var binary_op(const char* op, Var a, Var b, Forward forward, GradA grad_a,
              GradB grad_b) {
  require_same_tape(op, a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const Broadcast mode = resolve_broadcast(op, av.shape(), bv.shape());
  const std::size_t cols = trailing_dim(av.shape());
  Tensor out = Tensor::zeros(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = forward(av[i], bv[broadcast_index(mode, i, cols)]);
  }
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return a.tape().record(
      std::move(out), {ia, ib},
      [=](const Tape& tape, const Tensor& g, std::span<Tensor* const> gin) {
        const Tensor& x = tape.value(ia);
        const Tensor& y = tape.value(ib);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const std::size_t j = broadcast_index(mode, i, cols);
          if (gin[0]) (*gin[0])[i] += g[i] * grad_a(x[i], y[j]);
          if (gin[1]) (*gin[1])[j] += g[i] * grad_b(x[i], y[j]);
        }
      });
}

template <typename Forward, typename Derivative>
Var unary_op(Var a, Forward forward, Derivative derivative) {
  const Tensor& av = a.value();
  Tensor out = Tensor::zeros(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = forward(av[i]);
  const std::size_t ia = a.id();
  const std::size_t io = a.tape().size();
  return a.tape().record(
      std::move(out), {ia},
      [=](const Tape& tape, const Tensor& g, std::span<Tensor* const> gin) {
        const Tensor& x = tape.value(ia);
        const Tensor& y = tape.value(io);
        Tensor& gx = *gin[0];
        for (std::size_t i = 0; i < g.size(); ++i) {
          gx[i] += g[i] * derivative(x[i], y[i]);
        }
      });
}

}  // namespace

// ---------------------------------------------------------------------------
// Tensor
// ---------------------------------------------------------------------------

std::string shape_to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_numel(shape_) != data_.size()) {
    throw Error("Tensor: shape " + shape_to_string(shape_) + " needs " +
                std::to_string(shape_numel(shape_)) + " elements, got " +
                std::to_string(data_.size()));
  }
}

Tensor Tensor::zeros(Shape shape) { return filled(std::move(shape), 0.0); }

Tensor Tensor::filled(Shape shape, double value) {
  const std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::scalar(double value) { return Tensor({}, {value}); }

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw Error("Tensor::item: tensor of shape " + shape_to_string(shape_) +
                " is not a single element");
  }
  return data_[0];
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

const Tensor& Var::value() const { return tape_->value(id_); }

bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Tensor Gradients::wrt(Var v) const {
  if (v.id() >= grads_.size()) {
    throw Error("Gradients::wrt: variable is not on the differentiated tape");
  }
  if (grads_[v.id()].empty() && shape_numel(shapes_[v.id()]) != 0) {
    return Tensor::zeros(shapes_[v.id()]);
  }
  return grads_[v.id()];
}

Var Tape::leaf(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, true});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, false});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<std::size_t> inputs,
                 BackwardFn backward) {
#ifndef NDEBUG
  for (double v : value.data()) {
    if (!std::isfinite(v)) {
      throw Error("Tape::record: op produced a non-finite value");
    }
  }
#endif
  bool needs = false;
  for (std::size_t id : inputs) needs = needs || nodes_.at(id).requires_grad;
  Node node{std::move(value), std::move(inputs), nullptr, needs};
  if (needs) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Gradients Tape::backward(Var output) const {
  if (nodes_.empty()) throw Error("backward: tape is empty");
  if (!output.valid() || &output.tape() != this) {
    throw Error("backward: output does not belong to this tape");
  }
  if (output.value().size() != 1) {
    throw Error("backward: output must be a scalar, got shape " +
                shape_to_string(output.shape()));
  }
  Gradients result;
  result.grads_.resize(nodes_.size());
  result.shapes_.reserve(nodes_.size());
  for (const Node& n : nodes_) result.shapes_.push_back(n.value.shape());

  result.grads_[output.id()] = Tensor::filled(output.shape(), 1.0);
  std::vector<Tensor*> gin;
  for (std::size_t i = output.id() + 1; i-- > 0;) {
    const Node& node = nodes_[i];
    if (!node.backward || result.grads_[i].empty()) continue;
    gin.assign(node.inputs.size(), nullptr);
    for (std::size_t k = 0; k < node.inputs.size(); ++k) {
      const std::size_t in = node.inputs[k];
      if (!nodes_[in].requires_grad) continue;
      Tensor& g = result.grads_[in];
      if (g.empty()) g = Tensor::zeros(nodes_[in].value.shape());
      gin[k] = &g;
    }
    node.backward(*this, result.grads_[i], gin);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Ops
// ---------------------------------------------------------------------------

Var add(Var a, Var b) {
  return binary_op(
      "add", a, b, [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Var sub(Var a, Var b) {
  return binary_op(
      "subtract", a, b, [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Var mul(Var a, Var b) {
  return binary_op(
      "multiply", a, b, [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

Var scale(Var a, double factor) {
  return unary_op(
      a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Var add_scalar(Var a, double value) {
  return unary_op(
      a, [value](double x) { return x + value; },
      [](double, double) { return 1.0; });
}

Var matmul(Var a, Var b) {
  require_same_tape("matmul", a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.cols() != bv.rows()) {
    shape_error("matmul", av.shape(), bv.shape());
  }
  Tensor out = Tensor::zeros({av.rows(), bv.cols()});
  as_matrix(out).noalias() = as_matrix(av) * as_matrix(bv);
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return a.tape().record(
      std::move(out), {ia, ib},
      [=](const Tape& tape, const Tensor& g, std::span<Tensor* const> gin) {
        if (gin[0]) {
          as_matrix(*gin[0]).noalias() +=
              as_matrix(g) * as_matrix(tape.value(ib)).transpose();
        }
        if (gin[1]) {
          as_matrix(*gin[1]).noalias() +=
              as_matrix(tape.value(ia)).transpose() * as_matrix(g);
        }
      });
}

Var transpose(Var a) {
  const Tensor& av = a.value();
  if (av.rank() != 2) shape_error("transpose", av.shape(), "expected rank 2");
  Tensor out = Tensor::zeros({av.cols(), av.rows()});
  as_matrix(out) = as_matrix(av).transpose();
  return a.tape().record(
      std::move(out), {a.id()},
      [](const Tape&, const Tensor& g, std::span<Tensor* const> gin) {
        as_matrix(*gin[0]) += as_matrix(g).transpose();
      });
}

Var reshape(Var a, Shape shape) {
  const Tensor& av = a.value();
  if (shape_numel(shape) != av.size()) {
    shape_error("reshape", av.shape(), shape);
  }
  return a.tape().record(
      Tensor(std::move(shape), av.values()), {a.id()},
      [](const Tape&, const Tensor& g, std::span<Tensor* const> gin) {
        for (std::size_t i = 0; i < g.size(); ++i) (*gin[0])[i] += g[i];
      });
}

Var sum(Var a) {
  const Tensor& av = a.value();
  double total = 0.0;
  for (double v : av.data()) total += v;
  return a.tape().record(
      Tensor::scalar(total), {a.id()},
      [](const Tape&, const Tensor& g, std::span<Tensor* const> gin) {
        const double gv = g[0];
        for (double& v : gin[0]->data()) v += gv;
      });
}

Var sum(Var a, std::size_t axis) {
  const Tensor& av = a.value();
  if (av.rank() != 2 || axis > 1) {
    shape_error("sum", av.shape(), "expected rank 2 and axis 0 or 1");
  }
  const std::size_t rows = av.rows();
  const std::size_t cols = av.cols();
  Tensor out = axis == 0 ? Tensor::zeros({1, cols}) : Tensor::zeros({rows, 1});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out[axis == 0 ? c : r] += av[r * cols + c];
    }
  }
  return a.tape().record(
      std::move(out), {a.id()},
      [=](const Tape&, const Tensor& g, std::span<Tensor* const> gin) {
        Tensor& gx = *gin[0];
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) {
            gx[r * cols + c] += g[axis == 0 ? c : r];
          }
        }
      });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) shape_error("mean", a.shape(), "expected a non-empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var square(Var a) {
  return unary_op(
      a, [](double x) { return x * x; },
      [](double x, double) { return 2.0 * x; });
}

Var sqrt(Var a, double floor) {
  return unary_op(
      a, [floor](double x) { return std::sqrt(std::max(x, floor)); },
      [floor](double x, double y) { return x > floor ? 0.5 / y : 0.0; });
}

Var log(Var a, double floor) {
  return unary_op(
      a, [floor](double x) { return std::log(std::max(x, floor)); },
      [floor](double x, double) { return x > floor ? 1.0 / x : 0.0; });
}

Var exp(Var a) {
  return unary_op(
      a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Var tanh(Var a) {
  return unary_op(
      a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var relu(Var a) {
  return unary_op(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var softmax(Var a, std::size_t axis) {
  const Tensor& av = a.value();
  std::size_t rows = 1;
  std::size_t cols = av.size();
  if (av.rank() == 2) {
    rows = av.rows();
    cols = av.cols();
  } else if (av.rank() != 1) {
    shape_error("softmax", av.shape(), "expected rank 1 or 2");
  }
  if (axis > av.rank() - 1) {
    shape_error("softmax", av.shape(), "axis out of range");
  }
  // Groups are the slices normalized together.
  const bool along_rows = av.rank() == 1 || axis == 1;
  const std::size_t groups = along_rows ? rows : cols;
  const std::size_t length = along_rows ? cols : rows;
  const std::size_t stride = along_rows ? 1 : cols;
  auto index = [=](std::size_t g, std::size_t k) {
    return along_rows ? g * cols + k * stride : k * stride + g;
  };

  Tensor out = Tensor::zeros(av.shape());
  for (std::size_t g = 0; g < groups; ++g) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < length; ++k) peak = std::max(peak, av[index(g, k)]);
    double total = 0.0;
    for (std::size_t k = 0; k < length; ++k) {
      const double e = std::exp(av[index(g, k)] - peak);
      out[index(g, k)] = e;
      total += e;
    }
    for (std::size_t k = 0; k < length; ++k) out[index(g, k)] /= total;
  }
  const std::size_t io = a.tape().size();
  return a.tape().record(
      std::move(out), {a.id()},
      [=](const Tape& tape, const Tensor& grad, std::span<Tensor* const> gin) {
        const Tensor& y = tape.value(io);
        Tensor& gx = *gin[0];
        for (std::size_t g = 0; g < groups; ++g) {
          double dot = 0.0;
          for (std::size_t k = 0; k < length; ++k) {
            dot += grad[index(g, k)] * y[index(g, k)];
          }
          for (std::size_t k = 0; k < length; ++k) {
            const std::size_t i = index(g, k);
            gx[i] += y[i] * (grad[i] - dot);
          }
        }
      });
}

Var l2_normalize(Var a, double floor) {
  const Tensor& av = a.value();
  if (av.rank() == 0 || av.size() == 0) {
    shape_error("l2_normalize", av.shape(), "expected a non-empty vector");
  }
  const std::size_t cols = av.shape().back();
  const std::size_t rows = av.size() / cols;
  std::vector<double> norms(rows);
  std::vector<bool> floored(rows);
  Tensor out = Tensor::zeros(av.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    double ss = 0.0;
    for (std::size_t c = 0; c < cols; ++c) ss += av[r * cols + c] * av[r * cols + c];
    double n = std::sqrt(ss);
    floored[r] = n <= floor;
    if (floored[r]) n = floor;
    norms[r] = n;
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = av[r * cols + c] / n;
  }
  const std::size_t io = a.tape().size();
  return a.tape().record(
      std::move(out), {a.id()},
      [=](const Tape& tape, const Tensor& g, std::span<Tensor* const> gin) {
        const Tensor& y = tape.value(io);
        Tensor& gx = *gin[0];
        for (std::size_t r = 0; r < rows; ++r) {
          double dot = 0.0;
          if (!floored[r]) {
            for (std::size_t c = 0; c < cols; ++c) dot += y[r * cols + c] * g[r * cols + c];
          }
          for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t i = r * cols + c;
            gx[i] += (g[i] - y[i] * dot) / norms[r];
          }
        }
      });
}

Var gather(Var a, std::vector<std::size_t> indices, Shape shape) {
  const Tensor& av = a.value();
  if (shape_numel(shape) != indices.size()) {
    shape_error("gather", shape, "index count " + std::to_string(indices.size()) +
                                     " does not match output shape");
  }
  Tensor out = Tensor::zeros(std::move(shape));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= av.size()) {
      throw Error("gather: index " + std::to_string(indices[i]) +
                  " out of range for shape " + shape_to_string(av.shape()));
    }
    out[i] = av[indices[i]];
  }
  return a.tape().record(
      std::move(out), {a.id()},
      [idx = std::move(indices)](const Tape&, const Tensor& g,
                                 std::span<Tensor* const> gin) {
        Tensor& gx = *gin[0];
        for (std::size_t i = 0; i < idx.size(); ++i) gx[idx[i]] += g[i];
      });
}

Var frame_slice(Var signal, std::size_t win, std::size_t hop) {
  const Tensor& sv = signal.value();
  if (sv.rank() != 1) shape_error("frame_slice", sv.shape(), "expected rank 1");
  if (win == 0 || hop == 0) throw Error("frame_slice: win and hop must be >= 1");
  if (sv.size() < win) {
    throw Error("frame_slice: utterance too short (" + std::to_string(sv.size()) +
                " samples, window " + std::to_string(win) + ")");
  }
  const std::size_t frames = (sv.size() - win) / hop + 1;
  std::vector<std::size_t> indices(frames * win);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t j = 0; j < win; ++j) indices[f * win + j] = f * hop + j;
  }
  return gather(signal, std::move(indices), {frames, win});
}

Var concat(std::span<const Var> parts, std::size_t axis) {
  if (parts.empty()) throw Error("concat: no inputs");
  if (axis > 1) throw Error("concat: axis must be 0 or 1");
  auto dims = [](const Tensor& t) -> std::pair<std::size_t, std::size_t> {
    if (t.rank() == 1) return {1, t.size()};
    if (t.rank() == 2) return {t.rows(), t.cols()};
    shape_error("concat", t.shape(), "expected rank 1 or 2");
  };
  const auto [r0, c0] = dims(parts[0].value());
  std::size_t rows = 0;
  std::size_t cols = 0;
  for (const Var& p : parts) {
    require_same_tape("concat", parts[0], p);
    const auto [r, c] = dims(p.value());
    if (axis == 0 ? c != c0 : r != r0) {
      shape_error("concat", parts[0].shape(), p.shape());
    }
    if (axis == 0) rows += r; else cols += c;
  }
  if (axis == 0) cols = c0; else rows = r0;

  Tensor out = Tensor::zeros({rows, cols});
  std::vector<std::size_t> ids;
  std::vector<std::pair<std::size_t, std::size_t>> extents;
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    const auto [r, c] = dims(v);
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < c; ++j) {
        const std::size_t dst = axis == 0 ? (offset + i) * cols + j : i * cols + offset + j;
        out[dst] = v[i * c + j];
      }
    }
    ids.push_back(p.id());
    extents.emplace_back(r, c);
    offset += axis == 0 ? r : c;
  }
  return parts[0].tape().record(
      std::move(out), ids,
      [=](const Tape&, const Tensor& g, std::span<Tensor* const> gin) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < extents.size(); ++k) {
          const auto [r, c] = extents[k];
          if (gin[k]) {
            for (std::size_t i = 0; i < r; ++i) {
              for (std::size_t j = 0; j < c; ++j) {
                const std::size_t src = axis == 0 ? (off + i) * cols + j : i * cols + off + j;
                (*gin[k])[i * c + j] += g[src];
              }
            }
          }
          off += axis == 0 ? r : c;
        }
      });
}

// ---------------------------------------------------------------------------
// Oracle
// ---------------------------------------------------------------------------

std::vector<double> finite_diff_gradient(const ScalarFunction& f,
                                         std::span<const double> point,
                                         double step,
                                         std::span<const std::size_t> coordinates) {
  if (!(step > 0.0)) throw Error("finite_diff_gradient: step must be > 0");
  std::vector<double> x(point.begin(), point.end());
  std::vector<double> grad(x.size(), 0.0);
  auto probe = [&](std::size_t i) {
    const double saved = x[i];
    x[i] = saved + step;
    const double up = f(x);
    x[i] = saved - step;
    const double down = f(x);
    x[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw Error("finite_diff_gradient: non-finite function value at coordinate " +
                  std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * step);
  };
  if (coordinates.empty()) {
    for (std::size_t i = 0; i < x.size(); ++i) probe(i);
  } else {
    for (std::size_t i : coordinates) {
      if (i >= x.size()) throw Error("finite_diff_gradient: coordinate out of range");
      probe(i);
    }
  }
  return grad;
}

}  // namespace asvvote::ad
