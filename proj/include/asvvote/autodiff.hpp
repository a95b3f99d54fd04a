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

// Minimal reverse-mode automatic differentiation over dense row-major
// tensors of doubles.
//
// Usage:
//   ad::Tape tape;
//   ad::Var x = tape.leaf(ad::Tensor::vector({1.0, 2.0}));
//   ad::Var y = ad::sum(ad::square(x));
//   ad::Gradients g = tape.backward(y);
//   g.wrt(x);  // {2, 4}
//
// A Tape is single-threaded.  Separate tapes may be used concurrently.

#ifndef ASVVOTE_AUTODIFF_HPP_
#define ASVVOTE_AUTODIFF_HPP_

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace asvvote::ad {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_numel(const Shape& shape);

class Tensor {
 public:
  Tensor() = default;
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape);
  static Tensor filled(Shape shape, double value);
  static Tensor scalar(double value);
  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::vector<double> values);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }
  std::vector<double>& values() { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Value of a single-element tensor.
  double item() const;

  // Rows/cols of a rank-2 tensor.
  std::size_t rows() const { return shape_.at(0); }
  std::size_t cols() const { return shape_.at(1); }
  double at(std::size_t r, std::size_t c) const {
    return data_[r * shape_[1] + c];
  }

 private:
  Shape shape_;
  std::vector<double> data_;
};

class Tape;

// Handle to a node on a tape.  Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t id() const { return id_; }
  Tape& tape() const { return *tape_; }
  bool requires_grad() const;
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Accumulates the vector-Jacobian product of one node into its inputs.
// `grad_in[i]` is null for inputs that do not require a gradient.
using BackwardFn = std::function<void(
    const Tape& tape, const Tensor& grad_out, std::span<Tensor* const> grad_in)>;

class Gradients {
 public:
  // Gradient of the differentiated output with respect to `v`.  Zero when
  // `v` does not contribute to the output.
  Tensor wrt(Var v) const;

 private:
  friend class Tape;
  std::vector<Tensor> grads_;
  std::vector<Shape> shapes_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Differentiable input.
  Var leaf(Tensor value);
  // Input excluded from differentiation.
  Var constant(Tensor value);

  // Records an op result.  `backward` is dropped when no input requires a
  // gradient.
  Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn backward);

  // Gradients of a scalar node with respect to every node on the tape.
  Gradients backward(Var output) const;

  std::size_t size() const { return nodes_.size(); }
  const Tensor& value(std::size_t id) const { return nodes_.at(id).value; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }

 private:
  struct Node {
    Tensor value;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool requires_grad = false;
  };
  std::deque<Node> nodes_;  // stable references to node values
};

// ---------------------------------------------------------------------------
// Closed op set.
//
// Binary elementwise ops accept a right operand that is the same shape as
// the left, a single element, a row matching the trailing dimension
// ([D] or [1, D] against [T, D]) or a column ([T, 1] against [T, D]).
// ---------------------------------------------------------------------------

inline constexpr double kDefaultFloor = 1e-10;

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double value);
Var matmul(Var a, Var b);
Var transpose(Var a);
Var reshape(Var a, Shape shape);
Var sum(Var a);
// Reduces a rank-2 tensor over `axis`, keeping it as size 1.
Var sum(Var a, std::size_t axis);
Var mean(Var a);
Var square(Var a);
// sqrt(max(x, floor)); zero gradient below the floor.
Var sqrt(Var a, double floor = kDefaultFloor);
// log(max(x, floor)); zero gradient below the floor.
Var log(Var a, double floor = kDefaultFloor);
Var exp(Var a);
Var tanh(Var a);
Var relu(Var a);
// Softmax of a rank-1 or rank-2 tensor along `axis`.
Var softmax(Var a, std::size_t axis);
// Normalizes each row (the trailing axis) to unit L2 norm.
Var l2_normalize(Var a, double floor = kDefaultFloor);
// out.flat[i] = a.flat[indices[i]], shaped as `shape`.
Var gather(Var a, std::vector<std::size_t> indices, Shape shape);
// Overlapping frames of a rank-1 signal: [n_frames, win].
Var frame_slice(Var signal, std::size_t win, std::size_t hop);
// Concatenation of rank-2 tensors along `axis` (rank-1 inputs are rows).
Var concat(std::span<const Var> parts, std::size_t axis);

// ---------------------------------------------------------------------------
// Numerical oracle.
// ---------------------------------------------------------------------------

using ScalarFunction = std::function<double(std::span<const double>)>;

// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every
// coordinate, or only for `coordinates` when non-empty (other entries 0).
std::vector<double> finite_diff_gradient(
    const ScalarFunction& f, std::span<const double> point, double step,
    std::span<const std::size_t> coordinates = {});

}  // namespace asvvote::ad

#endif  // ASVVOTE_AUTODIFF_HPP_
