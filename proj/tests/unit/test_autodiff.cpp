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

#include <cmath>
#include <functional>
#include <limits>

#include <gtest/gtest.h>

#include "asvvote/error.hpp"
#include "test_util.hpp"

namespace asvvote::ad {
namespace {

using asvvote::testing::random_vector;

TEST(Autodiff, AddElementwise) {
  Tape tape;
  Var y = add(tape.leaf(Tensor::vector({1, 2})), tape.leaf(Tensor::vector({3, 4})));
  EXPECT_EQ(y.value().values(), (std::vector<double>{4, 6}));
}

TEST(Autodiff, L2NormalizeThreeFour) {
  Tape tape;
  Var y = l2_normalize(tape.leaf(Tensor::vector({3, 4})));
  EXPECT_NEAR(y.value()[0], 0.6, 1e-15);
  EXPECT_NEAR(y.value()[1], 0.8, 1e-15);
}

TEST(Autodiff, SoftmaxOfEqualLogitsIsUniform) {
  Tape tape;
  Var y = softmax(tape.leaf(Tensor::vector({0, 0})), 0);
  EXPECT_DOUBLE_EQ(y.value()[0], 0.5);
  EXPECT_DOUBLE_EQ(y.value()[1], 0.5);
}

TEST(Autodiff, SquareGradient) {
  Tape tape;
  Var x = tape.leaf(Tensor::scalar(3.0));
  Gradients g = tape.backward(square(x));
  EXPECT_DOUBLE_EQ(g.wrt(x).item(), 6.0);
}

TEST(Autodiff, CosineIsStationaryAtEqualVectors) {
  Tape tape;
  Var u = tape.leaf(Tensor::matrix(1, 2, {1, 2}));
  Var v = tape.constant(Tensor::matrix(1, 2, {1, 2}));
  Var cos = sum(mul(l2_normalize(u), l2_normalize(v)));
  Tensor gu = tape.backward(cos).wrt(u);
  EXPECT_NEAR(gu[0], 0.0, 1e-15);
  EXPECT_NEAR(gu[1], 0.0, 1e-15);
}

TEST(Autodiff, UnreachableLeafGetsZeroGradient) {
  Tape tape;
  Var x = tape.leaf(Tensor::vector({1, 2, 3}));
  Var unused = tape.leaf(Tensor::vector({5, 6}));
  Tensor g = tape.backward(sum(x)).wrt(unused);
  EXPECT_EQ(g.values(), (std::vector<double>{0, 0}));
}

TEST(Autodiff, FanOutAccumulates) {
  Tape tape;
  Var x = tape.leaf(Tensor::scalar(2.0));
  Var y = add(mul(x, x), x);  // x^2 + x
  EXPECT_DOUBLE_EQ(tape.backward(y).wrt(x).item(), 5.0);
}

TEST(Autodiff, BackwardErrors) {
  Tape empty;
  EXPECT_THROW(empty.backward(Var{}), Error);
  Tape tape;
  Var v = tape.leaf(Tensor::vector({1, 2}));
  EXPECT_THROW(tape.backward(v), Error);
}

TEST(Autodiff, ShapeMismatchNamesOpAndShapes) {
  Tape tape;
  Var a = tape.leaf(Tensor::matrix(2, 3, std::vector<double>(6, 1.0)));
  Var b = tape.leaf(Tensor::matrix(2, 2, std::vector<double>(4, 1.0)));
  try {
    matmul(b, a);
    add(a, b);
    FAIL() << "expected a shape error";
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("add"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[2, 3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[2, 2]"), std::string::npos) << msg;
  }
}

TEST(FiniteDiff, LinearFunctionIsExact) {
  const auto g = finite_diff_gradient(
      [](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
      },
      random_vector(7, 1), 1e-4);
  for (double v : g) EXPECT_NEAR(v, 1.0, 1e-8);
}

TEST(FiniteDiff, Square) {
  const std::vector<double> x{3.0};
  const auto g = finite_diff_gradient([](std::span<const double> p) { return p[0] * p[0]; }, x,
                                      1e-4);
  EXPECT_NEAR(g[0], 6.0, 1e-6);
}

TEST(FiniteDiff, Errors) {
  const std::vector<double> x{1.0};
  auto f = [](std::span<const double> p) { return p[0]; };
  EXPECT_THROW(finite_diff_gradient(f, x, 0.0), Error);
  try {
    finite_diff_gradient(
        [](std::span<const double> p) {
          return p[0] > 1.0 ? std::numeric_limits<double>::infinity() : 0.0;
        },
        x, 1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("coordinate 0"), std::string::npos);
  }
}

// Builds an op output from leaves holding `inputs`.
using OpBuilder = std::function<Var(Tape&, const std::vector<Var>&)>;

// Checks the tape gradient of sum(w * op(inputs)) against central
// differences for every input coordinate.
void check_op(const std::string& name, const std::vector<Tensor>& inputs, const OpBuilder& op,
              double h = 1e-6) {
  SCOPED_TRACE(name);
  auto value_of = [&](const std::vector<Tensor>& in, std::vector<Var>* leaves,
                      Tape& tape) -> Var {
    std::vector<Var> vars;
    for (const Tensor& t : in) vars.push_back(tape.leaf(t));
    if (leaves) *leaves = vars;
    Var out = op(tape, vars);
    const auto w = random_vector(out.value().size(), 99, 0.5, 1.5);
    return sum(mul(out, tape.constant(Tensor(out.shape(), w))));
  };
  Tape tape;
  std::vector<Var> leaves;
  Var y = value_of(inputs, &leaves, tape);
  Gradients g = tape.backward(y);
  for (std::size_t a = 0; a < inputs.size(); ++a) {
    const Tensor analytic = g.wrt(leaves[a]);
    const auto numeric = finite_diff_gradient(
        [&](std::span<const double> p) {
          std::vector<Tensor> in = inputs;
          in[a] = Tensor(inputs[a].shape(), std::vector<double>(p.begin(), p.end()));
          Tape t;
          return value_of(in, nullptr, t).value().item();
        },
        inputs[a].values(), h);
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      if (std::max(std::abs(analytic[i]), std::abs(numeric[i])) > 1e-6) {
        EXPECT_LT(asvvote::testing::rel_error(analytic[i], numeric[i]), 1e-5)
            << "input " << a << " coord " << i << ": " << analytic[i] << " vs " << numeric[i];
      } else {
        EXPECT_LT(std::abs(analytic[i] - numeric[i]), 1e-7);
      }
    }
  }
}

Tensor rand_matrix(std::size_t r, std::size_t c, std::uint64_t seed, double lo = -1.0,
                   double hi = 1.0) {
  return Tensor::matrix(r, c, random_vector(r * c, seed, lo, hi));
}

TEST(AutodiffProperty, EveryOpMatchesFiniteDifferences) {
  const Tensor a = rand_matrix(3, 4, 1);
  const Tensor b = rand_matrix(3, 4, 2);
  const Tensor row = rand_matrix(1, 4, 3);
  const Tensor col = rand_matrix(3, 1, 4);
  const Tensor pos = rand_matrix(3, 4, 5, 0.5, 2.0);
  const Tensor m = rand_matrix(4, 2, 6);
  using V = const std::vector<Var>&;
  check_op("add", {a, b}, [](Tape&, V v) { return add(v[0], v[1]); });
  check_op("add row", {a, row}, [](Tape&, V v) { return add(v[0], v[1]); });
  check_op("add col", {a, col}, [](Tape&, V v) { return add(v[0], v[1]); });
  check_op("sub", {a, b}, [](Tape&, V v) { return sub(v[0], v[1]); });
  check_op("mul", {a, b}, [](Tape&, V v) { return mul(v[0], v[1]); });
  check_op("mul row", {a, row}, [](Tape&, V v) { return mul(v[0], v[1]); });
  check_op("scale", {a}, [](Tape&, V v) { return scale(v[0], -2.5); });
  check_op("add_scalar", {a}, [](Tape&, V v) { return add_scalar(v[0], 0.3); });
  check_op("matmul", {a, m}, [](Tape&, V v) { return matmul(v[0], v[1]); });
  check_op("transpose", {a}, [](Tape&, V v) { return transpose(v[0]); });
  check_op("reshape", {a}, [](Tape&, V v) { return reshape(v[0], {4, 3}); });
  check_op("sum", {a}, [](Tape&, V v) { return sum(v[0]); });
  check_op("sum axis 0", {a}, [](Tape&, V v) { return sum(v[0], 0); });
  check_op("sum axis 1", {a}, [](Tape&, V v) { return sum(v[0], 1); });
  check_op("mean", {a}, [](Tape&, V v) { return mean(v[0]); });
  check_op("square", {a}, [](Tape&, V v) { return square(v[0]); });
  check_op("sqrt", {pos}, [](Tape&, V v) { return ad::sqrt(v[0]); });
  check_op("log", {pos}, [](Tape&, V v) { return ad::log(v[0]); });
  check_op("exp", {a}, [](Tape&, V v) { return ad::exp(v[0]); });
  check_op("tanh", {a}, [](Tape&, V v) { return ad::tanh(v[0]); });
  check_op("relu", {a}, [](Tape&, V v) { return relu(v[0]); });
  check_op("softmax 0", {a}, [](Tape&, V v) { return softmax(v[0], 0); });
  check_op("softmax 1", {a}, [](Tape&, V v) { return softmax(v[0], 1); });
  check_op("l2_normalize", {a}, [](Tape&, V v) { return l2_normalize(v[0]); });
  check_op("gather", {a},
           [](Tape&, V v) { return gather(v[0], {0, 5, 5, 11, 2, 7}, {2, 3}); });
  check_op("frame_slice", {Tensor::vector(random_vector(11, 7))},
           [](Tape&, V v) { return frame_slice(v[0], 4, 3); });
  check_op("concat 0", {a, b}, [](Tape&, V v) {
    std::vector<Var> parts{v[0], v[1]};
    return concat(parts, 0);
  });
  check_op("concat 1", {a, col}, [](Tape&, V v) {
    std::vector<Var> parts{v[0], v[1]};
    return concat(parts, 1);
  });
}

TEST(AutodiffProperty, ReluOnRandomLinearMap) {
  const Tensor w = rand_matrix(5, 4, 11);
  const Tensor x = rand_matrix(4, 1, 12);
  check_op("sum(relu(Wx))", {w, x},
           [](Tape&, const std::vector<Var>& v) { return relu(matmul(v[0], v[1])); });
}

TEST(AutodiffProperty, GradientIsLinear) {
  // d(f + g) = df + dg on the same point.
  const Tensor x0 = rand_matrix(2, 3, 21);
  auto grad_of = [&](const std::function<Var(Var)>& f) {
    Tape tape;
    Var x = tape.leaf(x0);
    return tape.backward(f(x)).wrt(x);
  };
  auto f = [](Var x) { return sum(ad::tanh(x)); };
  auto g = [](Var x) { return sum(square(x)); };
  const Tensor gf = grad_of(f);
  const Tensor gg = grad_of(g);
  const Tensor gs = grad_of([&](Var x) { return add(f(x), g(x)); });
  for (std::size_t i = 0; i < gs.size(); ++i) EXPECT_NEAR(gs[i], gf[i] + gg[i], 1e-12);
}

TEST(AutodiffProperty, BackwardIsDeterministic) {
  Tape tape;
  Var x = tape.leaf(rand_matrix(3, 4, 31));
  Var y = sum(l2_normalize(ad::tanh(matmul(x, tape.constant(rand_matrix(4, 3, 32))))));
  const Tensor g1 = tape.backward(y).wrt(x);
  const Tensor g2 = tape.backward(y).wrt(x);
  EXPECT_EQ(g1.values(), g2.values());
}

TEST(AutodiffProperty, FloorsStopGradient) {
  Tape tape;
  Var x = tape.leaf(Tensor::vector({0.0, 1e-12}));
  Tensor g = tape.backward(sum(ad::log(x))).wrt(x);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g[1], 0.0);
  EXPECT_DOUBLE_EQ(ad::log(x).value()[0], std::log(kDefaultFloor));
}

}  // namespace
}  // namespace asvvote::ad
