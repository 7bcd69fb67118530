// Copyright 2026 The wsrglow-cpp Authors
// SPDX-License-Identifier: Apache-2.0
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

#include <doctest.h>

#include <cmath>
#include <functional>

#include "wsrglow/common/error.hpp"
#include "wsrglow/common/rng.hpp"
#include "wsrglow/ndgrad/grad_check.hpp"
#include "wsrglow/ndgrad/ops.hpp"

using namespace wsrglow;
using namespace wsrglow::ndgrad;

namespace {

Tensor<double> random_tensor(Shape shape, Rng& rng, double lo = -1, double hi = 1) {
  Tensor<double> t(std::move(shape));
  for (auto& v : t.storage()) v = lo + (hi - lo) * rng.uniform();
  return t;
}

// Weighted sum of an op output, so every output element matters.
Var<double> probe(const Graph<double>& g, const Var<double>& y, const Tensor<double>& w) {
  return sum(mul(y, g.constant(w)));
}

// Coordinate-wise central differences against backward, for every element.
double max_coordinate_error(ParameterStore<double>& params, const std::function<Var<double>(const Graph<double>&)>& f) {
  params.zero_grad();
  {
    Graph<double> g;
    g.backward(f(g));
  }
  double worst = 0;
  for (auto& p : params) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double keep = p.value[i];
      const double eps = 1e-6;
      p.value[i] = keep + eps;
      Graph<double> g1(false);
      const double up = f(g1).value().item();
      p.value[i] = keep - eps;
      Graph<double> g2(false);
      const double down = f(g2).value().item();
      p.value[i] = keep;
      const double numeric = (up - down) / (2 * eps);
      const double analytic = p.grad[i];
      if (std::abs(analytic) < 1e-9 && std::abs(numeric) < 1e-9) continue;
      worst = std::max(worst, relative_error(analytic, numeric));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("tensor invariants") {
  Tensor<float> t({2, 3}, 1.5f);
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  CHECK(t.at(1, 2) == 1.5f);
  CHECK_THROWS_AS(Tensor<float>({2, 2}, std::vector<float>{1, 2, 3}), ShapeError);
  CHECK_THROWS_AS(t.reshaped({4}), ShapeError);
  CHECK(t.reshaped({3, 2}).shape() == Shape{3, 2});
  CHECK(Tensor<double>().size() == 1);
  CHECK(reinterpret_cast<std::uintptr_t>(t.data()) % 64 == 0);
}

TEST_CASE("parameter names are unique and grads start at zero") {
  ParameterStore<double> ps;
  auto& p = ps.add("a", Tensor<double>({3}, 2.0));
  CHECK(p.grad == Tensor<double>({3}));
  CHECK_THROWS_AS(ps.add("a", Tensor<double>({1})), ConfigError);
  CHECK(ps.find("a") == &p);
  CHECK(ps.find("b") == nullptr);
}

TEST_CASE("node ids increase and parents precede children") {
  Graph<double> g;
  auto a = g.constant(Tensor<double>({2}, 1.0));
  auto b = g.constant(Tensor<double>({2}, 2.0));
  auto c = add(a, b);
  CHECK(a.id() < b.id());
  CHECK(b.id() < c.id());
  for (const auto& p : c.node()->parents) CHECK(p->id < c.id());
}

TEST_CASE("mixing vars from two graphs is rejected") {
  Graph<double> g1, g2;
  auto a = g1.constant(Tensor<double>({2}, 1.0));
  auto b = g2.constant(Tensor<double>({2}, 1.0));
  CHECK_THROWS(add(a, b));
}

TEST_CASE("conv1d examples") {
  Graph<double> g(false);
  SUBCASE("identity kernel") {
    Tensor<double> w({3, 3, 1});
    for (std::size_t c = 0; c < 3; ++c) w[c * 3 + c] = 1;
    Rng rng(1);
    auto x = random_tensor({3, 5}, rng);
    auto y = conv1d(g.constant(x), g.constant(w), Var<double>{}, 1);
    CHECK(y.value() == x);
  }
  SUBCASE("three-tap difference kernel") {
    // out[l] = x[l-1] - x[l+1] with zero padding: [0-2, 1-3, 2-0].
    auto y = conv1d(g.constant(Tensor<double>({1, 3}, {1, 2, 3})), g.constant(Tensor<double>({1, 1, 3}, {1, 0, -1})),
                    Var<double>{}, 1);
    CHECK(y.value() == Tensor<double>({1, 3}, {-2, -2, 2}));
  }
  SUBCASE("dilation spreads the kernel") {
    Tensor<double> x({1, 9});
    x[4] = 1;
    auto y = conv1d(g.constant(x), g.constant(Tensor<double>({1, 1, 3}, {5, 6, 7})),
                    g.constant(Tensor<double>({1}, {0.0})), 2);
    // out[l] = w0 x[l-2] + w1 x[l] + w2 x[l+2]
    CHECK(y.value() == Tensor<double>({1, 9}, {0, 0, 7, 0, 6, 0, 5, 0, 0}));
  }
  SUBCASE("bias and shape errors") {
    auto y = conv1d(g.constant(Tensor<double>({1, 2}, {1, 1})), g.constant(Tensor<double>({1, 1, 1}, {2})),
                    g.constant(Tensor<double>({1}, {0.5})), 1);
    CHECK(y.value() == Tensor<double>({1, 2}, {2.5, 2.5}));
    CHECK_THROWS_AS(conv1d(g.constant(Tensor<double>({2, 4})), g.constant(Tensor<double>({1, 3, 3})), Var<double>{}, 1),
                    ShapeError);
    CHECK_THROWS_AS(conv1d(g.constant(Tensor<double>({1, 4})), g.constant(Tensor<double>({1, 1, 2})), Var<double>{}, 1),
                    ShapeError);
  }
}

TEST_CASE("channel_mix examples") {
  Graph<double> g(false);
  Tensor<double> x({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(channel_mix(g.constant(x), g.constant(Tensor<double>({2, 2}, {1, 0, 0, 1}))).value() == x);
  CHECK(channel_mix(g.constant(x), g.constant(Tensor<double>({2, 2}, {0, 1, 1, 0}))).value() ==
        Tensor<double>({2, 3}, {4, 5, 6, 1, 2, 3}));
  Rng rng(3);
  auto w = random_tensor({2, 2}, rng);
  auto y = channel_mix(g.constant(x), g.constant(w)).value();
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t r = 0; r < 2; ++r) {
      CHECK(y.at(r, t) == doctest::Approx(w.at(r, 0) * x.at(0, t) + w.at(r, 1) * x.at(1, t)).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(channel_mix(g.constant(x), g.constant(Tensor<double>({3, 3}))), ShapeError);
}

TEST_CASE("embedding_lookup gathers rows and scatters grads") {
  ParameterStore<double> ps;
  Rng rng(4);
  auto& table = ps.add("table", random_tensor({256, 256}, rng));
  Graph<double> g;
  std::vector<int> idx{5, 17};
  auto y = embedding_lookup(g.parameter(table), idx);
  REQUIRE(y.shape() == Shape{2, 256});
  for (std::size_t e = 0; e < 256; ++e) {
    CHECK(y.value().at(0, e) == table.value.at(5, e));
    CHECK(y.value().at(1, e) == table.value.at(17, e));
  }
  std::vector<int> rep{3, 3};
  g.backward(sum(embedding_lookup(g.parameter(table), rep)));
  CHECK(table.grad.at(3, 0) == 2.0);
  CHECK(table.grad.at(4, 0) == 0.0);
  std::vector<int> bad{256};
  CHECK_THROWS_AS(embedding_lookup(g.parameter(table), bad), DomainError);
  std::vector<int> neg{-1};
  CHECK_THROWS_AS(embedding_lookup(g.parameter(table), neg), DomainError);
}

TEST_CASE("elementwise values") {
  Graph<double> g(false);
  auto c = [&](double v) { return g.constant(Tensor<double>::scalar(v)); };
  CHECK(tanh(c(0)).value().item() == 0.0);
  CHECK(sigmoid(c(0)).value().item() == 0.5);
  CHECK(exp(log(c(2.5))).value().item() == doctest::Approx(2.5).epsilon(1e-15));
  const double gated = mul(tanh(c(1)), sigmoid(c(-1))).value().item();
  CHECK(gated == doctest::Approx(std::tanh(1.0) / (1.0 + std::exp(1.0))).epsilon(1e-15));
  CHECK_THROWS_AS(log(c(0)), DomainError);
  CHECK_THROWS_AS(log(c(-1)), DomainError);
  CHECK_THROWS_AS(add(g.constant(Tensor<double>({2})), g.constant(Tensor<double>({3}))), ShapeError);
  CHECK(mul(g.constant(Tensor<double>({2}, {1, 2})), c(3)).value() == Tensor<double>({2}, {3, 6}));
}

TEST_CASE("backward basics") {
  ParameterStore<double> ps;
  auto& p = ps.add("p", Tensor<double>({3}, {1, -2, 0.5}));
  auto& q = ps.add("q", Tensor<double>({2}, {4, 4}));
  Graph<double> g;
  g.backward(sum_squares(g.parameter(p)));
  CHECK(p.grad == Tensor<double>({3}, {2, -4, 1}));
  CHECK(q.grad == Tensor<double>({2}));

  ps.zero_grad();
  g.backward(g.constant(Tensor<double>::scalar(7)));
  CHECK(p.grad == Tensor<double>({3}));
  CHECK_THROWS_AS(g.backward(g.parameter(p)), ShapeError);
}

TEST_CASE("backward is linear in the loss") {
  Rng rng(5);
  ParameterStore<double> ps;
  auto& p = ps.add("p", random_tensor({2, 6}, rng));
  auto l1 = [&](const Graph<double>& g) { return sum(tanh(g.parameter(p))); };
  auto l2 = [&](const Graph<double>& g) { return sum_squares(exp(g.parameter(p))); };
  Graph<double> g;
  g.backward(add(l1(g), l2(g)));
  const auto joint = p.grad;
  ps.zero_grad();
  g.backward(l1(g));
  g.backward(l2(g));
  for (std::size_t i = 0; i < joint.size(); ++i) CHECK(joint[i] == doctest::Approx(p.grad[i]).epsilon(1e-14));
}

TEST_CASE("every op matches central differences") {
  Rng rng(6);
  ParameterStore<double> ps;
  auto& a = ps.add("a", random_tensor({3, 8}, rng, 0.2, 1.0));
  auto& b = ps.add("b", random_tensor({3, 8}, rng));
  auto& w = ps.add("w", random_tensor({4, 3, 3}, rng));
  auto& bias = ps.add("bias", random_tensor({4}, rng));
  auto& mix = ps.add("mix", random_tensor({3, 3}, rng));
  auto& table = ps.add("table", random_tensor({6, 5}, rng));
  auto& s = ps.add("s", random_tensor({1}, rng));
  auto& x14 = ps.add("x14", random_tensor({1, 4}, rng));
  auto& k13 = ps.add("k13", random_tensor({1, 1, 3}, rng));
  std::vector<int> idx{0, 3, 3, 5};
  const auto weights = random_tensor({3, 8}, rng);

  using Fn = std::function<Var<double>(const Graph<double>&)>;
  std::vector<std::pair<const char*, Fn>> cases = {
      {"add", [&](const Graph<double>& g) { return probe(g, add(g.parameter(a), g.parameter(b)), weights); }},
      {"sub", [&](const Graph<double>& g) { return probe(g, sub(g.parameter(a), g.parameter(b)), Tensor<double>({3, 8}, 0.3)); }},
      {"mul", [&](const Graph<double>& g) { return sum(mul(g.parameter(a), g.parameter(b))); }},
      {"mul scalar", [&](const Graph<double>& g) { return sum_squares(mul(g.parameter(a), reshape(g.parameter(s), {}))); }},
      {"neg", [&](const Graph<double>& g) { return sum_squares(neg(g.parameter(b))); }},
      {"exp", [&](const Graph<double>& g) { return sum(exp(g.parameter(b))); }},
      {"log", [&](const Graph<double>& g) { return sum_squares(log(g.parameter(a))); }},
      {"tanh", [&](const Graph<double>& g) { return sum_squares(tanh(g.parameter(b))); }},
      {"sigmoid", [&](const Graph<double>& g) { return sum_squares(sigmoid(g.parameter(b))); }},
      {"scale", [&](const Graph<double>& g) { return sum_squares(scale(g.parameter(b), 1.7)); }},
      {"conv1d d1", [&](const Graph<double>& g) { return sum_squares(conv1d(g.parameter(b), g.parameter(w), g.parameter(bias), 1)); }},
      {"conv1d d4", [&](const Graph<double>& g) { return sum_squares(conv1d(g.parameter(b), g.parameter(w), g.parameter(bias), 4)); }},
      {"channel_mix", [&](const Graph<double>& g) { return sum_squares(channel_mix(g.parameter(b), g.parameter(mix))); }},
      {"embedding", [&](const Graph<double>& g) { return sum_squares(tanh(embedding_lookup(g.parameter(table), idx))); }},
      {"slice/concat", [&](const Graph<double>& g) {
         auto x = g.parameter(b);
         return sum_squares(concat_rows<double>({slice_rows(x, 2, 3), tanh(slice_rows(x, 0, 2))}));
       }},
      {"transpose", [&](const Graph<double>& g) { return sum_squares(channel_mix(transpose(reshape(g.parameter(b), {8, 3})), g.parameter(mix))); }},
      {"repeat_cols", [&](const Graph<double>& g) { return sum_squares(tanh(repeat_cols(g.parameter(b), 3))); }},
      {"logabsdet", [&](const Graph<double>& g) { return logabsdet(g.parameter(mix)); }},
      {"composed conv-tanh-sum", [&](const Graph<double>& g) {
         return sum(tanh(conv1d(g.parameter(x14), g.parameter(k13), Var<double>{}, 1)));
       }},
  };
  for (auto& [name, fn] : cases) {
    CAPTURE(name);
    CHECK(max_coordinate_error(ps, fn) < 1e-6);
  }
}

TEST_CASE("logabsdet matches a cofactor expansion and refuses singular matrices") {
  std::function<double(const std::vector<double>&, std::size_t)> cofactor = [&](const std::vector<double>& m,
                                                                                std::size_t n) -> double {
    if (n == 1) return m[0];
    double det = 0;
    for (std::size_t c = 0; c < n; ++c) {
      std::vector<double> minor;
      for (std::size_t r = 1; r < n; ++r)
        for (std::size_t k = 0; k < n; ++k)
          if (k != c) minor.push_back(m[r * n + k]);
      det += (c % 2 ? -1.0 : 1.0) * m[c] * cofactor(minor, n - 1);
    }
    return det;
  };
  Rng rng(8);
  auto w = random_tensor({6, 6}, rng);
  const double oracle = std::log(std::abs(cofactor(std::vector<double>(w.storage().begin(), w.storage().end()), 6)));
  CHECK(log_abs_det(w) == doctest::Approx(oracle).epsilon(1e-12));
  CHECK_THROWS_AS(log_abs_det(Tensor<double>({2, 2}, {1, 2, 2, 4})), NumericError);
  auto inv = inverse(w);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) {
      double s = 0;
      for (std::size_t k = 0; k < 6; ++k) s += w.at(i, k) * inv.at(k, j);
      CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12).scale(1));
    }
}

TEST_CASE("grad_check") {
  Rng rng(9);
  ParameterStore<double> ps;
  auto& p = ps.add("p", random_tensor({5}, rng));

  SUBCASE("quadratic is exact") {
    auto rep = grad_check(ps, [&](const Graph<double>& g) { return sum_squares(g.parameter(p)); });
    CHECK(rep.max_rel_error < 1e-8);
    CHECK(rep.worst_parameter == "p");
  }
  SUBCASE("a doubled gradient is detected") {
    auto doubled = [&](const Graph<double>& g) {
      auto x = g.parameter(p);
      Tensor<double> v = Tensor<double>::scalar(0);
      for (double e : x.value().values()) v[0] += e * e;
      return g.record(v, {x}, [](Node<double>& self) {
        auto& gx = self.parents[0]->grad_buffer();
        const auto& xv = self.parents[0]->value();
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[0] * 4.0 * xv[i];
      });
    };
    auto rep = grad_check(ps, doubled);
    // |2n - n| / max(|2n|, |n|) with the max-based relative error.
    CHECK(rep.max_rel_error == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("non-finite loss names the parameter") {
    auto bad = [&](const Graph<double>& g) { return sum(log(g.parameter(p))); };
    p.value = Tensor<double>({5}, {1e-7, 1, 1, 1, 1});
    try {
      grad_check(ps, bad);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("'p'") != std::string::npos);
    }
  }
}

TEST_CASE("replay is deterministic") {
  Rng rng(10);
  auto x = random_tensor({3, 16}, rng);
  auto w = random_tensor({3, 3, 3}, rng);
  auto run = [&] {
    Graph<double> g(false);
    return conv1d(tanh(g.constant(x)), g.constant(w), Var<double>{}, 2).value();
  };
  CHECK(run() == run());
}
