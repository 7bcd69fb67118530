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

#include "wsrglow/ndgrad/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "wsrglow/common/error.hpp"
#include "wsrglow/common/rng.hpp"

namespace wsrglow::ndgrad {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
  return std::abs(analytic - numeric) / denom;
}

namespace {

double evaluate(const std::function<Var<double>(const Graph<double>&)>& loss_fn) {
  Graph<double> g(false);
  return loss_fn(g).value().item();
}

// Central difference of the loss along `dir` for parameter `p`.
double directional_difference(Parameter<double>& p, const std::vector<double>& dir, double eps,
                              const std::function<Var<double>(const Graph<double>&)>& loss_fn) {
  const auto saved = p.value.storage();
  auto& v = p.value.storage();
  double plus = 0, minus = 0;
  try {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = saved[i] + eps * dir[i];
    plus = evaluate(loss_fn);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = saved[i] - eps * dir[i];
    minus = evaluate(loss_fn);
  } catch (const Error& e) {
    v = saved;
    throw NumericError("grad_check: loss failed when perturbing parameter '" + p.name + "': " + e.what());
  }
  v = saved;
  if (!std::isfinite(plus) || !std::isfinite(minus)) {
    throw NumericError("grad_check: non-finite loss when perturbing parameter '" + p.name + "'");
  }
  return (plus - minus) / (2.0 * eps);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

GradCheckReport grad_check(ParameterStore<double>& params,
                           const std::function<Var<double>(const Graph<double>&)>& loss_fn,
                           const GradCheckOptions& options) {
  params.zero_grad();
  {
    Graph<double> g(true);
    const Var<double> loss = loss_fn(g);
    if (!std::isfinite(loss.value().item())) throw NumericError("grad_check: loss is not finite");
    g.backward(loss);
  }

  Rng rng(options.seed);
  GradCheckReport report;
  auto record = [&](const Parameter<double>& p, std::string probe, double analytic, double numeric) {
    GradCheckEntry e{p.name, std::move(probe), analytic, numeric, relative_error(analytic, numeric)};
    if (!std::isfinite(analytic)) {
      throw NumericError("grad_check: non-finite analytic gradient for parameter '" + p.name + "'");
    }
    if (report.entries.empty() || e.rel_error > report.max_rel_error) {
      report.max_rel_error = e.rel_error;
      report.worst_parameter = p.name;
    }
    report.entries.push_back(std::move(e));
  };

  for (auto& p : params) {
    if (!p.trainable) continue;
    const std::size_t n = p.value.size();
    const std::vector<double> grad(p.grad.storage().begin(), p.grad.storage().end());

    std::vector<double> dir(n);
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(n));
    for (auto& d : dir) d = (rng.next_u64() & 1U) ? inv_sqrt : -inv_sqrt;
    record(p, "random", dot(grad, dir), directional_difference(p, dir, options.eps, loss_fn));

    const double norm = std::sqrt(dot(grad, grad));
    if (norm > 0) {
      for (std::size_t i = 0; i < n; ++i) dir[i] = grad[i] / norm;
      record(p, "gradient", norm, directional_difference(p, dir, options.eps, loss_fn));
    }

    if (n <= options.coordinate_limit) {
      for (std::size_t i = 0; i < n; ++i) {
        std::fill(dir.begin(), dir.end(), 0.0);
        dir[i] = 1.0;
        record(p, "coord " + std::to_string(i), grad[i], directional_difference(p, dir, options.eps, loss_fn));
      }
    }
  }
  return report;
}

}  // namespace wsrglow::ndgrad
