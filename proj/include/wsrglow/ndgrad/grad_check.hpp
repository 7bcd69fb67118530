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

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wsrglow/ndgrad/graph.hpp"

namespace wsrglow::ndgrad {

struct GradCheckOptions {
  double eps = 1e-5;
  std::uint64_t seed = 0;
  /// Parameters with at most this many elements are also checked one
  /// coordinate at a time. Every parameter always gets directional checks
  /// (a random Rademacher direction and the analytic-gradient direction).
  std::size_t coordinate_limit = 0;
};

struct GradCheckEntry {
  std::string parameter;
  std::string probe;  // "random", "gradient" or "coord <i>"
  double analytic = 0;
  double numeric = 0;
  double rel_error = 0;
};

struct GradCheckReport {
  double max_rel_error = 0;
  std::string worst_parameter;
  std::vector<GradCheckEntry> entries;
};

/// |a - n| / max(|a|, |n|, 1e-12).
double relative_error(double analytic, double numeric);

/// Compares analytic gradients of `loss_fn` against central differences.
/// `loss_fn` must build its loss on the graph it is given using only `params`
/// as trainable state. Throws NumericError naming the parameter when a
/// perturbed loss is non-finite.
GradCheckReport grad_check(ParameterStore<double>& params,
                           const std::function<Var<double>(const Graph<double>&)>& loss_fn,
                           const GradCheckOptions& options = {});

}  // namespace wsrglow::ndgrad
