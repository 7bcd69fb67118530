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
#include <vector>

#include "wsrglow/ndgrad/graph.hpp"

namespace wsrglow::train {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-8;
};

/// First/second moments in parameter-store order.
template <typename T>
struct AdamState {
  std::vector<ndgrad::Tensor<T>> m;
  std::vector<ndgrad::Tensor<T>> v;
  std::uint64_t step = 0;
  std::uint64_t skipped = 0;
};

template <typename T>
AdamState<T> init_adam(const ndgrad::ParameterStore<T>& params);

/// Bias-corrected Adam update of every trainable parameter from its grad.
/// A non-finite gradient anywhere skips the whole step (returns false) and
/// bumps `skipped`.
template <typename T>
bool adam_step(ndgrad::ParameterStore<T>& params, AdamState<T>& state, const AdamConfig& cfg);

/// L2 norm over all trainable gradients, accumulated in double.
template <typename T>
double grad_norm(const ndgrad::ParameterStore<T>& params);

/// Scales all gradients so their norm is at most max_norm.
template <typename T>
void clip_grad_norm(ndgrad::ParameterStore<T>& params, double max_norm);

}  // namespace wsrglow::train
