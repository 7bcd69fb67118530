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

#include "wsrglow/train/adam.hpp"

#include <cmath>
#include <iostream>

#include "wsrglow/common/error.hpp"

namespace wsrglow::train {

template <typename T>
AdamState<T> init_adam(const ndgrad::ParameterStore<T>& params) {
  AdamState<T> s;
  for (const auto& p : params) {
    s.m.emplace_back(p.value.shape());
    s.v.emplace_back(p.value.shape());
  }
  return s;
}

template <typename T>
bool adam_step(ndgrad::ParameterStore<T>& params, AdamState<T>& state, const AdamConfig& cfg) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw_shape("adam_step: optimizer state does not match the parameter store");
  }
  std::size_t idx = 0;
  for (const auto& p : params) {
    if (state.m[idx].shape() != p.value.shape()) throw_shape("adam_step: moment shape mismatch for " + p.name);
    if (p.trainable) {
      for (T g : p.grad.values()) {
        if (!std::isfinite(g)) {
          ++state.skipped;
          std::cerr << "warning: non-finite gradient in " << p.name << ", skipping optimizer step ("
                    << state.skipped << " skipped so far)\n";
          return false;
        }
      }
    }
    ++idx;
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  idx = 0;
  for (auto& p : params) {
    auto& m = state.m[idx].storage();
    auto& v = state.v[idx].storage();
    ++idx;
    if (!p.trainable) continue;
    auto& w = p.value.storage();
    const auto& g = p.grad.storage();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g[i];
      const double mi = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
      const double vi = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double m_hat = mi / c1;
      const double v_hat = vi / c2;
      w[i] = static_cast<T>(w[i] - cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps));
    }
  }
  return true;
}

template <typename T>
double grad_norm(const ndgrad::ParameterStore<T>& params) {
  double s = 0.0;
  for (const auto& p : params) {
    if (!p.trainable) continue;
    for (T g : p.grad.values()) s += static_cast<double>(g) * g;
  }
  return std::sqrt(s);
}

template <typename T>
void clip_grad_norm(ndgrad::ParameterStore<T>& params, double max_norm) {
  const double norm = grad_norm(params);
  if (!(norm > max_norm) || !std::isfinite(norm)) return;
  const T factor = static_cast<T>(max_norm / norm);
  for (auto& p : params) {
    for (auto& g : p.grad.storage()) g *= factor;
  }
}

template AdamState<float> init_adam(const ndgrad::ParameterStore<float>&);
template AdamState<double> init_adam(const ndgrad::ParameterStore<double>&);
template bool adam_step(ndgrad::ParameterStore<float>&, AdamState<float>&, const AdamConfig&);
template bool adam_step(ndgrad::ParameterStore<double>&, AdamState<double>&, const AdamConfig&);
template double grad_norm(const ndgrad::ParameterStore<float>&);
template double grad_norm(const ndgrad::ParameterStore<double>&);
template void clip_grad_norm(ndgrad::ParameterStore<float>&, double);
template void clip_grad_norm(ndgrad::ParameterStore<double>&, double);

}  // namespace wsrglow::train
