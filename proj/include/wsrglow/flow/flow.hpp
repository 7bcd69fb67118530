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

#include "wsrglow/audio_io.hpp"
#include "wsrglow/encoders.hpp"
#include "wsrglow/flow/model.hpp"
#include "wsrglow/ndgrad/graph.hpp"

namespace wsrglow::flow {

using encoders::ConditionEncoding;
using ndgrad::Graph;
using ndgrad::Tensor;
using ndgrad::Var;

/// [L] -> [group, L / group] with out[c, t] = x[group * t + c]. Volume
/// preserving. Throws ShapeError unless L is a multiple of group.
template <typename T>
Var<T> squeeze(const Var<T>& x, std::size_t group = 8);
template <typename T>
Var<T> unsqueeze(const Var<T>& z);

template <typename T>
struct FlowStep {
  Var<T> out;
  Var<T> log_det;  // scalar contribution of this step
};

/// out = W h per frame; log-det contribution T log|det W|.
template <typename T>
FlowStep<T> invconv_analyze(const Var<T>& h, const Var<T>& mix);
/// Applies W^{-1} per frame. Not differentiated through.
template <typename T>
Var<T> invconv_generate(const Var<T>& h, const Var<T>& mix);

template <typename T>
struct AffineTerms {
  Var<T> log_s;  // [group/2, T]
  Var<T> t;      // [group/2, T]
};

/// Conditioner network; the condition projection runs at the LR frame rate
/// and is repeated to the HR frame rate.
template <typename T>
AffineTerms<T> wavenet_T(const Var<T>& x_a, const ConditionEncoding<T>& cond, const WaveNetParams<T>& params);

struct AnalyzeOptions {
  /// Test hook: negate every coupling log-det contribution.
  bool flip_coupling_log_det = false;
};

/// x_b' = exp(log_s) * x_b + t on the upper half; log-det sum(log_s).
template <typename T>
FlowStep<T> coupling_analyze(const Var<T>& h, const ConditionEncoding<T>& cond, const WaveNetParams<T>& params,
                             const AnalyzeOptions& options = {});
/// x_b = (x_b' - t) * exp(-log_s), with (log_s, t) recomputed from x_a.
template <typename T>
Var<T> coupling_generate(const Var<T>& h, const ConditionEncoding<T>& cond, const WaveNetParams<T>& params);

template <typename T>
struct FlowResult {
  Var<T> z;            // [group, T]
  Var<T> log_det;      // scalar, all contributions
  Var<T> nll;          // scalar, -log p(x) in nats
  Var<T> nll_per_dim;  // nll / D, D = group * T
  /// Per-step contributions in application order (mix, coupling, mix, ...).
  std::vector<double> step_log_dets;
  double coupling_log_det = 0;
  double mix_log_det = 0;
};

/// Squeeze then, per glow layer, invconv_analyze and coupling_analyze.
/// -log p(x) = sum z^2 / (2 sigma^2) + D log sigma + D/2 log 2 pi - log_det.
template <typename T>
FlowResult<T> analyze(const Var<T>& x_hr, const ConditionEncoding<T>& cond, const Model<T>& model,
                      const AnalyzeOptions& options = {});
template <typename T>
FlowResult<T> analyze(const Graph<T>& g, const audio::Waveform& x_hr, const ConditionEncoding<T>& cond,
                      const Model<T>& model, const AnalyzeOptions& options = {});

/// Exact inverse of analyze's transform: z [group, T] -> squeezed x.
template <typename T>
Var<T> generate(const Var<T>& z, const ConditionEncoding<T>& cond, const Model<T>& model);

struct SampleConfig {
  /// Variance of the base Gaussian (relative to base_sigma^2).
  double temperature = 1.0;
  std::uint64_t seed = 0;
};

template <typename T>
struct Synthesis {
  audio::Waveform audio;  // clamped to [-1, 1]
  Tensor<T> z;
};

/// Draws z ~ N(0, temperature * sigma^2) and runs the inverse flow. The
/// output rate is cond.repeat * lr_rate.
template <typename T>
Synthesis<T> synthesize(const ConditionEncoding<T>& cond, const Model<T>& model, const SampleConfig& sc, int lr_rate);

/// Pads LR audio to a multiple of 8, encodes, synthesizes and trims the
/// result to ratio * original length.
template <typename T>
audio::Waveform super_resolve(const audio::Waveform& lr, const Model<T>& model, int ratio, const SampleConfig& sc);

/// Builds the condition for a model from LR audio (length multiple of 8).
template <typename T>
ConditionEncoding<T> condition_for(const Graph<T>& g, const audio::Waveform& lr, const Model<T>& model, int ratio);

}  // namespace wsrglow::flow
