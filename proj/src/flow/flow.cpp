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

#include "wsrglow/flow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wsrglow/common/error.hpp"
#include "wsrglow/common/rng.hpp"
#include "wsrglow/ndgrad/ops.hpp"

namespace wsrglow::flow {

namespace ops = ndgrad;

template <typename T>
Var<T> squeeze(const Var<T>& x, std::size_t group) {
  if (x.shape().size() != 1 || x.dim(0) % group != 0) {
    throw_shape("squeeze: length must be a multiple of " + std::to_string(group) + ", got " +
                ndgrad::to_string(x.shape()));
  }
  return ops::transpose(ops::reshape(x, {x.dim(0) / group, group}));
}

template <typename T>
Var<T> unsqueeze(const Var<T>& z) {
  if (z.shape().size() != 2) throw_shape("unsqueeze: expected [group, T], got " + ndgrad::to_string(z.shape()));
  return ops::reshape(ops::transpose(z), {z.size()});
}

template <typename T>
FlowStep<T> invconv_analyze(const Var<T>& h, const Var<T>& mix) {
  Var<T> out = ops::channel_mix(h, mix);
  return {out, ops::scale(ops::logabsdet(mix), static_cast<T>(h.dim(1)))};
}

template <typename T>
Var<T> invconv_generate(const Var<T>& h, const Var<T>& mix) {
  return ops::channel_mix(h, h.graph().constant(ndgrad::inverse(mix.value())));
}

template <typename T>
AffineTerms<T> wavenet_T(const Var<T>& x_a, const ConditionEncoding<T>& cond, const WaveNetParams<T>& p) {
  const auto& g = x_a.graph();
  if (x_a.shape().size() != 2 || x_a.dim(1) != cond.hr_frames()) {
    throw_shape("wavenet_T: x_a " + ndgrad::to_string(x_a.shape()) + " vs condition with " +
                std::to_string(cond.hr_frames()) + " frames");
  }
  if (cond.channels() != p.layers.front().cond_weight->value.dim(1)) {
    throw_shape("wavenet_T: condition has " + std::to_string(cond.channels()) + " channels, model expects " +
                std::to_string(p.layers.front().cond_weight->value.dim(1)));
  }
  const std::size_t c = p.start_weight->value.dim(0);
  Var<T> h = ops::conv1d(x_a, g.parameter(*p.start_weight), g.parameter(*p.start_bias));
  Var<T> skip;
  for (const auto& layer : p.layers) {
    Var<T> u = ops::conv1d(h, g.parameter(*layer.in_weight), g.parameter(*layer.in_bias), layer.dilation);
    Var<T> proj = ops::conv1d(cond.frames, g.parameter(*layer.cond_weight), g.parameter(*layer.cond_bias));
    u = ops::add(u, cond.repeat == 1 ? proj : ops::repeat_cols(proj, cond.repeat));
    Var<T> gate = ops::mul(ops::tanh(ops::slice_rows(u, 0, c)), ops::sigmoid(ops::slice_rows(u, c, 2 * c)));
    if (layer.res_weight) {
      h = ops::add(h, ops::conv1d(gate, g.parameter(*layer.res_weight), g.parameter(*layer.res_bias)));
    }
    Var<T> s = ops::conv1d(gate, g.parameter(*layer.skip_weight), g.parameter(*layer.skip_bias));
    skip = skip.valid() ? ops::add(skip, s) : s;
  }
  Var<T> out = ops::conv1d(skip, g.parameter(*p.end_weight), g.parameter(*p.end_bias));
  const std::size_t half = out.dim(0) / 2;
  return {ops::slice_rows(out, 0, half), ops::slice_rows(out, half, 2 * half)};
}

template <typename T>
FlowStep<T> coupling_analyze(const Var<T>& h, const ConditionEncoding<T>& cond, const WaveNetParams<T>& p,
                             const AnalyzeOptions& options) {
  if (h.shape().size() != 2 || h.dim(0) % 2 != 0) {
    throw_shape("coupling: channel count must be even, got " + ndgrad::to_string(h.shape()));
  }
  const std::size_t half = h.dim(0) / 2;
  Var<T> x_a = ops::slice_rows(h, 0, half);
  Var<T> x_b = ops::slice_rows(h, half, 2 * half);
  auto [log_s, t] = wavenet_T(x_a, cond, p);
  Var<T> x_b_new = ops::add(ops::mul(ops::exp(log_s), x_b), t);
  Var<T> log_det = ops::sum(log_s);
  if (options.flip_coupling_log_det) log_det = ops::neg(log_det);
  return {ops::concat_rows<T>({x_a, x_b_new}), log_det};
}

template <typename T>
Var<T> coupling_generate(const Var<T>& h, const ConditionEncoding<T>& cond, const WaveNetParams<T>& p) {
  if (h.shape().size() != 2 || h.dim(0) % 2 != 0) {
    throw_shape("coupling: channel count must be even, got " + ndgrad::to_string(h.shape()));
  }
  const std::size_t half = h.dim(0) / 2;
  Var<T> x_a = ops::slice_rows(h, 0, half);
  Var<T> x_b_new = ops::slice_rows(h, half, 2 * half);
  auto [log_s, t] = wavenet_T(x_a, cond, p);
  Var<T> x_b = ops::mul(ops::sub(x_b_new, t), ops::exp(ops::neg(log_s)));
  return ops::concat_rows<T>({x_a, x_b});
}

template <typename T>
FlowResult<T> analyze(const Var<T>& x_hr, const ConditionEncoding<T>& cond, const Model<T>& model,
                      const AnalyzeOptions& options) {
  const auto& g = x_hr.graph();
  const auto& cfg = model.config();
  Var<T> h = squeeze(x_hr, cfg.group);
  if (h.dim(1) != cond.hr_frames()) {
    throw_shape("analyze: signal has " + std::to_string(h.dim(1)) + " frames, condition " +
                std::to_string(cond.hr_frames()));
  }
  FlowResult<T> r;
  std::vector<Var<T>> contributions;
  for (const auto& layer : model.layers()) {
    auto mixed = invconv_analyze(h, g.parameter(*layer.mix));
    auto coupled = coupling_analyze(mixed.out, cond, layer.wn, options);
    h = coupled.out;
    const double lm = mixed.log_det.value().item();
    const double lc = coupled.log_det.value().item();
    r.step_log_dets.push_back(lm);
    r.step_log_dets.push_back(lc);
    r.mix_log_det += lm;
    r.coupling_log_det += lc;
    contributions.push_back(mixed.log_det);
    contributions.push_back(coupled.log_det);
  }
  Var<T> log_det = contributions.front();
  for (std::size_t i = 1; i < contributions.size(); ++i) log_det = ops::add(log_det, contributions[i]);

  const double sigma = cfg.base_sigma;
  const double d = static_cast<double>(h.size());
  const T constant = static_cast<T>(d * std::log(sigma) + 0.5 * d * std::log(2.0 * std::numbers::pi));
  Var<T> energy = ops::scale(ops::sum_squares(h), static_cast<T>(1.0 / (2.0 * sigma * sigma)));
  Var<T> nll = ops::sub(ops::add(energy, g.constant(Tensor<T>::scalar(constant))), log_det);
  r.z = h;
  r.log_det = log_det;
  r.nll = nll;
  r.nll_per_dim = ops::scale(nll, static_cast<T>(1.0 / d));
  return r;
}

template <typename T>
FlowResult<T> analyze(const Graph<T>& g, const audio::Waveform& x_hr, const ConditionEncoding<T>& cond,
                      const Model<T>& model, const AnalyzeOptions& options) {
  Tensor<T> x({x_hr.samples.size()});
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<T>(x_hr.samples[i]);
  return analyze(g.constant(std::move(x)), cond, model, options);
}

template <typename T>
Var<T> generate(const Var<T>& z, const ConditionEncoding<T>& cond, const Model<T>& model) {
  const auto& g = z.graph();
  if (z.shape().size() != 2 || z.dim(0) != model.config().group || z.dim(1) != cond.hr_frames()) {
    throw_shape("generate: latent " + ndgrad::to_string(z.shape()) + " does not match condition with " +
                std::to_string(cond.hr_frames()) + " frames");
  }
  Var<T> h = z;
  const auto& layers = model.layers();
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    h = coupling_generate(h, cond, it->wn);
    h = invconv_generate(h, g.parameter(*it->mix));
  }
  return h;
}

template <typename T>
Synthesis<T> synthesize(const ConditionEncoding<T>& cond, const Model<T>& model, const SampleConfig& sc,
                        int lr_rate) {
  if (!std::isfinite(sc.temperature) || sc.temperature < 0.0) {
    throw DomainError("temperature must be finite and non-negative");
  }
  const auto& g = cond.frames.graph();
  Rng rng(sc.seed);
  const double stddev = std::sqrt(sc.temperature) * model.config().base_sigma;
  Tensor<T> z({model.config().group, cond.hr_frames()});
  if (stddev > 0.0) {
    for (auto& v : z.storage()) v = static_cast<T>(stddev * rng.normal());
  }
  Var<T> x = unsqueeze(generate(g.constant(z), cond, model));
  Synthesis<T> out;
  out.z = std::move(z);
  out.audio.sample_rate = static_cast<int>(cond.repeat) * lr_rate;
  out.audio.samples.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.audio.samples[i] = static_cast<float>(std::clamp<T>(x.value()[i], T(-1), T(1)));
  }
  return out;
}

template <typename T>
ConditionEncoding<T> condition_for(const Graph<T>& g, const audio::Waveform& lr, const Model<T>& model, int ratio) {
  return encoders::build_condition(g, lr, ratio, model.flags(), model.lr_encoder(), model.stft_encoder());
}

template <typename T>
audio::Waveform super_resolve(const audio::Waveform& lr, const Model<T>& model, int ratio, const SampleConfig& sc) {
  if (lr.samples.empty()) throw DomainError("super_resolve: empty input");
  audio::Waveform padded = lr;
  const std::size_t group = encoders::kGroup;
  padded.samples.resize((lr.samples.size() + group - 1) / group * group, 0.0f);
  Graph<T> g(false);
  auto cond = condition_for(g, padded, model, ratio);
  auto syn = synthesize(cond, model, sc, lr.sample_rate);
  syn.audio.samples.resize(lr.samples.size() * static_cast<std::size_t>(ratio));
  return syn.audio;
}

#define WSRGLOW_INSTANTIATE(T)                                                                                 \
  template Var<T> squeeze(const Var<T>&, std::size_t);                                                        \
  template Var<T> unsqueeze(const Var<T>&);                                                                   \
  template FlowStep<T> invconv_analyze(const Var<T>&, const Var<T>&);                                         \
  template Var<T> invconv_generate(const Var<T>&, const Var<T>&);                                             \
  template AffineTerms<T> wavenet_T(const Var<T>&, const ConditionEncoding<T>&, const WaveNetParams<T>&);      \
  template FlowStep<T> coupling_analyze(const Var<T>&, const ConditionEncoding<T>&, const WaveNetParams<T>&,   \
                                        const AnalyzeOptions&);                                               \
  template Var<T> coupling_generate(const Var<T>&, const ConditionEncoding<T>&, const WaveNetParams<T>&);      \
  template FlowResult<T> analyze(const Var<T>&, const ConditionEncoding<T>&, const Model<T>&,                  \
                                 const AnalyzeOptions&);                                                      \
  template FlowResult<T> analyze(const Graph<T>&, const audio::Waveform&, const ConditionEncoding<T>&,         \
                                 const Model<T>&, const AnalyzeOptions&);                                     \
  template Var<T> generate(const Var<T>&, const ConditionEncoding<T>&, const Model<T>&);                       \
  template Synthesis<T> synthesize(const ConditionEncoding<T>&, const Model<T>&, const SampleConfig&, int);    \
  template ConditionEncoding<T> condition_for(const Graph<T>&, const audio::Waveform&, const Model<T>&, int);  \
  template audio::Waveform super_resolve(const audio::Waveform&, const Model<T>&, int, const SampleConfig&);

WSRGLOW_INSTANTIATE(float)
WSRGLOW_INSTANTIATE(double)

#undef WSRGLOW_INSTANTIATE

}  // namespace wsrglow::flow
