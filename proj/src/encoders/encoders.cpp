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

#include "wsrglow/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wsrglow/common/error.hpp"
#include "wsrglow/dsp/mulaw.hpp"
#include "wsrglow/dsp/stft.hpp"
#include "wsrglow/ndgrad/ops.hpp"

namespace wsrglow::encoders {

using ndgrad::Graph;
using ndgrad::Tensor;
using ndgrad::Var;

StftMode parse_stft_mode(const std::string& name) {
  if (name == "polar") return StftMode::kPolar;
  if (name == "rectangular") return StftMode::kRectangular;
  throw ConfigError("stft_mode must be 'polar' or 'rectangular', got '" + name + "'");
}

std::string to_string(StftMode mode) { return mode == StftMode::kPolar ? "polar" : "rectangular"; }

std::size_t condition_channels(const EncoderFlags& flags) {
  const std::size_t c = (flags.lr_active() ? kGroup * kLrEmbedDim : 0) + (flags.magnitude_active() ? kStftBins : 0) +
                        (flags.phase_active() ? kStftBins * kPhaseEmbedDim : 0);
  if (c == 0) throw ConfigError("every condition block is disabled; an unconditional model is not supported");
  return c;
}

namespace {

void require_group_multiple(const audio::Waveform& lr) {
  if (lr.samples.empty() || lr.samples.size() % kGroup != 0) {
    throw DomainError("LR length " + std::to_string(lr.samples.size()) +
                      " must be a positive multiple of 8 (pad before encoding)");
  }
}

int uniform_bin(double v, double lo, double hi, std::size_t bins) {
  const double pos = (v - lo) / (hi - lo) * static_cast<double>(bins);
  const auto b = static_cast<long long>(std::floor(pos));
  return static_cast<int>(std::clamp<long long>(b, 0, static_cast<long long>(bins) - 1));
}

template <typename T>
Var<T> embed_frames(const Graph<T>& g, ndgrad::Parameter<T>& table, const std::vector<int>& codes,
                    std::size_t per_frame) {
  const std::size_t dim = table.value.dim(1);
  const std::size_t frames = codes.size() / per_frame;
  Var<T> rows = ndgrad::embedding_lookup(g.parameter(table), std::span<const int>(codes));
  return ndgrad::transpose(ndgrad::reshape(rows, {frames, per_frame * dim}));
}

template <typename T>
Var<T> direct_block(const Graph<T>& g, const StftFeatures& f) {
  Tensor<T> t({kStftBins, f.frames});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(f.direct[i]);
  return g.constant(std::move(t));
}

template <typename T>
ndgrad::Parameter<T>& require_table(ndgrad::Parameter<T>* p, const char* what) {
  if (!p) throw ConfigError(std::string("missing embedding table for ") + what);
  return *p;
}

}  // namespace

std::vector<int> lr_codes(const audio::Waveform& lr) {
  std::vector<int> codes(lr.samples.size());
  // Resampled audio can overshoot the unit range slightly; codes saturate.
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const double x = std::clamp(static_cast<double>(lr.samples[i]), -1.0, 1.0);
    codes[i] = dsp::quantize_256(dsp::mulaw_encode(x));
  }
  return codes;
}

int phase_bin(std::complex<double> v) {
  if (v.real() == 0.0 && v.imag() == 0.0) return static_cast<int>(kPhaseBins / 2);
  const double phase = std::atan2(v.imag(), v.real());
  const double pos = (phase + std::numbers::pi) / (2.0 * std::numbers::pi) * static_cast<double>(kPhaseBins);
  // phase == pi is the same angle as -pi, which opens bin 0.
  return static_cast<int>(static_cast<long long>(std::floor(pos)) % static_cast<long long>(kPhaseBins));
}

int imag_bin(double imag) { return uniform_bin(imag, -kImagRange, kImagRange, kPhaseBins); }

StftFeatures stft_features(const audio::Waveform& lr, StftMode mode) {
  require_group_multiple(lr);
  const auto spec = dsp::stft(lr, kGroup, kGroup, dsp::Window::kRectangular);
  StftFeatures f;
  f.frames = spec.frames;
  f.direct.resize(kStftBins * f.frames);
  f.codes.resize(f.frames * kStftBins);
  for (std::size_t t = 0; t < f.frames; ++t) {
    for (std::size_t b = 0; b < kStftBins; ++b) {
      const auto v = spec.at(t, b);
      if (mode == StftMode::kPolar) {
        f.direct[b * f.frames + t] = std::abs(v);
        f.codes[t * kStftBins + b] = phase_bin(v);
      } else {
        f.direct[b * f.frames + t] = v.real();
        f.codes[t * kStftBins + b] = imag_bin(v.imag());
      }
    }
  }
  return f;
}

template <typename T>
Var<T> encode_lr(const Graph<T>& g, const audio::Waveform& lr, const LREncoderParams<T>& params) {
  require_group_multiple(lr);
  return embed_frames(g, require_table(params.embed_table, "the LR encoder"), lr_codes(lr), kGroup);
}

template <typename T>
Var<T> encode_stft(const Graph<T>& g, const audio::Waveform& lr, const STFTEncoderParams<T>& params, StftMode mode) {
  const StftFeatures f = stft_features(lr, mode);
  auto& table = require_table(params.phase_embed_table, "the STFT encoder");
  return ndgrad::concat_rows<T>({direct_block(g, f), embed_frames(g, table, f.codes, kStftBins)});
}

template <typename T>
Var<T> ConditionEncoding<T>::expanded() const {
  return repeat == 1 ? frames : ndgrad::repeat_cols(frames, repeat);
}

template <typename T>
ConditionEncoding<T> build_condition(const Graph<T>& g, const audio::Waveform& lr, int ratio,
                                     const EncoderFlags& flags, const LREncoderParams<T>& lr_params,
                                     const STFTEncoderParams<T>& stft_params) {
  if (ratio != 2 && ratio != 4) throw DomainError("upscale ratio must be 2 or 4, got " + std::to_string(ratio));
  condition_channels(flags);
  require_group_multiple(lr);

  std::vector<Var<T>> blocks;
  if (flags.lr_active()) blocks.push_back(encode_lr(g, lr, lr_params));
  if (flags.magnitude_active() || flags.phase_active()) {
    const StftFeatures f = stft_features(lr, flags.stft_mode);
    if (flags.magnitude_active()) blocks.push_back(direct_block(g, f));
    if (flags.phase_active()) {
      blocks.push_back(embed_frames(g, require_table(stft_params.phase_embed_table, "the STFT encoder"), f.codes,
                                    kStftBins));
    }
  }
  ConditionEncoding<T> c;
  c.frames = blocks.size() == 1 ? blocks.front() : ndgrad::concat_rows(blocks);
  c.repeat = static_cast<std::size_t>(ratio);
  return c;
}

template struct ConditionEncoding<float>;
template struct ConditionEncoding<double>;
template Var<float> encode_lr(const Graph<float>&, const audio::Waveform&, const LREncoderParams<float>&);
template Var<double> encode_lr(const Graph<double>&, const audio::Waveform&, const LREncoderParams<double>&);
template Var<float> encode_stft(const Graph<float>&, const audio::Waveform&, const STFTEncoderParams<float>&, StftMode);
template Var<double> encode_stft(const Graph<double>&, const audio::Waveform&, const STFTEncoderParams<double>&,
                                 StftMode);
template ConditionEncoding<float> build_condition(const Graph<float>&, const audio::Waveform&, int,
                                                  const EncoderFlags&, const LREncoderParams<float>&,
                                                  const STFTEncoderParams<float>&);
template ConditionEncoding<double> build_condition(const Graph<double>&, const audio::Waveform&, int,
                                                   const EncoderFlags&, const LREncoderParams<double>&,
                                                   const STFTEncoderParams<double>&);

}  // namespace wsrglow::encoders
