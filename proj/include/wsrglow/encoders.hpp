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

#include <complex>
#include <string>
#include <vector>

#include "wsrglow/audio_io.hpp"
#include "wsrglow/ndgrad/graph.hpp"

// Conditioning features computed from the low-resolution waveform: a
// mu-law code embedding per LR sample (time domain) and a frame-8 STFT
// encoding (raw magnitudes plus embedded quantized phase).

namespace wsrglow::encoders {

inline constexpr std::size_t kGroup = 8;           // LR samples per condition frame, also the STFT frame
inline constexpr std::size_t kLrEmbedDim = 256;
inline constexpr std::size_t kLrCodes = 256;
inline constexpr std::size_t kStftBins = kGroup / 2 + 1;
inline constexpr std::size_t kPhaseEmbedDim = 50;
inline constexpr std::size_t kPhaseBins = 256;
inline constexpr double kImagRange = 8.0;          // |imag STFT| bound for frame 8 and |x| <= 1

enum class StftMode { kPolar, kRectangular };

StftMode parse_stft_mode(const std::string& name);
std::string to_string(StftMode mode);

struct EncoderFlags {
  bool use_lr = true;
  bool use_stft = true;
  bool use_phase = true;
  bool use_magnitude = true;
  StftMode stft_mode = StftMode::kPolar;

  bool lr_active() const { return use_lr; }
  bool magnitude_active() const { return use_stft && use_magnitude; }
  bool phase_active() const { return use_stft && use_phase; }
  bool operator==(const EncoderFlags&) const = default;
};

/// 2048 [lr] + 5 [magnitude] + 250 [phase]. Throws ConfigError when no block
/// is active.
std::size_t condition_channels(const EncoderFlags& flags);

template <typename T>
struct LREncoderParams {
  ndgrad::Parameter<T>* embed_table = nullptr;  // [256, 256]
};

template <typename T>
struct STFTEncoderParams {
  ndgrad::Parameter<T>* phase_embed_table = nullptr;  // [256, 50]
};

/// mu-law code of every sample (encode then quantize_256).
std::vector<int> lr_codes(const audio::Waveform& lr);

/// Phase bin of one STFT value: 256 uniform bins over [-pi, pi); an exactly
/// zero value maps to the bin holding phase 0.
int phase_bin(std::complex<double> v);
/// Imaginary-part bin for rectangular mode: 256 uniform bins over [-8, 8].
int imag_bin(double imag);

/// Non-trainable part of the STFT encoding.
struct StftFeatures {
  std::size_t frames = 0;
  std::vector<double> direct;  // [5, frames], channel-major: |S_b| (polar) or Re S_b (rectangular)
  std::vector<int> codes;      // [frames * 5], frame-major: phase or imag bins
};

/// Throws DomainError unless the length is a multiple of 8.
StftFeatures stft_features(const audio::Waveform& lr, StftMode mode);

/// [2048, L/8]: groups of 8 embedding vectors flattened sample-major.
template <typename T>
ndgrad::Var<T> encode_lr(const ndgrad::Graph<T>& g, const audio::Waveform& lr, const LREncoderParams<T>& params);

/// [255, L/8]: 5 direct channels then 5 x 50 embedded bin codes.
template <typename T>
ndgrad::Var<T> encode_stft(const ndgrad::Graph<T>& g, const audio::Waveform& lr, const STFTEncoderParams<T>& params,
                           StftMode mode = StftMode::kPolar);

/// Condition for the flow. `frames` holds one column per LR frame of 8
/// samples; the HR-rate condition repeats every column `repeat` times
/// (nearest-neighbour), which `expanded()` materialises. Consumers that are
/// linear in the condition can work on `frames` and repeat afterwards.
template <typename T>
struct ConditionEncoding {
  ndgrad::Var<T> frames;  // [C_cond, L_l / 8], blocks ordered [lr | magnitude | phase]
  std::size_t repeat = 1;

  std::size_t channels() const { return frames.dim(0); }
  std::size_t lr_frames() const { return frames.dim(1); }
  std::size_t hr_frames() const { return lr_frames() * repeat; }
  ndgrad::Var<T> expanded() const;
};

/// Throws DomainError unless ratio is 2 or 4 and the LR length is a multiple
/// of 8; ConfigError when every block is disabled or a needed table is null.
template <typename T>
ConditionEncoding<T> build_condition(const ndgrad::Graph<T>& g, const audio::Waveform& lr, int ratio,
                                     const EncoderFlags& flags, const LREncoderParams<T>& lr_params,
                                     const STFTEncoderParams<T>& stft_params);

}  // namespace wsrglow::encoders
