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

#include <span>
#include <string>

#include "wsrglow/audio_io.hpp"

namespace wsrglow::dsp {

/// kPaper: 10 log10(|y|^2 / |x - y|^2), approximation energy on top.
/// kClassic: 10 log10(|x|^2 / |x - y|^2), reference energy on top.
enum class SnrConvention { kPaper, kClassic };

SnrConvention parse_snr_convention(const std::string& name);
std::string to_string(SnrConvention c);

inline constexpr std::size_t kLsdFrame = 2048;
inline constexpr double kLsdFloor = 1e-10;

/// SNR in dB of approximation `y` against reference `x`. Returns +inf when
/// x == y and -inf when the numerator energy is zero but x != y.
/// Throws ShapeError on length or rate mismatch.
double snr(const audio::Waveform& x_ref, const audio::Waveform& y_approx,
           SnrConvention convention = SnrConvention::kPaper);
double snr(std::span<const float> x_ref, std::span<const float> y_approx,
           SnrConvention convention = SnrConvention::kPaper);

/// Mean over 2048-sample rectangular frames (hop 2048) of the RMS difference
/// of log10(|S|^2 + 1e-10) over one-sided bins. Lengths must match, be at
/// least 2048 and a multiple of 2048.
double lsd(const audio::Waveform& x_ref, const audio::Waveform& y_approx);
double lsd(std::span<const float> x_ref, std::span<const float> y_approx);

/// Zero-pads to the next multiple of 2048 (at least one frame).
audio::Waveform pad_for_lsd(const audio::Waveform& w);

/// "inf" / "-inf" for the sentinels, fixed-point otherwise.
std::string format_metric(double v);

}  // namespace wsrglow::dsp
