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

#include <vector>

#include "wsrglow/audio_io.hpp"

namespace wsrglow::dsp {

struct ResampleDesign {
  int up = 1;    // p
  int down = 1;  // q
  double kaiser_beta = 14.0;
  int taps_per_phase = 32;
  /// Prototype low-pass at the upsampled rate, length taps_per_phase * max(p, q) + 1,
  /// scaled by p.
  std::vector<double> taps;
};

/// Designs the Kaiser-windowed sinc prototype for target/source rates.
/// Throws DomainError unless the reduced ratio has p, q <= 64.
ResampleDesign design_resampler(int source_rate, int target_rate);

/// Polyphase rational resampling; output length floor(len * p / q), delay
/// compensated so output sample m sits at input time m * q / p. Equal rates
/// return the input unchanged.
audio::Waveform resample(const audio::Waveform& w, int target_rate);

}  // namespace wsrglow::dsp
