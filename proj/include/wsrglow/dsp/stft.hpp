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
#include <span>
#include <vector>

#include "wsrglow/audio_io.hpp"

namespace wsrglow::dsp {

enum class Window { kRectangular, kHann };

/// Frames x one-sided bins (frame_size / 2 + 1), row-major by frame.
struct ComplexSpectrum {
  std::vector<std::complex<double>> values;
  std::size_t frames = 0;
  std::size_t bins = 0;
  std::size_t frame_size = 0;
  std::size_t hop = 0;

  const std::complex<double>& at(std::size_t frame, std::size_t bin) const { return values[frame * bins + bin]; }
};

/// Frame f starts at sample f * hop; there are len / hop frames and samples
/// past the end read as zero. Throws DomainError unless frame_size is a power
/// of two and the length is a multiple of hop.
ComplexSpectrum stft(std::span<const float> x, std::size_t frame_size, std::size_t hop,
                     Window window = Window::kRectangular);
ComplexSpectrum stft(const audio::Waveform& w, std::size_t frame_size, std::size_t hop,
                     Window window = Window::kRectangular);

}  // namespace wsrglow::dsp
