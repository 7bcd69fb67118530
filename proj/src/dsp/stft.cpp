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

#include "wsrglow/dsp/stft.hpp"

#include <cmath>
#include <numbers>

#include "wsrglow/common/error.hpp"
#include "wsrglow/dsp/fft.hpp"

namespace wsrglow::dsp {

ComplexSpectrum stft(std::span<const float> x, std::size_t frame_size, std::size_t hop, Window window) {
  if (!is_power_of_two(frame_size)) throw DomainError("stft: frame size must be a power of two");
  if (hop == 0) throw DomainError("stft: hop must be positive");
  if (x.size() % hop != 0) {
    throw DomainError("stft: signal length " + std::to_string(x.size()) + " is not a multiple of hop " +
                      std::to_string(hop) + "; pad before calling");
  }
  std::vector<double> win(frame_size, 1.0);
  if (window == Window::kHann) {
    for (std::size_t n = 0; n < frame_size; ++n) {
      win[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) / static_cast<double>(frame_size));
    }
  }
  ComplexSpectrum s;
  s.frames = x.size() / hop;
  s.bins = frame_size / 2 + 1;
  s.frame_size = frame_size;
  s.hop = hop;
  s.values.resize(s.frames * s.bins);
  std::vector<std::complex<double>> buf(frame_size);
  for (std::size_t f = 0; f < s.frames; ++f) {
    for (std::size_t n = 0; n < frame_size; ++n) {
      const std::size_t i = f * hop + n;
      buf[n] = i < x.size() ? static_cast<double>(x[i]) * win[n] : 0.0;
    }
    fft_inplace(buf);
    std::copy_n(buf.begin(), s.bins, s.values.begin() + static_cast<std::ptrdiff_t>(f * s.bins));
  }
  return s;
}

ComplexSpectrum stft(const audio::Waveform& w, std::size_t frame_size, std::size_t hop, Window window) {
  return stft(std::span<const float>(w.samples), frame_size, hop, window);
}

}  // namespace wsrglow::dsp
