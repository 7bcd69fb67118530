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
#include <filesystem>
#include <vector>

#include "wsrglow/audio_io.hpp"

namespace wsrglow::dsp {

/// 8-bit grayscale, row-major; row 0 is the highest frequency bin.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

/// Hann-windowed log-magnitude spectrogram (dB, 80 dB range below the peak)
/// normalized to [0, 255]. A flat image (e.g. silence) comes out all zero.
/// The signal is zero-padded to a multiple of hop.
GrayImage spectrogram_image(const audio::Waveform& w, std::size_t frame = 512, std::size_t hop = 128);

/// Binary portable graymap (P5).
void write_pgm(const GrayImage& image, const std::filesystem::path& path);
GrayImage read_pgm(const std::filesystem::path& path);

}  // namespace wsrglow::dsp
