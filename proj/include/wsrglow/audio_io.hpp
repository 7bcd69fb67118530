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

#include <cstddef>
#include <filesystem>
#include <vector>

namespace wsrglow::audio {

/// Mono waveform, samples nominally in [-1, 1].
struct Waveform {
  std::vector<float> samples;
  int sample_rate = 0;

  std::size_t size() const { return samples.size(); }
  double duration_seconds() const { return sample_rate > 0 ? double(samples.size()) / sample_rate : 0.0; }
};

enum class SampleFormat { kPcm16, kFloat32 };

struct WavReadInfo {
  int channels = 0;
  SampleFormat format = SampleFormat::kPcm16;
  /// Samples pulled back into [-1, 1] (or replaced because non-finite).
  std::size_t clamped = 0;
};

/// Reads RIFF/WAVE PCM16 or IEEE float32 (plain or WAVE_FORMAT_EXTENSIBLE).
/// Channels are mixed to mono by arithmetic mean; PCM16 v maps to v / 32768.
Waveform read_wav(const std::filesystem::path& path, WavReadInfo* info = nullptr);

/// Writes a mono file with only fmt and data chunks. PCM16 stores
/// round-half-away-from-zero of v * 32767, clamped to the int16 range.
void write_wav(const Waveform& w, const std::filesystem::path& path, SampleFormat format = SampleFormat::kPcm16);

/// Windows of `seg_len` starting at 0, hop, 2*hop, ...; a trailing partial
/// window is dropped.
std::vector<Waveform> segment(const Waveform& w, std::size_t seg_len, std::size_t hop);

}  // namespace wsrglow::audio
