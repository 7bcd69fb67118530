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

#include "wsrglow/dsp/spectrogram.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "wsrglow/common/error.hpp"
#include "wsrglow/dsp/stft.hpp"

namespace wsrglow::dsp {

namespace {
constexpr double kTopDb = 80.0;
}

GrayImage spectrogram_image(const audio::Waveform& w, std::size_t frame, std::size_t hop) {
  if (w.samples.empty()) throw DomainError("spectrogram_image: empty waveform");
  std::vector<float> padded = w.samples;
  padded.resize((padded.size() + hop - 1) / hop * hop, 0.0f);
  const auto spec = stft(padded, frame, hop, Window::kHann);

  std::vector<double> db(spec.frames * spec.bins);
  double peak = -1e300;
  for (std::size_t f = 0; f < spec.frames; ++f) {
    for (std::size_t b = 0; b < spec.bins; ++b) {
      const double v = 20.0 * std::log10(std::abs(spec.at(f, b)) + 1e-10);
      db[f * spec.bins + b] = v;
      peak = std::max(peak, v);
    }
  }
  const double floor_db = peak - kTopDb;
  double lo = 1e300;
  for (auto& v : db) {
    v = std::max(v, floor_db);
    lo = std::min(lo, v);
  }
  const double range = peak - lo;

  GrayImage img;
  img.width = spec.frames;
  img.height = spec.bins;
  img.pixels.assign(img.width * img.height, 0);
  if (range <= 0.0) return img;
  for (std::size_t f = 0; f < spec.frames; ++f) {
    for (std::size_t b = 0; b < spec.bins; ++b) {
      const double norm = (db[f * spec.bins + b] - lo) / range;
      const std::size_t row = spec.bins - 1 - b;
      img.pixels[row * img.width + f] = static_cast<std::uint8_t>(std::lround(norm * 255.0));
    }
  }
  return img;
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot create " + path.string());
  os << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  os.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
  if (!os) throw IoError("write failed: " + path.string());
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::string magic;
  GrayImage img;
  int maxval = 0;
  is >> magic >> img.width >> img.height >> maxval;
  if (magic != "P5" || maxval != 255) throw FormatError(path.string() + ": not an 8-bit P5 graymap");
  is.get();
  img.pixels.resize(img.width * img.height);
  is.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!is) throw FormatError(path.string() + ": truncated graymap");
  return img;
}

}  // namespace wsrglow::dsp
