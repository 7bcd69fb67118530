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

#include "wsrglow/dsp/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "wsrglow/common/error.hpp"
#include "wsrglow/dsp/stft.hpp"

namespace wsrglow::dsp {

SnrConvention parse_snr_convention(const std::string& name) {
  if (name == "paper") return SnrConvention::kPaper;
  if (name == "classic") return SnrConvention::kClassic;
  throw ConfigError("snr_convention must be 'paper' or 'classic', got '" + name + "'");
}

std::string to_string(SnrConvention c) { return c == SnrConvention::kPaper ? "paper" : "classic"; }

double snr(std::span<const float> x, std::span<const float> y, SnrConvention convention) {
  if (x.size() != y.size()) {
    throw_shape("snr: reference has " + std::to_string(x.size()) + " samples, approximation " +
                std::to_string(y.size()));
  }
  double num = 0.0, err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double top = convention == SnrConvention::kPaper ? y[i] : x[i];
    const double d = static_cast<double>(x[i]) - static_cast<double>(y[i]);
    num += top * top;
    err += d * d;
  }
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  if (num == 0.0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(num / err);
}

double snr(const audio::Waveform& x_ref, const audio::Waveform& y_approx, SnrConvention convention) {
  if (x_ref.sample_rate != y_approx.sample_rate) throw_shape("snr: sample rates differ");
  return snr(std::span<const float>(x_ref.samples), std::span<const float>(y_approx.samples), convention);
}

double lsd(std::span<const float> x, std::span<const float> y) {
  if (x.size() != y.size()) {
    throw_shape("lsd: reference has " + std::to_string(x.size()) + " samples, approximation " +
                std::to_string(y.size()));
  }
  if (x.size() < kLsdFrame || x.size() % kLsdFrame != 0) {
    throw DomainError("lsd: length " + std::to_string(x.size()) + " must be a positive multiple of 2048");
  }
  const auto sx = stft(x, kLsdFrame, kLsdFrame);
  const auto sy = stft(y, kLsdFrame, kLsdFrame);
  double total = 0.0;
  for (std::size_t f = 0; f < sx.frames; ++f) {
    double acc = 0.0;
    for (std::size_t b = 0; b < sx.bins; ++b) {
      const double lx = std::log10(std::norm(sx.at(f, b)) + kLsdFloor);
      const double ly = std::log10(std::norm(sy.at(f, b)) + kLsdFloor);
      acc += (lx - ly) * (lx - ly);
    }
    total += std::sqrt(acc / static_cast<double>(sx.bins));
  }
  return total / static_cast<double>(sx.frames);
}

double lsd(const audio::Waveform& x_ref, const audio::Waveform& y_approx) {
  if (x_ref.sample_rate != y_approx.sample_rate) throw_shape("lsd: sample rates differ");
  return lsd(std::span<const float>(x_ref.samples), std::span<const float>(y_approx.samples));
}

audio::Waveform pad_for_lsd(const audio::Waveform& w) {
  audio::Waveform out = w;
  const std::size_t frames = std::max<std::size_t>(1, (w.samples.size() + kLsdFrame - 1) / kLsdFrame);
  out.samples.resize(frames * kLsdFrame, 0.0f);
  return out;
}

std::string format_metric(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace wsrglow::dsp
