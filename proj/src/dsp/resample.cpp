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

#include "wsrglow/dsp/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wsrglow/common/error.hpp"

namespace wsrglow::dsp {

ResampleDesign design_resampler(int source_rate, int target_rate) {
  if (source_rate <= 0 || target_rate <= 0) throw DomainError("resample: rates must be positive");
  const int g = std::gcd(source_rate, target_rate);
  ResampleDesign d;
  d.up = target_rate / g;
  d.down = source_rate / g;
  if (d.up > 64 || d.down > 64) {
    throw DomainError("resample: ratio " + std::to_string(d.up) + "/" + std::to_string(d.down) +
                      " exceeds 64 in lowest terms");
  }
  const int m = std::max(d.up, d.down);
  const int half = d.taps_per_phase * m / 2;
  const int len = 2 * half + 1;
  const double cutoff = 0.9 / m;  // fraction of pi at the upsampled rate
  const double i0_beta = std::cyl_bessel_i(0.0, d.kaiser_beta);
  d.taps.resize(static_cast<std::size_t>(len));
  for (int n = 0; n < len; ++n) {
    const double t = n - half;
    const double arg = cutoff * t;
    const double sinc = t == 0 ? 1.0 : std::sin(M_PI * arg) / (M_PI * arg);
    const double r = t / half;
    const double kaiser = std::cyl_bessel_i(0.0, d.kaiser_beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    d.taps[static_cast<std::size_t>(n)] = d.up * cutoff * sinc * kaiser;
  }
  return d;
}

audio::Waveform resample(const audio::Waveform& w, int target_rate) {
  if (target_rate == w.sample_rate) return w;
  const ResampleDesign d = design_resampler(w.sample_rate, target_rate);
  const long long p = d.up, q = d.down;
  const long long len = static_cast<long long>(w.samples.size());
  const long long half = static_cast<long long>(d.taps.size() / 2);
  const long long ntaps = static_cast<long long>(d.taps.size());

  audio::Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(static_cast<std::size_t>(len * p / q));
  for (long long m = 0; m < static_cast<long long>(out.samples.size()); ++m) {
    // y[m] = sum_n h[n] x_up[m q + half - n]; only taps landing on a
    // non-zero upsampled sample (index divisible by p) contribute.
    const long long centre = m * q + half;
    double acc = 0.0;
    for (long long n = centre % p; n < ntaps; n += p) {
      const long long j = (centre - n) / p;
      if (j < 0) break;
      if (j < len) acc += d.taps[static_cast<std::size_t>(n)] * w.samples[static_cast<std::size_t>(j)];
    }
    out.samples[static_cast<std::size_t>(m)] = static_cast<float>(acc);
  }
  return out;
}

}  // namespace wsrglow::dsp
