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

#include "wsrglow/dsp/fft.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "wsrglow/common/error.hpp"

namespace wsrglow::dsp {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_inplace(std::span<std::complex<double>> a) {
  const std::size_t n = a.size();
  if (!is_power_of_two(n)) throw DomainError("fft size " + std::to_string(n) + " is not a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Exact twiddles for k = 0 and the quarter turn keep butterflies of
      // symmetric inputs exactly zero where they should be.
      std::complex<double> w;
      if (k == 0) {
        w = {1.0, 0.0};
      } else if (4 * k == len) {
        w = {0.0, -1.0};
      } else {
        w = std::polar(1.0, ang * static_cast<double>(k));
      }
      for (std::size_t i = 0; i < n; i += len) {
        const auto u = a[i + k];
        const auto v = a[i + k + half] * w;
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

std::vector<std::complex<double>> rfft(std::span<const double> x) {
  std::vector<std::complex<double>> buf(x.begin(), x.end());
  fft_inplace(buf);
  buf.resize(x.size() / 2 + 1);
  return buf;
}

}  // namespace wsrglow::dsp
