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

#include "wsrglow/dsp/mulaw.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wsrglow/common/error.hpp"

namespace wsrglow::dsp {

double mulaw_encode(double x, double mu) {
  if (!(std::abs(x) <= 1.0)) throw DomainError("mulaw_encode: |x| > 1 (" + std::to_string(x) + ")");
  return std::copysign(std::log1p(mu * std::abs(x)) / std::log1p(mu), x);
}

double mulaw_decode(double y, double mu) {
  if (!(std::abs(y) <= 1.0)) throw DomainError("mulaw_decode: |y| > 1 (" + std::to_string(y) + ")");
  if (std::abs(y) == 1.0) return y;
  return std::copysign(std::expm1(std::abs(y) * std::log1p(mu)) / mu, y);
}

int quantize_256(double y) {
  if (!(std::abs(y) <= 1.0)) throw DomainError("quantize_256: |y| > 1 (" + std::to_string(y) + ")");
  const int code = static_cast<int>(std::floor((y + 1.0) / 2.0 * kMuLawLevels));
  return std::min(code, kMuLawLevels - 1);
}

double dequantize_256(int code) {
  if (code < 0 || code >= kMuLawLevels) throw DomainError("dequantize_256: code out of range");
  return (code + 0.5) * 2.0 / kMuLawLevels - 1.0;
}

}  // namespace wsrglow::dsp
