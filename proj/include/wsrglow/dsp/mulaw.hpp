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

namespace wsrglow::dsp {

inline constexpr double kMuLaw = 255.0;
inline constexpr int kMuLawLevels = 256;

/// sign(x) ln(1 + mu |x|) / ln(1 + mu). Throws DomainError for |x| > 1.
double mulaw_encode(double x, double mu = kMuLaw);
/// Exact inverse of mulaw_encode. Throws DomainError for |y| > 1.
double mulaw_decode(double y, double mu = kMuLaw);

/// min(floor((y + 1) / 2 * 256), 255). Throws DomainError for |y| > 1.
int quantize_256(double y);
/// Centre of the code's bin in companded space.
double dequantize_256(int code);

}  // namespace wsrglow::dsp
