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

namespace wsrglow::dsp {

bool is_power_of_two(std::size_t n);

/// In-place iterative radix-2 DFT, X[b] = sum_n x[n] exp(-2 pi i b n / N).
/// Throws DomainError if the size is not a power of two.
void fft_inplace(std::span<std::complex<double>> data);

/// One-sided spectrum (N/2 + 1 bins) of a real sequence of power-of-two length.
std::vector<std::complex<double>> rfft(std::span<const double> x);

}  // namespace wsrglow::dsp
