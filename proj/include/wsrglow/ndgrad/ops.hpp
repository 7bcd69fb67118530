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

#include <span>
#include <vector>

#include "wsrglow/ndgrad/graph.hpp"

// Differentiable ops. Binary elementwise ops need equal shapes; the only
// broadcast allowed is a single-element operand against anything.

namespace wsrglow::ndgrad {

template <typename T> Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> mul(const Var<T>& a, const Var<T>& b);
template <typename T> Var<T> neg(const Var<T>& a);
template <typename T> Var<T> exp(const Var<T>& a);
/// Throws DomainError if any element is <= 0.
template <typename T> Var<T> log(const Var<T>& a);
template <typename T> Var<T> tanh(const Var<T>& a);
template <typename T> Var<T> sigmoid(const Var<T>& a);
template <typename T> Var<T> scale(const Var<T>& a, T factor);

/// Sum of all elements, as a rank-0 tensor.
template <typename T> Var<T> sum(const Var<T>& a);
template <typename T> Var<T> sum_squares(const Var<T>& a);

/// Non-causal "same" convolution over [C_in, L] with weight [C_out, C_in, K]
/// (K odd) and optional bias [C_out]; out-of-range taps read zero.
template <typename T>
Var<T> conv1d(const Var<T>& input, const Var<T>& weight, const Var<T>& bias, std::size_t dilation = 1);

/// out[:, t] = W * in[:, t].
template <typename T> Var<T> channel_mix(const Var<T>& input, const Var<T>& weight);

/// Gathers rows of a [V, E] table. Out-of-range indices throw DomainError.
template <typename T> Var<T> embedding_lookup(const Var<T>& table, std::span<const int> indices);

template <typename T> Var<T> slice_rows(const Var<T>& x, std::size_t begin, std::size_t end);
template <typename T> Var<T> concat_rows(const std::vector<Var<T>>& parts);
template <typename T> Var<T> reshape(const Var<T>& x, Shape shape);
template <typename T> Var<T> transpose(const Var<T>& x);
/// [C, N] -> [C, N * factor], each column repeated `factor` times in place.
template <typename T> Var<T> repeat_cols(const Var<T>& x, std::size_t factor);

/// log|det W| of a square matrix through LU with partial pivoting. Throws
/// NumericError when |det W| < min_abs_det.
template <typename T> Var<T> logabsdet(const Var<T>& w, double min_abs_det = 1e-6);

/// LU-based helpers on plain tensors, shared by logabsdet and inverse passes.
template <typename T> double log_abs_det(const Tensor<T>& square, double min_abs_det = 1e-6);
template <typename T> Tensor<T> inverse(const Tensor<T>& square, double min_abs_det = 1e-6);

}  // namespace wsrglow::ndgrad
