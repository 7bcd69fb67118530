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
#include <string>
#include <variant>
#include <vector>

#include "wsrglow/common/rng.hpp"
#include "wsrglow/flow/model.hpp"
#include "wsrglow/train/adam.hpp"
#include "wsrglow/train/run_config.hpp"

namespace wsrglow::train {

inline constexpr std::uint32_t kCheckpointVersion = 1;

using AnyTensor = std::variant<ndgrad::Tensor<float>, ndgrad::Tensor<double>>;

struct NamedTensor {
  std::string name;
  AnyTensor value;
  bool operator==(const NamedTensor&) const = default;
};

/// On-disk layout (little-endian):
///   "WSRG" | u32 version | u32 len + config text | u32 count + tensors
///   | u32 count + optimizer tensors | u64 iteration | 4 x u64 rng state
/// where a tensor is u32 len + name | u8 dtype | u8 rank | rank x u64 dims | raw values.
struct Checkpoint {
  RunConfig config;
  std::vector<NamedTensor> params;
  std::vector<NamedTensor> optimizer;
  std::uint64_t iteration = 0;
  Rng::State rng{};
  bool operator==(const Checkpoint&) const = default;
};

/// Writes atomically (temp file then rename). Throws IoError.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
/// Throws FormatError on bad magic, unknown version or truncation ("unexpected
/// end" plus the tensor being read), IoError when the file cannot be opened.
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::vector<char> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<char>& bytes);

/// Snapshot of a model and its optimizer. Optimizer tensors are named
/// "adam.m.<param>", "adam.v.<param>", "adam.step" and "adam.skipped".
template <typename T>
Checkpoint make_checkpoint(const RunConfig& config, const flow::Model<T>& model, const AdamState<T>* adam,
                           std::uint64_t iteration, const Rng::State& rng);

/// Copies parameter values into `model`. Throws ConfigError unless the
/// checkpoint holds exactly the model's parameters with matching shapes and
/// dtype (a model built with different encoder flags fails here).
template <typename T>
void restore_parameters(const Checkpoint& ckpt, flow::Model<T>& model);

/// Rebuilds optimizer state for `params`; zero state when absent.
template <typename T>
AdamState<T> restore_adam(const Checkpoint& ckpt, const ndgrad::ParameterStore<T>& params);

}  // namespace wsrglow::train
