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
#include <vector>

#include "wsrglow/dsp/metrics.hpp"
#include "wsrglow/encoders.hpp"
#include "wsrglow/flow/model.hpp"

namespace wsrglow::train {

struct TrainConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double adam_eps = 1e-8;
  std::size_t batch = 12;
  std::size_t max_hr_samples = 8192;
  std::size_t iters = 1000;
  std::uint64_t seed = 0;
  int ratio = 4;
  int hr_rate = 48000;
  std::size_t checkpoint_every = 1000;
  /// 0 disables clipping.
  double clip_grad_norm = 0.0;

  /// Largest multiple of 8 * ratio not above max_hr_samples.
  std::size_t segment_length() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Plain-text `key = value` run configuration. Every key has a default;
/// unknown keys are rejected.
struct RunConfig {
  flow::ModelConfig model;
  encoders::EncoderFlags flags;
  TrainConfig train;
  dsp::SnrConvention snr_convention = dsp::SnrConvention::kPaper;
  std::string data_dir;
  std::string out_dir;

  /// Throws ConfigError for unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  std::string to_text() const;
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
  /// Validates model and flag settings.
  void validate() const;

  static std::vector<std::string> keys();
  bool operator==(const RunConfig&) const = default;
};

}  // namespace wsrglow::train
