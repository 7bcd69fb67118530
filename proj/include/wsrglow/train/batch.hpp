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

#include <vector>

#include "wsrglow/audio_io.hpp"
#include "wsrglow/common/rng.hpp"
#include "wsrglow/train/run_config.hpp"

namespace wsrglow::train {

struct TrainingPair {
  audio::Waveform hr;
  audio::Waveform lr;
};

/// Draws cfg.batch segments of cfg.segment_length() samples: a clip uniformly
/// among those long enough, then a uniform offset. LR is the segment resampled
/// to hr_rate / ratio. Throws ConfigError when no clip is long enough and
/// DomainError when a clip is not at hr_rate.
std::vector<TrainingPair> make_batch(const std::vector<audio::Waveform>& dataset, const TrainConfig& cfg, Rng& rng);

}  // namespace wsrglow::train
