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

#include "wsrglow/train/batch.hpp"

#include "wsrglow/common/error.hpp"
#include "wsrglow/dsp/resample.hpp"

namespace wsrglow::train {

std::vector<TrainingPair> make_batch(const std::vector<audio::Waveform>& dataset, const TrainConfig& cfg, Rng& rng) {
  if (dataset.empty()) throw ConfigError("make_batch: dataset is empty");
  const std::size_t seg = cfg.segment_length();
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].sample_rate != cfg.hr_rate) {
      throw DomainError("make_batch: clip " + std::to_string(i) + " is at " + std::to_string(dataset[i].sample_rate) +
                        " Hz, expected " + std::to_string(cfg.hr_rate));
    }
    if (dataset[i].samples.size() >= seg) eligible.push_back(i);
  }
  if (eligible.empty()) {
    throw ConfigError("make_batch: no clip has the minimum length of " + std::to_string(seg) + " samples");
  }
  std::vector<TrainingPair> batch;
  batch.reserve(cfg.batch);
  for (std::size_t b = 0; b < cfg.batch; ++b) {
    const auto& clip = dataset[eligible[rng.below(eligible.size())]];
    const std::size_t offset = rng.below(clip.samples.size() - seg + 1);
    TrainingPair pair;
    pair.hr.sample_rate = clip.sample_rate;
    pair.hr.samples.assign(clip.samples.begin() + static_cast<std::ptrdiff_t>(offset),
                           clip.samples.begin() + static_cast<std::ptrdiff_t>(offset + seg));
    pair.lr = dsp::resample(pair.hr, cfg.hr_rate / cfg.ratio);
    batch.push_back(std::move(pair));
  }
  return batch;
}

}  // namespace wsrglow::train
