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
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "wsrglow/audio_io.hpp"
#include "wsrglow/common/rng.hpp"
#include "wsrglow/flow/model.hpp"
#include "wsrglow/train/adam.hpp"
#include "wsrglow/train/checkpoint.hpp"
#include "wsrglow/train/run_config.hpp"

namespace wsrglow::train {

/// Everything needed to continue a run bitwise: model, optimizer, batch RNG
/// and the number of completed iterations.
struct TrainState {
  RunConfig config;
  std::unique_ptr<flow::Model<float>> model;
  AdamState<float> adam;
  Rng rng;
  std::uint64_t iteration = 0;

  AdamConfig adam_config() const;
  Checkpoint checkpoint() const;
};

/// Fresh state: model initialised from train.seed, batch RNG derived from it.
TrainState init_train_state(const RunConfig& config);
TrainState resume_train_state(const Checkpoint& ckpt);

struct StepResult {
  double nll_per_dim = 0;  // mean over the batch
  double grad_norm = 0;    // before clipping
  bool applied = false;    // false when the optimizer skipped the step
};

/// One optimisation step on a freshly drawn batch.
StepResult train_step(TrainState& state, const std::vector<audio::Waveform>& dataset);

/// Mean nll_per_dim over `batch`, gradients accumulated into the model's
/// parameters (grads are zeroed first). Items are processed in index order.
double batch_loss_and_grad(flow::Model<float>& model, const std::vector<audio::Waveform>& hr,
                           const std::vector<audio::Waveform>& lr, int ratio);

struct LogRow {
  std::uint64_t iter = 0;
  double nll_per_dim = 0;
  double grad_norm = 0;
  double wall_ms = 0;
};

inline constexpr const char* kLogHeader = "iter,nll_per_dim,grad_norm,wall_ms";
std::string format_log_row(const LogRow& row);

struct TrainLoopOptions {
  /// Run directory for the CSV log and checkpoints; empty keeps everything in
  /// memory.
  std::filesystem::path out_dir;
  /// Stop once this many iterations are complete; 0 means config.train.iters.
  std::uint64_t stop_at = 0;
  std::function<void(const LogRow&)> on_step;
};

/// Runs until the iteration budget is spent. Writes `train_log.csv` (appending
/// when resuming), `ckpt_<iter>.wsrg` every checkpoint_every iterations and
/// `final.wsrg`. A non-finite loss throws NumericError naming the last good
/// checkpoint.
std::vector<LogRow> train_loop(TrainState& state, const std::vector<audio::Waveform>& dataset,
                               const TrainLoopOptions& options = {});

std::filesystem::path checkpoint_path(const std::filesystem::path& out_dir, std::uint64_t iteration);

}  // namespace wsrglow::train
