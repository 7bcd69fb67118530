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

#include "wsrglow/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "wsrglow/common/error.hpp"
#include "wsrglow/flow/flow.hpp"
#include "wsrglow/ndgrad/ops.hpp"
#include "wsrglow/train/batch.hpp"

namespace wsrglow::train {
namespace {

// Keeps the batch stream independent of the parameter initialisation stream.
constexpr std::uint64_t kBatchStreamSalt = 0xB47C5EEDull;

}  // namespace

AdamConfig TrainState::adam_config() const {
  return {config.train.lr, config.train.beta1, config.train.beta2, config.train.adam_eps};
}

Checkpoint TrainState::checkpoint() const { return make_checkpoint(config, *model, &adam, iteration, rng.state()); }

TrainState init_train_state(const RunConfig& config) {
  config.validate();
  TrainState s;
  s.config = config;
  s.model = std::make_unique<flow::Model<float>>(config.model, config.flags, config.train.seed);
  s.adam = init_adam(s.model->params());
  s.rng = Rng(config.train.seed ^ kBatchStreamSalt);
  return s;
}

TrainState resume_train_state(const Checkpoint& ckpt) {
  TrainState s = init_train_state(ckpt.config);
  restore_parameters(ckpt, *s.model);
  s.adam = restore_adam(ckpt, s.model->params());
  s.rng.set_state(ckpt.rng);
  s.iteration = ckpt.iteration;
  return s;
}

double batch_loss_and_grad(flow::Model<float>& model, const std::vector<audio::Waveform>& hr,
                           const std::vector<audio::Waveform>& lr, int ratio) {
  if (hr.size() != lr.size() || hr.empty()) throw_shape("batch_loss_and_grad: need matching, nonempty HR/LR lists");
  model.params().zero_grad();
  const float inv_b = 1.0f / static_cast<float>(hr.size());
  double total = 0.0;
  for (std::size_t i = 0; i < hr.size(); ++i) {
    ndgrad::Graph<float> g;
    auto cond = flow::condition_for(g, lr[i], model, ratio);
    auto res = flow::analyze(g, hr[i], cond, model);
    total += res.nll_per_dim.value().item();
    g.backward(ndgrad::scale(res.nll_per_dim, inv_b));
  }
  return total / static_cast<double>(hr.size());
}

StepResult train_step(TrainState& state, const std::vector<audio::Waveform>& dataset) {
  auto batch = make_batch(dataset, state.config.train, state.rng);
  std::vector<audio::Waveform> hr, lr;
  for (auto& p : batch) {
    hr.push_back(std::move(p.hr));
    lr.push_back(std::move(p.lr));
  }
  StepResult r;
  r.nll_per_dim = batch_loss_and_grad(*state.model, hr, lr, state.config.train.ratio);
  if (!std::isfinite(r.nll_per_dim)) return r;
  r.grad_norm = grad_norm(state.model->params());
  if (state.config.train.clip_grad_norm > 0) clip_grad_norm(state.model->params(), state.config.train.clip_grad_norm);
  r.applied = adam_step(state.model->params(), state.adam, state.adam_config());
  ++state.iteration;
  return r;
}

std::string format_log_row(const LogRow& row) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%llu,%.9g,%.9g,%.3f", static_cast<unsigned long long>(row.iter), row.nll_per_dim,
                row.grad_norm, row.wall_ms);
  return buf;
}

std::filesystem::path checkpoint_path(const std::filesystem::path& out_dir, std::uint64_t iteration) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "ckpt_%08llu.wsrg", static_cast<unsigned long long>(iteration));
  return out_dir / buf;
}

std::vector<LogRow> train_loop(TrainState& state, const std::vector<audio::Waveform>& dataset,
                               const TrainLoopOptions& options) {
  const std::uint64_t stop = options.stop_at ? options.stop_at : state.config.train.iters;
  const bool to_disk = !options.out_dir.empty();
  std::ofstream log;
  std::string last_good = "none";
  if (to_disk) {
    std::filesystem::create_directories(options.out_dir);
    const auto log_path = options.out_dir / "train_log.csv";
    const bool append = state.iteration > 0 && std::filesystem::exists(log_path);
    log.open(log_path, append ? std::ios::app : std::ios::trunc);
    if (!log) throw IoError("cannot open " + log_path.string());
    if (!append) log << kLogHeader << '\n';
    state.config.save(options.out_dir / "config.txt");
    if (state.iteration > 0) {
      const auto p = checkpoint_path(options.out_dir, state.iteration);
      if (std::filesystem::exists(p)) last_good = p.string();
    }
  }

  std::vector<LogRow> rows;
  const auto every = state.config.train.checkpoint_every;
  while (state.iteration < stop) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto step = train_step(state, dataset);
    if (!std::isfinite(step.nll_per_dim)) {
      throw NumericError("non-finite loss at iteration " + std::to_string(state.iteration + 1) +
                         "; last good checkpoint: " + last_good);
    }
    const auto t1 = std::chrono::steady_clock::now();
    LogRow row{state.iteration, step.nll_per_dim, step.grad_norm,
               std::chrono::duration<double, std::milli>(t1 - t0).count()};
    rows.push_back(row);
    if (options.on_step) options.on_step(row);
    if (to_disk) {
      log << format_log_row(row) << '\n';
      log.flush();
      if (every > 0 && state.iteration % every == 0) {
        const auto p = checkpoint_path(options.out_dir, state.iteration);
        save_checkpoint(p, state.checkpoint());
        last_good = p.string();
      }
    }
  }
  if (to_disk) save_checkpoint(options.out_dir / "final.wsrg", state.checkpoint());
  return rows;
}

}  // namespace wsrglow::train
