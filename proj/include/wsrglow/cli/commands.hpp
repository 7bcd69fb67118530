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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wsrglow/audio_io.hpp"
#include "wsrglow/cli/selftest.hpp"
#include "wsrglow/train/run_config.hpp"

namespace wsrglow::cli {

namespace fs = std::filesystem;

/// Each command returns the process exit code; hard failures throw
/// wsrglow::Error.

struct PrepareOptions {
  fs::path in;
  fs::path out;
  int hr_rate = 48000;
  int ratio = 4;
};
int cmd_prepare(const PrepareOptions& o, std::ostream& out, std::ostream& err);

struct AblationSwitches {
  bool no_stft = false;
  bool no_phase = false;
  bool no_magnitude = false;
  bool no_lr_encoder = false;

  bool any() const { return no_stft || no_phase || no_magnitude || no_lr_encoder; }
  void apply(encoders::EncoderFlags& flags) const;
};

struct TrainOptions {
  std::optional<fs::path> config;
  fs::path data;
  fs::path out;
  AblationSwitches ablation;
  /// key=value pairs applied after the config file; they win.
  std::vector<std::pair<std::string, std::string>> overrides;
  std::optional<fs::path> resume;
};
int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err);

/// Merges file, overrides and switches, then validates.
train::RunConfig effective_config(const TrainOptions& o);

struct InferOptions {
  fs::path ckpt;
  fs::path in;
  fs::path out;
  double temperature = 1.0;
  std::uint64_t seed = 0;
  /// When set, must match the checkpoint's encoder flags.
  AblationSwitches expect;
  bool check_flags = false;
};
int cmd_infer(const InferOptions& o, std::ostream& out, std::ostream& err);

struct EvalOptions {
  fs::path ref;
  fs::path hyp;
  fs::path out;
  dsp::SnrConvention convention = dsp::SnrConvention::kPaper;
};
int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err);

struct AblateOptions {
  std::optional<fs::path> config;
  fs::path data;
  fs::path out;
  std::vector<std::pair<std::string, std::string>> overrides;
};
/// Trains every encoder variant into <out>/<variant>/ and writes
/// <out>/ablation.csv with `variant,c_cond,final_nll_per_dim`.
int cmd_ablate(const AblateOptions& o, std::ostream& out, std::ostream& err);

int cmd_selftest(const SelftestOptions& o, std::ostream& out);

struct SpectrogramOptions {
  fs::path in;
  fs::path out;
};
int cmd_spectrogram(const SpectrogramOptions& o, std::ostream& out);

/// Sorted *.wav paths directly under `dir`.
std::vector<fs::path> list_wavs(const fs::path& dir);
/// HR clips from `<dir>/hr` when present, else `dir`, resampled to hr_rate.
std::vector<audio::Waveform> load_dataset(const fs::path& dir, int hr_rate, std::ostream& err);
/// WSRGLOW_THREADS, at least 1 (default 1).
unsigned worker_threads();

}  // namespace wsrglow::cli
