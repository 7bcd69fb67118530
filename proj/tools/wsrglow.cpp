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

// wsrglow: command-line front end.

#include <CLI11.hpp>

#include <iostream>

#include "wsrglow/cli/commands.hpp"
#include "wsrglow/common/error.hpp"

namespace {

using namespace wsrglow::cli;

std::pair<std::string, std::string> split_override(const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw wsrglow::ConfigError("--set expects key=value, got '" + kv + "'");
  return {kv.substr(0, eq), kv.substr(eq + 1)};
}

void add_switches(CLI::App* app, AblationSwitches& s) {
  app->add_flag("--no-stft", s.no_stft, "Drop the whole STFT encoder");
  app->add_flag("--no-phase", s.no_phase, "Drop phase embeddings");
  app->add_flag("--no-magnitude", s.no_magnitude, "Drop magnitude channels");
  app->add_flag("--no-lr-encoder", s.no_lr_encoder, "Drop the waveform encoder");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional flow audio super-resolution"};
  app.require_subcommand(1);

  PrepareOptions prep;
  auto* c_prep = app.add_subcommand("prepare", "Build HR/LR training pairs from a directory of WAV files");
  c_prep->add_option("--in", prep.in, "Input directory")->required();
  c_prep->add_option("--out", prep.out, "Output directory")->required();
  c_prep->add_option("--hr-rate", prep.hr_rate, "HR sample rate")->capture_default_str();
  c_prep->add_option("--ratio", prep.ratio, "Upscale ratio (2 or 4)")->capture_default_str();

  TrainOptions tr;
  std::string tr_config, tr_resume;
  std::vector<std::string> tr_set;
  std::string tr_iters, tr_seed, tr_clip;
  auto* c_train = app.add_subcommand("train", "Maximum-likelihood training");
  c_train->add_option("--config", tr_config, "key = value config file");
  c_train->add_option("--data", tr.data, "Prepared data directory");
  c_train->add_option("--out", tr.out, "Run directory");
  c_train->add_option("--resume", tr_resume, "Continue from a checkpoint");
  c_train->add_option("--set", tr_set, "Override a config key (key=value), repeatable");
  c_train->add_option("--iters", tr_iters, "Iteration budget");
  c_train->add_option("--seed", tr_seed, "Seed");
  c_train->add_option("--clip-grad-norm", tr_clip, "Clip gradients to this L2 norm (off by default)");
  add_switches(c_train, tr.ablation);

  InferOptions inf;
  auto* c_infer = app.add_subcommand("infer", "Super-resolve one LR file");
  c_infer->add_option("--ckpt", inf.ckpt, "Checkpoint")->required();
  c_infer->add_option("--in", inf.in, "LR WAV")->required();
  c_infer->add_option("--out", inf.out, "Output WAV")->required();
  c_infer->add_option("--temperature", inf.temperature, "Sampling temperature")->capture_default_str();
  c_infer->add_option("--seed", inf.seed, "Sampling seed")->capture_default_str();
  add_switches(c_infer, inf.expect);
  bool infer_check = false;
  c_infer->add_flag("--check-flags", infer_check, "Require the given encoder switches to match the checkpoint");

  EvalOptions ev;
  std::string ev_conv = "paper";
  auto* c_eval = app.add_subcommand("eval", "SNR and LSD of hypotheses against references");
  c_eval->add_option("--ref", ev.ref, "Reference directory")->required();
  c_eval->add_option("--hyp", ev.hyp, "Hypothesis directory")->required();
  c_eval->add_option("--out", ev.out, "Output CSV")->required();
  c_eval->add_option("--snr-convention", ev_conv, "paper or classic")->capture_default_str();

  AblateOptions ab;
  std::string ab_config;
  std::vector<std::string> ab_set;
  auto* c_ablate = app.add_subcommand("ablate", "Train every encoder variant");
  c_ablate->add_option("--config", ab_config, "key = value config file");
  c_ablate->add_option("--data", ab.data, "Prepared data directory")->required();
  c_ablate->add_option("--out", ab.out, "Output directory")->required();
  c_ablate->add_option("--set", ab_set, "Override a config key (key=value), repeatable");

  SelftestOptions st;
  auto* c_self = app.add_subcommand("selftest", "Run the verification battery");
  c_self->add_flag("--flip-coupling-logdet", st.flip_coupling_log_det, "Test hook: corrupt the coupling log-det");

  SpectrogramOptions sp;
  auto* c_spec = app.add_subcommand("spectrogram", "Render a spectrogram as PGM");
  c_spec->add_option("--in", sp.in, "Input WAV")->required();
  c_spec->add_option("--out", sp.out, "Output PGM")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_prep->parsed()) return cmd_prepare(prep, std::cout, std::cerr);
    if (c_train->parsed()) {
      if (!tr_config.empty()) tr.config = tr_config;
      if (!tr_resume.empty()) tr.resume = tr_resume;
      for (const auto& kv : tr_set) tr.overrides.push_back(split_override(kv));
      if (!tr_iters.empty()) tr.overrides.emplace_back("iters", tr_iters);
      if (!tr_seed.empty()) tr.overrides.emplace_back("seed", tr_seed);
      if (!tr_clip.empty()) tr.overrides.emplace_back("clip_grad_norm", tr_clip);
      return cmd_train(tr, std::cout, std::cerr);
    }
    if (c_infer->parsed()) {
      inf.check_flags = infer_check;
      return cmd_infer(inf, std::cout, std::cerr);
    }
    if (c_eval->parsed()) {
      ev.convention = wsrglow::dsp::parse_snr_convention(ev_conv);
      return cmd_eval(ev, std::cout, std::cerr);
    }
    if (c_ablate->parsed()) {
      if (!ab_config.empty()) ab.config = ab_config;
      for (const auto& kv : ab_set) ab.overrides.push_back(split_override(kv));
      return cmd_ablate(ab, std::cout, std::cerr);
    }
    if (c_self->parsed()) return cmd_selftest(st, std::cout);
    if (c_spec->parsed()) return cmd_spectrogram(sp, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
