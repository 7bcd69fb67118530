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

#include "wsrglow/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "wsrglow/common/error.hpp"
#include "wsrglow/dsp/metrics.hpp"
#include "wsrglow/dsp/resample.hpp"
#include "wsrglow/dsp/spectrogram.hpp"
#include "wsrglow/flow/flow.hpp"
#include "wsrglow/train/checkpoint.hpp"
#include "wsrglow/train/trainer.hpp"

namespace wsrglow::cli {
namespace {

bool is_wav(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".wav";
}

std::vector<fs::path> list_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

struct Variant {
  const char* name;
  AblationSwitches switches;
};

const std::vector<Variant>& ablation_variants() {
  static const std::vector<Variant> v = {
      {"full", {}},
      {"no_stft", {true, false, false, false}},
      {"no_phase", {false, true, false, false}},
      {"no_magnitude", {false, false, true, false}},
      {"stft_only", {false, false, false, true}},
  };
  return v;
}

}  // namespace

void AblationSwitches::apply(encoders::EncoderFlags& flags) const {
  if (no_stft) flags.use_stft = false;
  if (no_phase) flags.use_phase = false;
  if (no_magnitude) flags.use_magnitude = false;
  if (no_lr_encoder) flags.use_lr = false;
}

std::vector<fs::path> list_wavs(const fs::path& dir) {
  auto files = list_files(dir);
  files.erase(std::remove_if(files.begin(), files.end(), [](const fs::path& p) { return !is_wav(p); }), files.end());
  return files;
}

unsigned worker_threads() {
  const char* env = std::getenv("WSRGLOW_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError(std::string("WSRGLOW_THREADS must be a positive integer, got '") + env + "'");
  return static_cast<unsigned>(std::min<long>(n, 256));
}

std::vector<audio::Waveform> load_dataset(const fs::path& dir, int hr_rate, std::ostream& err) {
  const fs::path src = fs::is_directory(dir / "hr") ? dir / "hr" : dir;
  std::vector<audio::Waveform> clips;
  for (const auto& p : list_wavs(src)) {
    auto w = audio::read_wav(p);
    if (w.sample_rate != hr_rate) {
      err << "warning: " << p.filename().string() << " is at " << w.sample_rate << " Hz, resampling to " << hr_rate
          << "\n";
      w = dsp::resample(w, hr_rate);
    }
    clips.push_back(std::move(w));
  }
  if (clips.empty()) throw IoError("no WAV files in " + src.string());
  return clips;
}

int cmd_prepare(const PrepareOptions& o, std::ostream& out, std::ostream& err) {
  if (o.ratio != 2 && o.ratio != 4) throw ConfigError("--ratio must be 2 or 4");
  if (o.hr_rate <= 0 || o.hr_rate % o.ratio != 0) throw ConfigError("--hr-rate must be a positive multiple of ratio");
  const auto files = list_files(o.in);
  if (files.empty()) throw IoError("input directory is empty: " + o.in.string());
  fs::create_directories(o.out / "hr");
  fs::create_directories(o.out / "lr");

  std::string manifest = "name,hr_len,lr_len\n";
  std::vector<std::pair<std::string, std::string>> skipped;
  std::size_t written = 0;
  for (const auto& p : files) {
    const auto name = p.filename().string();
    if (!is_wav(p)) {
      err << "warning: skipping non-WAV file " << name << "\n";
      skipped.emplace_back(name, "not a wav file");
      continue;
    }
    audio::Waveform hr;
    try {
      hr = audio::read_wav(p);
    } catch (const Error& e) {
      err << "warning: skipping " << name << ": " << e.what() << "\n";
      skipped.emplace_back(name, "unreadable");
      continue;
    }
    if (hr.sample_rate != o.hr_rate) hr = dsp::resample(hr, o.hr_rate);
    const auto lr = dsp::resample(hr, o.hr_rate / o.ratio);
    audio::write_wav(hr, o.out / "hr" / name);
    audio::write_wav(lr, o.out / "lr" / name);
    manifest += name + "," + std::to_string(hr.samples.size()) + "," + std::to_string(lr.samples.size()) + "\n";
    ++written;
  }
  for (const auto& [name, why] : skipped) manifest += name + ",skipped,skipped (" + why + ")\n";
  write_text(o.out / "manifest.csv", manifest);
  out << "prepared " << written << " file(s), skipped " << skipped.size() << "\n";
  return written > 0 ? 0 : 1;
}

train::RunConfig effective_config(const TrainOptions& o) {
  train::RunConfig cfg = o.config ? train::RunConfig::load(*o.config) : train::RunConfig{};
  for (const auto& [k, v] : o.overrides) cfg.set(k, v);
  o.ablation.apply(cfg.flags);
  if (!o.data.empty()) cfg.data_dir = o.data.string();
  if (!o.out.empty()) cfg.out_dir = o.out.string();
  cfg.validate();
  return cfg;
}

int cmd_train(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  train::TrainState state;
  if (o.resume) {
    auto ckpt = train::load_checkpoint(*o.resume);
    state = train::resume_train_state(ckpt);
    // Only the iteration budget may change on resume.
    for (const auto& [k, v] : o.overrides) {
      if (k != "iters") throw ConfigError("only iters may be overridden when resuming, got '" + k + "'");
      state.config.set(k, v);
    }
    if (!o.out.empty()) state.config.out_dir = o.out.string();
    if (!o.data.empty()) state.config.data_dir = o.data.string();
  } else {
    state = train::init_train_state(effective_config(o));
  }
  const auto& cfg = state.config;
  if (cfg.data_dir.empty() || cfg.out_dir.empty()) throw ConfigError("train needs --data and --out");
  out << "C_cond = " << state.model->cond_channels() << "\n";
  out << "parameters = " << state.model->params().total_elements() << "\n";
  const auto dataset = load_dataset(cfg.data_dir, cfg.train.hr_rate, err);
  train::TrainLoopOptions lo;
  lo.out_dir = cfg.out_dir;
  lo.on_step = [&](const train::LogRow& row) { out << train::format_log_row(row) << "\n"; };
  train::train_loop(state, dataset, lo);
  if (state.adam.skipped) err << "warning: " << state.adam.skipped << " optimizer step(s) skipped\n";
  out << "finished at iteration " << state.iteration << "\n";
  return 0;
}

int cmd_infer(const InferOptions& o, std::ostream& out, std::ostream&) {
  const auto ckpt = train::load_checkpoint(o.ckpt);
  const auto& cfg = ckpt.config;
  if (o.check_flags) {
    encoders::EncoderFlags expected;
    expected.stft_mode = cfg.flags.stft_mode;
    o.expect.apply(expected);
    if (!(expected == cfg.flags)) throw ConfigError("encoder flags do not match the checkpoint");
  }
  flow::Model<float> model(cfg.model, cfg.flags, cfg.train.seed);
  train::restore_parameters(ckpt, model);
  const auto lr = audio::read_wav(o.in);
  const int ratio = cfg.train.ratio;
  if (lr.sample_rate * ratio != cfg.train.hr_rate) {
    throw ConfigError("input is at " + std::to_string(lr.sample_rate) + " Hz but the checkpoint expects " +
                      std::to_string(cfg.train.hr_rate / ratio) + " Hz");
  }
  const auto hr = flow::super_resolve(lr, model, ratio, {o.temperature, o.seed});
  audio::write_wav(hr, o.out);
  out << "wrote " << hr.samples.size() << " samples at " << hr.sample_rate << " Hz to " << o.out.string() << "\n";
  return 0;
}

int cmd_eval(const EvalOptions& o, std::ostream& out, std::ostream& err) {
  struct Row {
    std::string name;
    double snr = 0, lsd = 0;
    std::string error;
  };
  std::vector<Row> rows;
  std::vector<std::string> unmatched;
  for (const auto& p : list_wavs(o.ref)) {
    if (fs::exists(o.hyp / p.filename())) {
      rows.push_back(Row{p.filename().string(), 0.0, 0.0, {}});
    } else {
      unmatched.push_back(p.filename().string() + " (no hypothesis)");
    }
  }
  for (const auto& p : list_wavs(o.hyp)) {
    if (!fs::exists(o.ref / p.filename())) unmatched.push_back(p.filename().string() + " (no reference)");
  }

  auto work = [&](Row& row) {
    try {
      auto ref = audio::read_wav(o.ref / row.name);
      auto hyp = audio::read_wav(o.hyp / row.name);
      if (ref.sample_rate != hyp.sample_rate) throw ShapeError("sample rates differ");
      const auto n = std::min(ref.samples.size(), hyp.samples.size());
      ref.samples.resize(n);
      hyp.samples.resize(n);
      row.snr = dsp::snr(ref, hyp, o.convention);
      row.lsd = dsp::lsd(dsp::pad_for_lsd(ref), dsp::pad_for_lsd(hyp));
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  };
  const unsigned threads = std::min<unsigned>(worker_threads(), std::max<std::size_t>(rows.size(), 1));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < rows.size();) work(rows[i]);
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::string csv = "file,snr_db,lsd\n";
  double snr_sum = 0, lsd_sum = 0;
  std::size_t ok = 0;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      err << "warning: skipping " << r.name << ": " << r.error << "\n";
      continue;
    }
    csv += r.name + "," + dsp::format_metric(r.snr) + "," + dsp::format_metric(r.lsd) + "\n";
    snr_sum += r.snr;
    lsd_sum += r.lsd;
    ++ok;
  }
  for (const auto& u : unmatched) err << "warning: unmatched file " << u << "\n";
  if (ok == 0) {
    err << "error: no file pair could be evaluated\n";
    return 1;
  }
  csv += "mean," + dsp::format_metric(snr_sum / ok) + "," + dsp::format_metric(lsd_sum / ok) + "\n";
  write_text(o.out, csv);
  out << csv;
  return 0;
}

int cmd_ablate(const AblateOptions& o, std::ostream& out, std::ostream& err) {
  std::string csv = "variant,c_cond,final_nll_per_dim\n";
  fs::create_directories(o.out);
  for (const auto& v : ablation_variants()) {
    TrainOptions t;
    t.config = o.config;
    t.data = o.data;
    t.out = o.out / v.name;
    t.overrides = o.overrides;
    t.ablation = v.switches;
    auto state = train::init_train_state(effective_config(t));
    const auto dataset = load_dataset(state.config.data_dir, state.config.train.hr_rate, err);
    train::TrainLoopOptions lo;
    lo.out_dir = state.config.out_dir;
    const auto rows = train::train_loop(state, dataset, lo);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", rows.empty() ? 0.0 : rows.back().nll_per_dim);
    const std::string line = std::string(v.name) + "," + std::to_string(state.model->cond_channels()) + "," + buf;
    out << line << "\n";
    csv += line + "\n";
  }
  write_text(o.out / "ablation.csv", csv);
  return 0;
}

int cmd_selftest(const SelftestOptions& o, std::ostream& out) {
  const auto results = run_selftest(o);
  out << format_results(results);
  const bool all = std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
  out << (all ? "all checks passed" : "some checks FAILED") << "\n";
  return all ? 0 : 1;
}

int cmd_spectrogram(const SpectrogramOptions& o, std::ostream& out) {
  const auto w = audio::read_wav(o.in);
  const auto img = dsp::spectrogram_image(w);
  dsp::write_pgm(img, o.out);
  out << "wrote " << img.width << "x" << img.height << " image to " << o.out.string() << "\n";
  return 0;
}

}  // namespace wsrglow::cli
