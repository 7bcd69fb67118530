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

#include "wsrglow/train/run_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wsrglow/common/error.hpp"

namespace wsrglow::train {

std::size_t TrainConfig::segment_length() const {
  const std::size_t unit = encoders::kGroup * static_cast<std::size_t>(ratio);
  return max_hr_samples / unit * unit;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename U>
U parse_number(const std::string& key, const std::string& v) {
  U out{};
  const auto* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError("bad value for " + key + ": '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("bad boolean for " + key + ": '" + v + "'");
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_bool(bool v) { return v ? "true" : "false"; }

}  // namespace

std::vector<std::string> RunConfig::keys() {
  return {"n_flows",    "group",     "wn_layers",     "wn_channels",   "kernel",        "base_sigma",
          "use_lr",     "use_stft",  "use_phase",     "use_magnitude", "stft_mode",     "lr",
          "beta1",      "beta2",     "adam_eps",      "batch",         "max_hr_samples", "iters",
          "seed",       "ratio",     "hr_rate",       "checkpoint_every", "clip_grad_norm", "snr_convention",
          "data_dir",   "out_dir"};
}

void RunConfig::set(const std::string& key, const std::string& v) {
  auto& m = model;
  auto& t = train;
  if (key == "n_flows") m.n_flows = parse_number<std::size_t>(key, v);
  else if (key == "group") m.group = parse_number<std::size_t>(key, v);
  else if (key == "wn_layers") m.wn_layers = parse_number<std::size_t>(key, v);
  else if (key == "wn_channels") m.wn_channels = parse_number<std::size_t>(key, v);
  else if (key == "kernel") m.kernel = parse_number<std::size_t>(key, v);
  else if (key == "base_sigma") m.base_sigma = parse_number<double>(key, v);
  else if (key == "use_lr") flags.use_lr = parse_bool(key, v);
  else if (key == "use_stft") flags.use_stft = parse_bool(key, v);
  else if (key == "use_phase") flags.use_phase = parse_bool(key, v);
  else if (key == "use_magnitude") flags.use_magnitude = parse_bool(key, v);
  else if (key == "stft_mode") flags.stft_mode = encoders::parse_stft_mode(v);
  else if (key == "lr") t.lr = parse_number<double>(key, v);
  else if (key == "beta1") t.beta1 = parse_number<double>(key, v);
  else if (key == "beta2") t.beta2 = parse_number<double>(key, v);
  else if (key == "adam_eps") t.adam_eps = parse_number<double>(key, v);
  else if (key == "batch") t.batch = parse_number<std::size_t>(key, v);
  else if (key == "max_hr_samples") t.max_hr_samples = parse_number<std::size_t>(key, v);
  else if (key == "iters") t.iters = parse_number<std::size_t>(key, v);
  else if (key == "seed") t.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "ratio") t.ratio = parse_number<int>(key, v);
  else if (key == "hr_rate") t.hr_rate = parse_number<int>(key, v);
  else if (key == "checkpoint_every") t.checkpoint_every = parse_number<std::size_t>(key, v);
  else if (key == "clip_grad_norm") t.clip_grad_norm = parse_number<double>(key, v);
  else if (key == "snr_convention") snr_convention = dsp::parse_snr_convention(v);
  else if (key == "data_dir") data_dir = v;
  else if (key == "out_dir") out_dir = v;
  else throw ConfigError("unknown config key '" + key + "'");
}

std::string RunConfig::to_text() const {
  std::ostringstream os;
  os << "# model\n"
     << "n_flows = " << model.n_flows << '\n'
     << "group = " << model.group << '\n'
     << "wn_layers = " << model.wn_layers << '\n'
     << "wn_channels = " << model.wn_channels << '\n'
     << "kernel = " << model.kernel << '\n'
     << "base_sigma = " << fmt_double(model.base_sigma) << '\n'
     << "# encoders\n"
     << "use_lr = " << fmt_bool(flags.use_lr) << '\n'
     << "use_stft = " << fmt_bool(flags.use_stft) << '\n'
     << "use_phase = " << fmt_bool(flags.use_phase) << '\n'
     << "use_magnitude = " << fmt_bool(flags.use_magnitude) << '\n'
     << "stft_mode = " << encoders::to_string(flags.stft_mode) << '\n'
     << "# training\n"
     << "lr = " << fmt_double(train.lr) << '\n'
     << "beta1 = " << fmt_double(train.beta1) << '\n'
     << "beta2 = " << fmt_double(train.beta2) << '\n'
     << "adam_eps = " << fmt_double(train.adam_eps) << '\n'
     << "batch = " << train.batch << '\n'
     << "max_hr_samples = " << train.max_hr_samples << '\n'
     << "iters = " << train.iters << '\n'
     << "seed = " << train.seed << '\n'
     << "ratio = " << train.ratio << '\n'
     << "hr_rate = " << train.hr_rate << '\n'
     << "checkpoint_every = " << train.checkpoint_every << '\n'
     << "clip_grad_norm = " << fmt_double(train.clip_grad_norm) << '\n'
     << "# evaluation\n"
     << "snr_convention = " << dsp::to_string(snr_convention) << '\n'
     << "# paths\n"
     << "data_dir = " << data_dir << '\n'
     << "out_dir = " << out_dir << '\n';
  return os.str();
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void RunConfig::save(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot create " + path.string());
  os << to_text();
  if (!os) throw IoError("write failed: " + path.string());
}

void RunConfig::validate() const {
  model.validate();
  encoders::condition_channels(flags);
  if (train.ratio != 2 && train.ratio != 4) throw ConfigError("ratio must be 2 or 4");
  if (train.batch == 0) throw ConfigError("batch must be positive");
  if (train.segment_length() == 0) throw ConfigError("max_hr_samples is smaller than one frame group");
  if (train.hr_rate <= 0 || train.hr_rate % train.ratio != 0) {
    throw ConfigError("hr_rate must be a positive multiple of ratio");
  }
  if (!(train.lr > 0.0)) throw ConfigError("lr must be positive");
}

}  // namespace wsrglow::train
