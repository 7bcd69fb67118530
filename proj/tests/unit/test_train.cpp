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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "wsrglow/common/error.hpp"
#include "wsrglow/common/rng.hpp"
#include "wsrglow/train/adam.hpp"
#include "wsrglow/train/batch.hpp"
#include "wsrglow/train/checkpoint.hpp"
#include "wsrglow/train/trainer.hpp"

using namespace wsrglow;
using namespace wsrglow::train;
using audio::Waveform;
using ndgrad::Tensor;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::path(WSRGLOW_TEST_TMP) / "train" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

Waveform clip(std::size_t n, std::uint64_t seed, int rate = 48000) {
  Rng rng(seed);
  Waveform w;
  w.sample_rate = rate;
  for (std::size_t i = 0; i < n; ++i) {
    w.samples.push_back(static_cast<float>(0.4 * std::sin(0.05 * i) + 0.1 * (2 * rng.uniform() - 1)));
  }
  return w;
}

RunConfig tiny_run() {
  RunConfig c;
  c.model.n_flows = 2;
  c.model.wn_layers = 2;
  c.model.wn_channels = 8;
  c.train.batch = 2;
  c.train.max_hr_samples = 256;
  c.train.ratio = 2;
  c.train.iters = 6;
  c.train.checkpoint_every = 3;
  c.train.lr = 1e-3;
  c.train.seed = 5;
  return c;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// Drops the wall-clock column.
std::string strip_wall(const std::string& csv) {
  std::istringstream is(csv);
  std::string line, out;
  while (std::getline(is, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

}  // namespace

TEST_CASE("adam single and two-step traces") {
  ndgrad::ParameterStore<double> ps;
  auto& p = ps.add("p", Tensor<double>({1}, {1.0}));
  auto& frozen = ps.add("f", Tensor<double>({1}, {3.0}), false);
  AdamConfig cfg;
  auto st = init_adam(ps);

  p.grad[0] = 0;
  CHECK(adam_step(ps, st, cfg));
  CHECK(p.value[0] == 1.0);

  ps.zero_grad();
  st = init_adam(ps);
  p.grad[0] = 0.5;
  frozen.grad[0] = 1.0;
  adam_step(ps, st, cfg);
  CHECK(p.value[0] == doctest::Approx(1.0 - cfg.lr * 0.5 / (0.5 + cfg.eps)).epsilon(1e-15));
  CHECK(frozen.value[0] == 3.0);
  CHECK(st.step == 1);

  // Hand-rolled two-iteration trace with g = 1 both times.
  p.value[0] = 0.0;
  st = init_adam(ps);
  double m = 0, v = 0, x = 0;
  for (int t = 1; t <= 2; ++t) {
    p.grad[0] = 1.0;
    adam_step(ps, st, cfg);
    m = 0.9 * m + 0.1;
    v = 0.98 * v + 0.02;
    const double mh = m / (1 - std::pow(0.9, t)), vh = v / (1 - std::pow(0.98, t));
    x -= 1e-4 * mh / (std::sqrt(vh) + 1e-8);
  }
  CHECK(p.value[0] == doctest::Approx(x).epsilon(1e-14));
  CHECK(st.m[0][0] == doctest::Approx(0.19));
  CHECK(st.v[0][0] == doctest::Approx(0.0396));
}

TEST_CASE("adam skips non-finite gradients") {
  ndgrad::ParameterStore<double> ps;
  auto& p = ps.add("p", Tensor<double>({2}, {1.0, 2.0}));
  auto st = init_adam(ps);
  p.grad[0] = std::numeric_limits<double>::quiet_NaN();
  p.grad[1] = 1.0;
  CHECK_FALSE(adam_step(ps, st, {}));
  CHECK(st.skipped == 1);
  CHECK(st.step == 0);
  CHECK(p.value == Tensor<double>({2}, {1.0, 2.0}));
  p.grad[0] = std::numeric_limits<double>::infinity();
  CHECK_FALSE(adam_step(ps, st, {}));
  CHECK(st.skipped == 2);
}

TEST_CASE("gradient norm and clipping") {
  ndgrad::ParameterStore<double> ps;
  auto& p = ps.add("p", Tensor<double>({2}));
  p.grad = Tensor<double>({2}, {3.0, 4.0});
  CHECK(grad_norm(ps) == 5.0);
  clip_grad_norm(ps, 10.0);
  CHECK(p.grad == Tensor<double>({2}, {3.0, 4.0}));
  clip_grad_norm(ps, 1.0);
  CHECK(grad_norm(ps) == doctest::Approx(1.0));
}

TEST_CASE("segment length and batches") {
  TrainConfig c;
  CHECK(c.segment_length() == 8192);
  c.ratio = 2;
  CHECK(c.segment_length() == 8192);
  c.max_hr_samples = 8100;
  c.ratio = 4;
  CHECK(c.segment_length() == 8096);

  TrainConfig r4;
  r4.batch = 3;
  std::vector<Waveform> data{clip(20000, 1), clip(9000, 2)};
  Rng rng(3);
  auto b = make_batch(data, r4, rng);
  REQUIRE(b.size() == 3);
  for (const auto& pair : b) {
    CHECK(pair.hr.samples.size() == 8192);
    CHECK(pair.lr.samples.size() == 2048);
    CHECK(pair.lr.sample_rate == 12000);
  }
  TrainConfig r2 = r4;
  r2.ratio = 2;
  auto b2 = make_batch(data, r2, rng);
  CHECK(b2[0].lr.samples.size() == 4096);
  CHECK(b2[0].lr.sample_rate == 24000);

  TrainConfig one;
  one.batch = 1;
  Rng a(9), bb(9);
  CHECK(make_batch(data, one, a)[0].hr.samples == make_batch(data, one, bb)[0].hr.samples);

  std::vector<Waveform> short_only{clip(100, 4)};
  try {
    make_batch(short_only, one, rng);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("8192") != std::string::npos);
  }
  CHECK_THROWS_AS(make_batch({}, one, rng), ConfigError);
  std::vector<Waveform> wrong_rate{clip(9000, 5, 16000)};
  CHECK_THROWS_AS(make_batch(wrong_rate, one, rng), DomainError);
}

TEST_CASE("run config text") {
  auto c = tiny_run();
  c.flags.use_phase = false;
  c.flags.stft_mode = encoders::StftMode::kRectangular;
  c.snr_convention = dsp::SnrConvention::kClassic;
  c.data_dir = "some/dir";
  c.train.beta2 = 0.123456789012345678;
  CHECK(RunConfig::parse(c.to_text()) == c);
  CHECK(RunConfig::parse("# comment\n\n  iters = 7  # trailing\n").train.iters == 7);
  CHECK_THROWS_AS(RunConfig::parse("bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("iters = many\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("iters\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("use_lr = maybe\n"), ConfigError);
  RunConfig none;
  none.flags.use_lr = false;
  none.flags.use_stft = false;
  CHECK_THROWS_AS(none.validate(), ConfigError);
  for (const auto& key : RunConfig::keys()) CHECK(c.to_text().find(key + " = ") != std::string::npos);
}

TEST_CASE("checkpoint encoding") {
  auto state = init_train_state(tiny_run());
  state.adam.step = 3;
  state.adam.m[0][0] = 0.25f;
  state.iteration = 42;
  state.rng.next_u64();
  const auto ckpt = state.checkpoint();
  const auto bytes = encode_checkpoint(ckpt);
  CHECK(std::string(bytes.data(), 4) == "WSRG");
  const auto back = decode_checkpoint(bytes);
  CHECK(back == ckpt);
  CHECK(encode_checkpoint(back) == bytes);

  const auto dir = fresh_dir("ckpt");
  save_checkpoint(dir / "a.wsrg", ckpt);
  CHECK(load_checkpoint(dir / "a.wsrg") == ckpt);

  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_WITH_AS(decode_checkpoint(bad), doctest::Contains("bad magic"), FormatError);
  bad = bytes;
  bad[4] = 2;
  CHECK_THROWS_WITH_AS(decode_checkpoint(bad), doctest::Contains("version"), FormatError);
  // Cut inside the values of the third parameter tensor.
  const std::string third = ckpt.params[2].name;
  const auto pos = std::string(bytes.begin(), bytes.end()).find(third);
  REQUIRE(pos != std::string::npos);
  bad.assign(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(pos + third.size() + 20));
  CHECK_THROWS_WITH_AS(decode_checkpoint(bad), doctest::Contains("unexpected end"), FormatError);
  CHECK_THROWS_WITH_AS(decode_checkpoint(bad), doctest::Contains(third.c_str()), FormatError);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.wsrg"), IoError);

  auto resumed = resume_train_state(back);
  CHECK(resumed.iteration == 42);
  CHECK(resumed.adam.step == 3);
  CHECK(resumed.adam.m[0][0] == 0.25f);
  CHECK(resumed.rng.state() == state.rng.state());
}

TEST_CASE("checkpoints refuse models built with other flags") {
  auto state = init_train_state(tiny_run());
  const auto ckpt = state.checkpoint();
  encoders::EncoderFlags no_phase;
  no_phase.use_phase = false;
  flow::Model<float> other(tiny_run().model, no_phase, 0);
  CHECK_THROWS_AS(restore_parameters(ckpt, other), ConfigError);
  flow::Model<double> wrong_dtype(tiny_run().model, {}, 0);
  CHECK_THROWS_AS(restore_parameters(ckpt, wrong_dtype), ConfigError);
}

TEST_CASE("training loop") {
  std::vector<Waveform> data{clip(3000, 11), clip(2000, 12)};

  SUBCASE("zero iterations leave the model unchanged") {
    auto cfg = tiny_run();
    cfg.train.iters = 0;
    auto state = init_train_state(cfg);
    const auto before = state.checkpoint();
    const auto dir = fresh_dir("zero");
    auto rows = train_loop(state, data, {dir});
    CHECK(rows.empty());
    CHECK(read_file(dir / "train_log.csv") == std::string(kLogHeader) + "\n");
    CHECK(state.checkpoint() == before);
  }

  SUBCASE("loss decreases, logs are reproducible and resume is exact") {
    const auto d1 = fresh_dir("run1"), d2 = fresh_dir("run2"), d3 = fresh_dir("run3");
    auto s1 = init_train_state(tiny_run());
    auto rows = train_loop(s1, data, {d1});
    REQUIRE(rows.size() == 6);
    CHECK(rows.back().nll_per_dim < rows.front().nll_per_dim);
    CHECK(fs::exists(d1 / "ckpt_00000003.wsrg"));
    CHECK(fs::exists(d1 / "ckpt_00000006.wsrg"));
    CHECK(fs::exists(d1 / "final.wsrg"));
    CHECK(RunConfig::load(d1 / "config.txt") == tiny_run());

    auto s2 = init_train_state(tiny_run());
    train_loop(s2, data, {d2});
    CHECK(strip_wall(read_file(d1 / "train_log.csv")) == strip_wall(read_file(d2 / "train_log.csv")));

    fs::copy_file(d1 / "ckpt_00000003.wsrg", d3 / "ckpt_00000003.wsrg");
    auto s3 = resume_train_state(load_checkpoint(d3 / "ckpt_00000003.wsrg"));
    auto tail = train_loop(s3, data, {d3});
    REQUIRE(tail.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(tail[i].iter == rows[3 + i].iter);
      CHECK(tail[i].nll_per_dim == rows[3 + i].nll_per_dim);
      CHECK(tail[i].grad_norm == rows[3 + i].grad_norm);
    }
    CHECK(s3.checkpoint() == s1.checkpoint());
  }

  SUBCASE("a NaN loss aborts and names the last good checkpoint") {
    const auto dir = fresh_dir("nan");
    auto cfg = tiny_run();
    cfg.train.checkpoint_every = 2;
    auto s = init_train_state(cfg);
    TrainLoopOptions opt{dir, 2, {}};
    train_loop(s, data, opt);
    s.model->layers()[0].wn.end_bias->value[0] = std::numeric_limits<float>::quiet_NaN();
    opt.stop_at = 4;
    CHECK_THROWS_WITH_AS(train_loop(s, data, opt), doctest::Contains("ckpt_00000002.wsrg"), NumericError);
  }

  SUBCASE("every encoder variant trains one iteration") {
    for (int v = 0; v < 5; ++v) {
      auto cfg = tiny_run();
      cfg.train.iters = 1;
      if (v == 1) cfg.flags.use_stft = false;
      if (v == 2) cfg.flags.use_phase = false;
      if (v == 3) cfg.flags.use_magnitude = false;
      if (v == 4) cfg.flags.use_lr = false;
      auto s = init_train_state(cfg);
      const std::size_t expected[] = {2303, 2048, 2053, 2298, 255};
      CHECK(s.model->cond_channels() == expected[v]);
      auto rows = train_loop(s, data);
      REQUIRE(rows.size() == 1);
      CHECK(std::isfinite(rows[0].nll_per_dim));
    }
  }
}
