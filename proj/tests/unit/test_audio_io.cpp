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
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "wsrglow/audio_io.hpp"
#include "wsrglow/common/error.hpp"
#include "wsrglow/common/rng.hpp"

using namespace wsrglow;
using namespace wsrglow::audio;
namespace fs = std::filesystem;

namespace {

fs::path tmp(const std::string& name) {
  fs::path dir = fs::path(WSRGLOW_TEST_TMP) / "audio_io";
  fs::create_directories(dir);
  return dir / name;
}

void put16(std::string& s, std::uint16_t v) { s.append(reinterpret_cast<const char*>(&v), 2); }
void put32(std::string& s, std::uint32_t v) { s.append(reinterpret_cast<const char*>(&v), 4); }

// Hand-assembled RIFF file, independent of write_wav.
std::string riff(std::uint16_t tag, std::uint16_t channels, std::uint16_t bits, const std::string& payload,
                 bool extra_chunk = false) {
  std::string fmt;
  put16(fmt, tag);
  put16(fmt, channels);
  put32(fmt, 16000);
  put32(fmt, 16000u * channels * bits / 8);
  put16(fmt, static_cast<std::uint16_t>(channels * bits / 8));
  put16(fmt, bits);
  std::string body = "WAVE";
  body += "fmt ";
  put32(body, static_cast<std::uint32_t>(fmt.size()));
  body += fmt;
  if (extra_chunk) {
    body += "LIST";
    put32(body, 4);
    body += "abcd";
  }
  body += "data";
  put32(body, static_cast<std::uint32_t>(payload.size()));
  body += payload;
  std::string out = "RIFF";
  put32(out, static_cast<std::uint32_t>(body.size()));
  return out + body;
}

void dump(const fs::path& p, const std::string& bytes) {
  std::ofstream f(p, std::ios::binary);
  f << bytes;
}

std::string pcm(std::initializer_list<std::int16_t> v) {
  std::string s;
  for (auto x : v) put16(s, static_cast<std::uint16_t>(x));
  return s;
}

std::int16_t stored_pcm16(const fs::path& p, std::size_t index) {
  std::ifstream f(p, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const auto pos = bytes.find("data");
  std::int16_t v;
  std::memcpy(&v, bytes.data() + pos + 8 + 2 * index, 2);
  return v;
}

}  // namespace

TEST_CASE("pcm16 scale on read") {
  const auto p = tmp("scale.wav");
  dump(p, riff(1, 1, 16, pcm({0, -32768, 32767}), true));
  WavReadInfo info;
  const auto w = read_wav(p, &info);
  REQUIRE(w.samples.size() == 3);
  CHECK(w.sample_rate == 16000);
  CHECK(w.samples[0] == 0.0f);
  CHECK(w.samples[1] == -1.0f);
  CHECK(w.samples[2] == 32767.0f / 32768.0f);
  CHECK(info.channels == 1);
  CHECK(info.clamped == 0);
}

TEST_CASE("stereo is mixed by mean") {
  const auto p = tmp("stereo.wav");
  dump(p, riff(1, 2, 16, pcm({16384, 0, -8192, -8192})));
  const auto w = read_wav(p);
  REQUIRE(w.samples.size() == 2);
  CHECK(w.samples[0] == 0.25f);
  CHECK(w.samples[1] == -0.25f);
}

TEST_CASE("float32 reads clamp and count out-of-range values") {
  std::string payload;
  for (float v : {0.5f, 1.5f, -2.0f, std::numeric_limits<float>::quiet_NaN()}) {
    payload.append(reinterpret_cast<const char*>(&v), 4);
  }
  const auto p = tmp("float.wav");
  dump(p, riff(3, 1, 32, payload));
  WavReadInfo info;
  const auto w = read_wav(p, &info);
  CHECK(info.format == SampleFormat::kFloat32);
  CHECK(info.clamped == 3);
  CHECK(w.samples[0] == 0.5f);
  CHECK(w.samples[1] == 1.0f);
  CHECK(w.samples[2] == -1.0f);
  CHECK(std::isfinite(w.samples[3]));
}

TEST_CASE("write pcm16 rounding") {
  const auto p = tmp("round.wav");
  write_wav({{0.5f, 1.0f, -1.0f, 0.0f, 3.0f}, 8000}, p);
  CHECK(stored_pcm16(p, 0) == 16384);  // round(16383.5) away from zero
  CHECK(stored_pcm16(p, 1) == 32767);
  CHECK(stored_pcm16(p, 2) == -32767);
  CHECK(stored_pcm16(p, 3) == 0);
  CHECK(stored_pcm16(p, 4) == 32767);
}

TEST_CASE("float32 round trip is lossless") {
  Rng rng(1);
  Waveform w;
  w.sample_rate = 44100;
  for (int i = 0; i < 1000; ++i) w.samples.push_back(static_cast<float>(2 * rng.uniform() - 1));
  const auto p = tmp("lossless.wav");
  write_wav(w, p, SampleFormat::kFloat32);
  const auto r = read_wav(p);
  CHECK(r.sample_rate == w.sample_rate);
  CHECK(r.samples == w.samples);
}

TEST_CASE("pcm16 round trip error") {
  // Write scales by 32767 and read by 32768, so the per-sample error is
  // |x|/32768 plus half a step. The 1/32767 bound therefore holds for
  // |x| <= 0.5; near full scale the error reaches about 1.5/32768.
  Rng rng(2);
  Waveform w;
  w.sample_rate = 16000;
  for (int i = 0; i < 20000; ++i) w.samples.push_back(static_cast<float>(rng.uniform() - 0.5));
  const auto p = tmp("pcm_rt.wav");
  write_wav(w, p);
  const auto r = read_wav(p);
  double worst = 0;
  for (std::size_t i = 0; i < w.samples.size(); ++i) worst = std::max(worst, double(std::abs(r.samples[i] - w.samples[i])));
  CHECK(worst <= 1.0 / 32767);

  Waveform full{{1.0f, -1.0f, 0.99999f}, 16000};
  write_wav(full, p);
  const auto rf = read_wav(p);
  for (std::size_t i = 0; i < full.samples.size(); ++i) {
    CHECK(std::abs(rf.samples[i] - full.samples[i]) <= 1.5 / 32768 + 1e-9);
  }
}

TEST_CASE("malformed files") {
  const auto p = tmp("bad.wav");
  dump(p, "RIFX1234WAVE");
  CHECK_THROWS_AS(read_wav(p), FormatError);
  auto ok = riff(1, 1, 16, pcm({1, 2, 3, 4}));
  dump(p, ok.substr(0, ok.size() - 3));
  CHECK_THROWS_AS(read_wav(p), FormatError);
  dump(p, riff(2, 1, 16, pcm({1, 2})));  // ADPCM tag
  CHECK_THROWS_AS(read_wav(p), FormatError);
  dump(p, riff(1, 1, 24, std::string(6, '\0')));
  CHECK_THROWS_AS(read_wav(p), FormatError);
  CHECK_THROWS_AS(read_wav(tmp("missing.wav")), IoError);
}

TEST_CASE("segment windows") {
  auto make = [](std::size_t n) {
    Waveform w;
    w.sample_rate = 8000;
    for (std::size_t i = 0; i < n; ++i) w.samples.push_back(static_cast<float>(i));
    return w;
  };
  CHECK(segment(make(10), 10, 10).size() == 1);
  const auto two = segment(make(20), 8, 8);
  REQUIRE(two.size() == 2);
  CHECK(two[1].samples.front() == 8.0f);
  CHECK(two[1].samples.back() == 15.0f);
  CHECK(two[1].sample_rate == 8000);
  CHECK(segment(make(7), 8, 8).empty());
  const auto overlap = segment(make(10), 4, 2);
  REQUIRE(overlap.size() == 4);
  CHECK(overlap[3].samples.front() == 6.0f);
  CHECK_THROWS_AS(segment(make(10), 4, 5), DomainError);
  CHECK_THROWS_AS(segment(make(10), 4, 0), DomainError);
}
