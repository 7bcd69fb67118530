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
#include <complex>
#include <filesystem>
#include <numbers>

#include "wsrglow/common/error.hpp"
#include "wsrglow/common/rng.hpp"
#include "wsrglow/dsp/fft.hpp"
#include "wsrglow/dsp/metrics.hpp"
#include "wsrglow/dsp/mulaw.hpp"
#include "wsrglow/dsp/resample.hpp"
#include "wsrglow/dsp/spectrogram.hpp"
#include "wsrglow/dsp/stft.hpp"

using namespace wsrglow;
using namespace wsrglow::dsp;
using audio::Waveform;
constexpr double kPi = std::numbers::pi;

namespace {

Waveform sine(double freq, int rate, std::size_t n, double amp = 1.0) {
  Waveform w;
  w.sample_rate = rate;
  for (std::size_t i = 0; i < n; ++i) w.samples.push_back(static_cast<float>(amp * std::sin(2 * kPi * freq * i / rate)));
  return w;
}

std::complex<double> naive_bin(const std::vector<double>& x, std::size_t b) {
  std::complex<double> s = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * std::polar(1.0, -2 * kPi * double(b * i % x.size()) / n);
  return s;
}

// Least-squares amplitude of a sinusoid at a known frequency.
double fitted_amplitude(const Waveform& w, double freq, std::size_t skip) {
  double ss = 0, sc = 0, cc = 0, ys = 0, yc = 0;
  for (std::size_t i = skip; i + skip < w.samples.size(); ++i) {
    const double ph = 2 * kPi * freq * i / w.sample_rate;
    const double s = std::sin(ph), c = std::cos(ph);
    ss += s * s, sc += s * c, cc += c * c;
    ys += w.samples[i] * s, yc += w.samples[i] * c;
  }
  const double det = ss * cc - sc * sc;
  const double a = (ys * cc - yc * sc) / det, b = (yc * ss - ys * sc) / det;
  return std::hypot(a, b);
}

}  // namespace

TEST_CASE("mu-law encode and decode") {
  CHECK(mulaw_encode(0.0) == 0.0);
  CHECK(mulaw_encode(1.0) == 1.0);
  CHECK(mulaw_encode(-1.0) == -1.0);
  CHECK(mulaw_encode(0.1) == doctest::Approx(std::log(26.5) / std::log(256.0)).epsilon(1e-15));
  CHECK(mulaw_encode(-0.1) == doctest::Approx(-std::log(26.5) / std::log(256.0)).epsilon(1e-15));
  CHECK(mulaw_decode(0.0) == 0.0);
  CHECK(mulaw_decode(1.0) == 1.0);
  CHECK(std::abs(mulaw_decode(mulaw_encode(0.3)) - 0.3) < 1e-6);
  for (int i = -1000; i <= 1000; ++i) {
    const double x = i / 1000.0;
    CHECK(std::abs(mulaw_decode(mulaw_encode(x)) - x) < 1e-12);
  }
  CHECK_THROWS_AS(mulaw_encode(1.0001), DomainError);
  CHECK_THROWS_AS(mulaw_decode(-1.5), DomainError);
}

TEST_CASE("quantize_256") {
  CHECK(quantize_256(-1.0) == 0);
  CHECK(quantize_256(1.0) == 255);
  CHECK(quantize_256(0.0) == 128);
  CHECK(quantize_256(-1e-12) == 127);
  CHECK(quantize_256(2.0 / 256 - 1) == 1);
  CHECK_THROWS_AS(quantize_256(1.5), DomainError);
  for (int c = 0; c < 256; ++c) CHECK(quantize_256(dequantize_256(c)) == c);
}

TEST_CASE("fft matches a naive DFT") {
  Rng rng(1);
  std::vector<double> x(64);
  for (auto& v : x) v = rng.normal();
  const auto X = rfft(x);
  REQUIRE(X.size() == 33);
  for (std::size_t b = 0; b < X.size(); ++b) CHECK(std::abs(X[b] - naive_bin(x, b)) < 1e-11);
  std::vector<std::complex<double>> odd(6);
  CHECK_THROWS_AS(fft_inplace(odd), DomainError);
}

TEST_CASE("stft examples") {
  Waveform zeros{std::vector<float>(16, 0.0f), 8000};
  auto s = stft(zeros, 8, 8);
  CHECK(s.frames == 2);
  CHECK(s.bins == 5);
  for (const auto& v : s.values) CHECK(v == std::complex<double>(0, 0));

  Waveform ones{std::vector<float>(8, 1.0f), 8000};
  s = stft(ones, 8, 8);
  CHECK(s.at(0, 0) == std::complex<double>(8, 0));
  for (std::size_t b = 1; b < 5; ++b) CHECK(std::abs(s.at(0, b)) < 1e-15);

  Waveform impulse{std::vector<float>(8, 0.0f), 8000};
  impulse.samples[0] = 1;
  s = stft(impulse, 8, 8);
  for (std::size_t b = 0; b < 5; ++b) CHECK(s.at(0, b) == std::complex<double>(1, 0));

  CHECK_THROWS_AS(stft(Waveform{std::vector<float>(10, 0.0f), 8000}, 8, 8), DomainError);
  CHECK_THROWS_AS(stft(Waveform{std::vector<float>(12, 0.0f), 8000}, 6, 6), DomainError);
}

TEST_CASE("stft frames match a naive DFT and satisfy Parseval") {
  Rng rng(2);
  Waveform w;
  w.sample_rate = 8000;
  for (int i = 0; i < 64; ++i) w.samples.push_back(static_cast<float>(rng.uniform() - 0.5));
  const auto s = stft(w, 32, 16);
  CHECK(s.frames == 4);
  for (std::size_t f = 0; f < s.frames; ++f) {
    std::vector<double> frame(32, 0.0);
    for (std::size_t n = 0; n < 32 && f * 16 + n < 64; ++n) frame[n] = w.samples[f * 16 + n];
    for (std::size_t b = 0; b < s.bins; ++b) CHECK(std::abs(s.at(f, b) - naive_bin(frame, b)) < 1e-11);
    // Two-sided energy from the one-sided bins: interior bins appear twice.
    double spec = 0, time = 0;
    for (std::size_t b = 0; b < s.bins; ++b) spec += (b == 0 || b == 16 ? 1.0 : 2.0) * std::norm(s.at(f, b));
    for (double v : frame) time += v * v;
    CHECK(spec == doctest::Approx(32 * time).epsilon(1e-6));
  }
}

TEST_CASE("resampler design") {
  const auto d = design_resampler(48000, 12000);
  CHECK(d.up == 1);
  CHECK(d.down == 4);
  CHECK(d.kaiser_beta == 14.0);
  CHECK(d.taps.size() == 32 * 4 + 1);
  for (std::size_t i = 0; i < d.taps.size(); ++i) CHECK(d.taps[i] == doctest::Approx(d.taps[d.taps.size() - 1 - i]));
  const auto u = design_resampler(16000, 24000);
  CHECK(u.up == 3);
  CHECK(u.down == 2);
  CHECK_THROWS_AS(design_resampler(44100, 48000), DomainError);  // 160/147
  CHECK_THROWS_AS(design_resampler(0, 48000), DomainError);
}

TEST_CASE("resample behaviour") {
  const auto tone = sine(1000, 48000, 48000);
  SUBCASE("equal rates are the identity") {
    const auto same = resample(tone, 48000);
    CHECK(same.samples == tone.samples);
    CHECK(same.sample_rate == 48000);
  }
  SUBCASE("1 kHz through 48k to 24k keeps its amplitude") {
    const auto out = resample(tone, 24000);
    CHECK(out.samples.size() == 24000);
    CHECK(out.sample_rate == 24000);
    const double db = 20 * std::log10(fitted_amplitude(out, 1000, 200));
    CHECK(std::abs(db) <= 0.5);
  }
  SUBCASE("10 kHz is removed going to 12k") {
    const auto out = resample(sine(10000, 48000, 48000), 12000);
    double e = 0;
    std::size_t n = 0;
    for (std::size_t i = 200; i + 200 < out.samples.size(); ++i, ++n) e += double(out.samples[i]) * out.samples[i];
    CHECK(10 * std::log10(e / n) <= -60.0);
  }
  SUBCASE("zero crossings and alignment survive upsampling") {
    const auto lr = sine(440, 12000, 12000);
    const auto hr = resample(lr, 48000);
    CHECK(hr.samples.size() == 48000);
    auto crossings = [](const Waveform& w) {
      int c = 0;
      for (std::size_t i = 1; i < w.samples.size(); ++i) c += (w.samples[i - 1] < 0) != (w.samples[i] < 0);
      return c;
    };
    CHECK(std::abs(crossings(hr) - crossings(lr)) <= 1);
    // Delay compensation: output sample 4m sits on input sample m.
    for (std::size_t m = 1000; m < 1010; ++m) CHECK(hr.samples[4 * m] == doctest::Approx(lr.samples[m]).epsilon(5e-3));
  }
  SUBCASE("odd lengths floor") {
    Waveform w{std::vector<float>(101, 0.25f), 48000};
    CHECK(resample(w, 12000).samples.size() == 25);
    CHECK(resample(w, 32000).samples.size() == 67);
  }
}

TEST_CASE("snr examples and conventions") {
  CHECK(snr(std::vector<float>{2, 0}, std::vector<float>{1, 0}) == doctest::Approx(0.0));
  const double pos = snr(std::vector<float>{0.5f, -0.25f}, std::vector<float>{0.5f, -0.25f});
  CHECK(std::isinf(pos));
  CHECK(pos > 0);
  const double neg = snr(std::vector<float>{1, 1}, std::vector<float>{0, 0});
  CHECK(std::isinf(neg));
  CHECK(neg < 0);
  // classic: |x|^2 / |x - y|^2 = 4 / 1
  CHECK(snr(std::vector<float>{2, 0}, std::vector<float>{1, 0}, SnrConvention::kClassic) ==
        doctest::Approx(10 * std::log10(4.0)));
  CHECK_THROWS_AS(snr(std::vector<float>{1, 2}, std::vector<float>{1}), ShapeError);
  CHECK(parse_snr_convention("classic") == SnrConvention::kClassic);
  CHECK_THROWS_AS(parse_snr_convention("other"), ConfigError);
  CHECK(format_metric(pos) == "inf");
  CHECK(format_metric(neg) == "-inf");
  CHECK(format_metric(1.5) == "1.500000");
}

TEST_CASE("lsd examples") {
  Rng rng(3);
  Waveform x;
  x.sample_rate = 16000;
  for (int i = 0; i < 4096; ++i) x.samples.push_back(static_cast<float>(rng.normal() * 0.3));
  CHECK(lsd(x, x) == 0.0);

  // Scaling by sqrt(10) multiplies every bin power by 10: log10 offset 1.
  Waveform y = x;
  for (auto& v : y.samples) v = static_cast<float>(v * std::sqrt(10.0));
  CHECK(lsd(x, y) == doctest::Approx(1.0).epsilon(1e-4));

  // Half-amplitude sine, two-line oracle: each bin's log power shifts by
  // log10(4) except where the floor dominates.
  const auto s = sine(1000, 16000, 2048);
  const auto h = sine(1000, 16000, 2048, 0.5);
  std::vector<double> xs(s.samples.begin(), s.samples.end()), hs(h.samples.begin(), h.samples.end());
  double acc = 0;
  for (std::size_t b = 0; b <= 1024; ++b) {
    const double d = std::log10(std::norm(naive_bin(xs, b)) + 1e-10) - std::log10(std::norm(naive_bin(hs, b)) + 1e-10);
    acc += d * d;
  }
  CHECK(lsd(s, h) == doctest::Approx(std::sqrt(acc / 1025)).epsilon(1e-6));

  CHECK_THROWS_AS(lsd(Waveform{std::vector<float>(1000, 0.f), 8000}, Waveform{std::vector<float>(1000, 0.f), 8000}),
                  DomainError);
  CHECK(pad_for_lsd(Waveform{std::vector<float>(1000, 0.f), 8000}).samples.size() == 2048);
  CHECK(pad_for_lsd(Waveform{std::vector<float>(4097, 0.f), 8000}).samples.size() == 6144);
}

TEST_CASE("spectrogram images") {
  SUBCASE("silence is uniform zero") {
    const auto img = spectrogram_image(Waveform{std::vector<float>(4096, 0.0f), 16000});
    CHECK(img.height == 257);
    for (auto p : img.pixels) CHECK(p == 0);
  }
  SUBCASE("a tone is one bright band") {
    const auto img = spectrogram_image(sine(2000, 16000, 16000, 0.5));
    // 2 kHz at 16 kHz with frame 512 sits in bin 64; row 0 is the top bin.
    const std::size_t row = img.height - 1 - 64;
    const std::size_t col = img.width / 2;
    CHECK(img.at(row, col) == 255);
    CHECK(img.at(row - 20, col) < 64);
    CHECK(img.at(row + 20, col) < 64);
  }
  SUBCASE("upsampled band-limited audio leaves the upper half dark") {
    Rng rng(4);
    Waveform lr;
    lr.sample_rate = 12000;
    for (int i = 0; i < 12000; ++i) lr.samples.push_back(static_cast<float>(0.3 * rng.normal()));
    const auto img = spectrogram_image(resample(lr, 48000));
    double upper = 0, lower = 0;
    for (std::size_t r = 0; r < img.height; ++r)
      for (std::size_t c = 0; c < img.width; ++c) (r < img.height * 3 / 4 - 10 ? upper : lower) += img.at(r, c);
    upper /= double(img.width) * (img.height * 3 / 4 - 10);
    lower /= double(img.width) * (img.height - (img.height * 3 / 4 - 10));
    CHECK(upper < 0.25 * lower);
  }
  SUBCASE("pgm round trip") {
    const auto img = spectrogram_image(sine(440, 8000, 2000, 0.5));
    const auto p = std::filesystem::path(WSRGLOW_TEST_TMP) / "spec.pgm";
    std::filesystem::create_directories(p.parent_path());
    write_pgm(img, p);
    const auto back = read_pgm(p);
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.pixels == img.pixels);
  }
}
