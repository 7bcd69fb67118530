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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "wsrglow/audio_io.hpp"
#include "wsrglow/common/error.hpp"

namespace wsrglow::audio {
namespace {

static_assert(std::endian::native == std::endian::little, "WAV I/O assumes a little-endian host");

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

class Reader {
 public:
  Reader(std::vector<char> bytes, std::string origin) : bytes_(std::move(bytes)), origin_(std::move(origin)) {}

  template <typename U>
  U read() {
    U v;
    need(sizeof(U));
    std::memcpy(&v, bytes_.data() + pos_, sizeof(U));
    pos_ += sizeof(U);
    return v;
  }
  std::string tag() {
    need(4);
    std::string s(bytes_.data() + pos_, 4);
    pos_ += 4;
    return s;
  }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }
  const char* here() const { return bytes_.data() + pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  bool done() const { return pos_ >= bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) throw FormatError(origin_ + ": truncated WAV file");
  }
  std::vector<char> bytes_;
  std::string origin_;
  std::size_t pos_ = 0;
};

template <typename U>
void put(std::ofstream& os, U v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path, WavReadInfo* info) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  Reader r(std::move(bytes), path.string());

  if (r.tag() != "RIFF") throw FormatError(path.string() + ": not a RIFF file");
  r.read<std::uint32_t>();
  if (r.tag() != "WAVE") throw FormatError(path.string() + ": not a WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  while (!r.done()) {
    const std::string id = r.tag();
    const auto size = r.read<std::uint32_t>();
    if (id == "fmt ") {
      if (size < 16) throw FormatError(path.string() + ": fmt chunk too small");
      format = r.read<std::uint16_t>();
      channels = r.read<std::uint16_t>();
      rate = r.read<std::uint32_t>();
      r.read<std::uint32_t>();  // byte rate
      r.read<std::uint16_t>();  // block align
      bits = r.read<std::uint16_t>();
      std::size_t consumed = 16;
      if (format == kFormatExtensible && size >= 40) {
        r.read<std::uint16_t>();  // cbSize
        r.read<std::uint16_t>();  // valid bits
        r.read<std::uint32_t>();  // channel mask
        format = r.read<std::uint16_t>();
        consumed += 10;
      }
      r.skip(size - consumed + (size & 1U));
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw FormatError(path.string() + ": data chunk before fmt chunk");
      if (channels == 0) throw FormatError(path.string() + ": zero channels");
      const bool pcm16 = format == kFormatPcm && bits == 16;
      const bool f32 = format == kFormatFloat && bits == 32;
      if (!pcm16 && !f32) {
        throw FormatError(path.string() + ": unsupported codec (format " + std::to_string(format) + ", " +
                          std::to_string(bits) + " bits)");
      }
      const std::size_t bytes_per_sample = bits / 8;
      const std::size_t frame_bytes = bytes_per_sample * channels;
      if (r.remaining() < size) throw FormatError(path.string() + ": truncated data chunk");
      const std::size_t frames = size / frame_bytes;

      Waveform w;
      w.sample_rate = static_cast<int>(rate);
      w.samples.resize(frames);
      std::size_t clamped = 0;
      const char* base = r.here();
      for (std::size_t f = 0; f < frames; ++f) {
        double acc = 0;
        for (std::size_t c = 0; c < channels; ++c) {
          const char* p = base + f * frame_bytes + c * bytes_per_sample;
          if (pcm16) {
            std::int16_t v;
            std::memcpy(&v, p, 2);
            acc += static_cast<double>(v) / 32768.0;
          } else {
            float v;
            std::memcpy(&v, p, 4);
            acc += v;
          }
        }
        float s = channels == 1 ? static_cast<float>(acc) : static_cast<float>(acc / channels);
        if (!std::isfinite(s)) {
          s = 0.0f;
          ++clamped;
        } else if (s > 1.0f || s < -1.0f) {
          s = std::clamp(s, -1.0f, 1.0f);
          ++clamped;
        }
        w.samples[f] = s;
      }
      if (info) *info = WavReadInfo{channels, pcm16 ? SampleFormat::kPcm16 : SampleFormat::kFloat32, clamped};
      return w;
    } else {
      r.skip(size + (size & 1U));
    }
  }
  throw FormatError(path.string() + ": no data chunk");
}

void write_wav(const Waveform& w, const std::filesystem::path& path, SampleFormat format) {
  if (w.sample_rate <= 0) throw DomainError("write_wav: sample rate must be positive");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot create " + path.string());
  const bool pcm16 = format == SampleFormat::kPcm16;
  const std::uint16_t bits = pcm16 ? 16 : 32;
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.samples.size() * (bits / 8));

  os.write("RIFF", 4);
  put<std::uint32_t>(os, 36 + data_bytes);
  os.write("WAVE", 4);
  os.write("fmt ", 4);
  put<std::uint32_t>(os, 16);
  put<std::uint16_t>(os, pcm16 ? kFormatPcm : kFormatFloat);
  put<std::uint16_t>(os, 1);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(w.sample_rate));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(w.sample_rate) * (bits / 8));
  put<std::uint16_t>(os, bits / 8);
  put<std::uint16_t>(os, bits);
  os.write("data", 4);
  put<std::uint32_t>(os, data_bytes);
  if (pcm16) {
    std::vector<std::int16_t> buf(w.samples.size());
    for (std::size_t i = 0; i < buf.size(); ++i) {
      const double q = std::round(static_cast<double>(w.samples[i]) * 32767.0);
      buf[i] = static_cast<std::int16_t>(std::clamp(q, -32768.0, 32767.0));
    }
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 2));
  } else {
    os.write(reinterpret_cast<const char*>(w.samples.data()), static_cast<std::streamsize>(w.samples.size() * 4));
  }
  if (!os) throw IoError("write failed: " + path.string());
}

std::vector<Waveform> segment(const Waveform& w, std::size_t seg_len, std::size_t hop) {
  if (hop < 1 || seg_len < hop) throw DomainError("segment: need seg_len >= hop >= 1");
  std::vector<Waveform> out;
  for (std::size_t start = 0; start + seg_len <= w.samples.size(); start += hop) {
    Waveform s;
    s.sample_rate = w.sample_rate;
    s.samples.assign(w.samples.begin() + static_cast<std::ptrdiff_t>(start),
                     w.samples.begin() + static_cast<std::ptrdiff_t>(start + seg_len));
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace wsrglow::audio
