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

#include "wsrglow/train/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

#include "wsrglow/common/error.hpp"

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace wsrglow::train {
namespace {

constexpr char kMagic[4] = {'W', 'S', 'R', 'G'};

class Writer {
 public:
  template <typename U>
  void pod(U v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    buf_.insert(buf_.end(), p, p + sizeof(U));
  }
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const char*>(data);
    buf_.insert(buf_.end(), p, p + n);
  }
  void str(const std::string& s) {
    pod(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<char> take() { return std::move(buf_); }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  explicit Reader(const std::vector<char>& buf) : buf_(buf) {}

  void need(std::size_t n, const std::string& what) const {
    if (buf_.size() - pos_ < n) throw FormatError("checkpoint: unexpected end while reading " + what);
  }
  template <typename U>
  U pod(const std::string& what) {
    need(sizeof(U), what);
    U v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(U));
    pos_ += sizeof(U);
    return v;
  }
  void bytes(void* out, std::size_t n, const std::string& what) {
    need(n, what);
    if (n) std::memcpy(out, buf_.data() + pos_, n);
    pos_ += n;
  }
  std::string str(const std::string& what) {
    const auto n = pod<std::uint32_t>(what);
    std::string s(n, '\0');
    bytes(s.data(), n, what);
    return s;
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  const std::vector<char>& buf_;
  std::size_t pos_ = 0;
};

void write_tensor(Writer& w, const NamedTensor& t) {
  w.str(t.name);
  std::visit(
      [&](const auto& tensor) {
        using V = typename std::decay_t<decltype(tensor)>::value_type;
        w.pod(static_cast<std::uint8_t>(ndgrad::dtype_of<V>()));
        if (tensor.rank() > 255) throw_shape("checkpoint: rank too large for " + t.name);
        w.pod(static_cast<std::uint8_t>(tensor.rank()));
        for (std::size_t d : tensor.shape()) w.pod(static_cast<std::uint64_t>(d));
        w.bytes(tensor.data(), tensor.size() * sizeof(V));
      },
      t.value);
}

template <typename V>
ndgrad::Tensor<V> read_values(Reader& r, ndgrad::Shape shape, const std::string& name) {
  ndgrad::Tensor<V> t(std::move(shape));
  const std::size_t n = t.size();
  // Guard the multiplication before trusting header dims.
  if (n > (std::size_t{1} << 40) / sizeof(V)) throw FormatError("checkpoint: implausible size for tensor '" + name + "'");
  r.bytes(t.data(), n * sizeof(V), "tensor '" + name + "'");
  return t;
}

NamedTensor read_tensor(Reader& r, std::size_t index) {
  NamedTensor t;
  t.name = r.str("name of tensor #" + std::to_string(index));
  const std::string what = "tensor '" + t.name + "'";
  const auto dtype = r.pod<std::uint8_t>(what);
  const auto rank = r.pod<std::uint8_t>(what);
  ndgrad::Shape shape(rank);
  std::size_t total = 1;
  for (auto& d : shape) {
    d = static_cast<std::size_t>(r.pod<std::uint64_t>(what));
    if (d != 0 && total > (std::size_t{1} << 40) / d) throw FormatError("checkpoint: implausible dims for " + what);
    total *= d;
  }
  if (dtype == static_cast<std::uint8_t>(ndgrad::DType::kFloat32)) {
    t.value = read_values<float>(r, std::move(shape), t.name);
  } else if (dtype == static_cast<std::uint8_t>(ndgrad::DType::kFloat64)) {
    t.value = read_values<double>(r, std::move(shape), t.name);
  } else {
    throw FormatError("checkpoint: unknown dtype tag " + std::to_string(dtype) + " for " + what);
  }
  return t;
}

void write_list(Writer& w, const std::vector<NamedTensor>& list) {
  w.pod(static_cast<std::uint32_t>(list.size()));
  for (const auto& t : list) write_tensor(w, t);
}

std::vector<NamedTensor> read_list(Reader& r, const std::string& what) {
  const auto n = r.pod<std::uint32_t>(what + " count");
  std::vector<NamedTensor> out;
  for (std::uint32_t i = 0; i < n; ++i) out.push_back(read_tensor(r, i));
  return out;
}

template <typename T>
const ndgrad::Tensor<T>& expect(const NamedTensor& nt, const ndgrad::Shape& shape) {
  const auto* t = std::get_if<ndgrad::Tensor<T>>(&nt.value);
  if (!t) throw ConfigError("checkpoint: tensor '" + nt.name + "' has the wrong dtype");
  if (t->shape() != shape) {
    throw ConfigError("checkpoint: tensor '" + nt.name + "' has shape " + ndgrad::to_string(t->shape()) +
                      ", model expects " + ndgrad::to_string(shape));
  }
  return *t;
}

}  // namespace

std::vector<char> encode_checkpoint(const Checkpoint& ckpt) {
  Writer w;
  w.bytes(kMagic, 4);
  w.pod(kCheckpointVersion);
  w.str(ckpt.config.to_text());
  write_list(w, ckpt.params);
  write_list(w, ckpt.optimizer);
  w.pod(ckpt.iteration);
  for (auto s : ckpt.rng) w.pod(s);
  return w.take();
}

Checkpoint decode_checkpoint(const std::vector<char>& bytes) {
  Reader r(bytes);
  char magic[4];
  r.bytes(magic, 4, "header");
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("checkpoint: bad magic");
  const auto version = r.pod<std::uint32_t>("header");
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version) + " (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint c;
  c.config = RunConfig::parse(r.str("config block"));
  c.params = read_list(r, "parameter");
  c.optimizer = read_list(r, "optimizer");
  c.iteration = r.pod<std::uint64_t>("iteration");
  for (auto& s : c.rng) s = r.pod<std::uint64_t>("rng state");
  if (!r.done()) throw FormatError("checkpoint: trailing bytes after rng state");
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto bytes = encode_checkpoint(ckpt);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

template <typename T>
Checkpoint make_checkpoint(const RunConfig& config, const flow::Model<T>& model, const AdamState<T>* adam,
                           std::uint64_t iteration, const Rng::State& rng) {
  Checkpoint c;
  c.config = config;
  c.config.model = model.config();
  c.config.flags = model.flags();
  for (const auto& p : model.params()) c.params.push_back({p.name, p.value});
  if (adam) {
    std::size_t i = 0;
    for (const auto& p : model.params()) {
      c.optimizer.push_back({"adam.m." + p.name, adam->m.at(i)});
      c.optimizer.push_back({"adam.v." + p.name, adam->v.at(i)});
      ++i;
    }
    c.optimizer.push_back({"adam.step", ndgrad::Tensor<double>::scalar(static_cast<double>(adam->step))});
    c.optimizer.push_back({"adam.skipped", ndgrad::Tensor<double>::scalar(static_cast<double>(adam->skipped))});
  }
  c.iteration = iteration;
  c.rng = rng;
  return c;
}

template <typename T>
void restore_parameters(const Checkpoint& ckpt, flow::Model<T>& model) {
  if (ckpt.params.size() != model.params().size()) {
    throw ConfigError("checkpoint holds " + std::to_string(ckpt.params.size()) + " parameters, model expects " +
                      std::to_string(model.params().size()) + " (encoder flags or model config differ)");
  }
  std::map<std::string, const NamedTensor*> by_name;
  for (const auto& t : ckpt.params) by_name[t.name] = &t;
  for (auto& p : model.params()) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) {
      throw ConfigError("checkpoint lacks parameter '" + p.name + "' (encoder flags or model config differ)");
    }
    p.value = expect<T>(*it->second, p.value.shape());
  }
}

template <typename T>
AdamState<T> restore_adam(const Checkpoint& ckpt, const ndgrad::ParameterStore<T>& params) {
  AdamState<T> s = init_adam(params);
  if (ckpt.optimizer.empty()) return s;
  std::map<std::string, const NamedTensor*> by_name;
  for (const auto& t : ckpt.optimizer) by_name[t.name] = &t;
  auto get = [&](const std::string& name) -> const NamedTensor& {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw ConfigError("checkpoint optimizer state lacks '" + name + "'");
    return *it->second;
  };
  std::size_t i = 0;
  for (const auto& p : params) {
    s.m[i] = expect<T>(get("adam.m." + p.name), p.value.shape());
    s.v[i] = expect<T>(get("adam.v." + p.name), p.value.shape());
    ++i;
  }
  s.step = static_cast<std::uint64_t>(expect<double>(get("adam.step"), {}).item());
  s.skipped = static_cast<std::uint64_t>(expect<double>(get("adam.skipped"), {}).item());
  return s;
}

template Checkpoint make_checkpoint(const RunConfig&, const flow::Model<float>&, const AdamState<float>*,
                                    std::uint64_t, const Rng::State&);
template Checkpoint make_checkpoint(const RunConfig&, const flow::Model<double>&, const AdamState<double>*,
                                    std::uint64_t, const Rng::State&);
template void restore_parameters(const Checkpoint&, flow::Model<float>&);
template void restore_parameters(const Checkpoint&, flow::Model<double>&);
template AdamState<float> restore_adam(const Checkpoint&, const ndgrad::ParameterStore<float>&);
template AdamState<double> restore_adam(const Checkpoint&, const ndgrad::ParameterStore<double>&);

}  // namespace wsrglow::train
