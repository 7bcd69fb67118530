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

#include "wsrglow/flow/model.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "wsrglow/common/error.hpp"
#include "wsrglow/common/rng.hpp"

namespace wsrglow::flow {

using ndgrad::Parameter;
using ndgrad::Shape;
using ndgrad::Tensor;

void ModelConfig::validate() const {
  if (n_flows == 0) throw ConfigError("n_flows must be positive");
  if (group != encoders::kGroup) {
    throw ConfigError("group must be " + std::to_string(encoders::kGroup) + " to align with the condition frames");
  }
  if (group % 2 != 0) throw ConfigError("group must be even");
  if (wn_layers == 0 || wn_layers > 30) throw ConfigError("wn_layers must be in [1, 30]");
  if (wn_channels == 0) throw ConfigError("wn_channels must be positive");
  if (kernel % 2 == 0) throw ConfigError("kernel must be odd");
  if (!(base_sigma > 0.0) || !std::isfinite(base_sigma)) throw ConfigError("base_sigma must be positive");
}

template <typename T>
Tensor<T> random_orthonormal(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = rng.normal();
  Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  Tensor<T> out({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) = static_cast<T>(q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  return out;
}

namespace {

template <typename T>
Tensor<T> uniform(Shape shape, double bound, Rng& rng) {
  Tensor<T> t(std::move(shape));
  for (auto& v : t.storage()) v = static_cast<T>((2.0 * rng.uniform() - 1.0) * bound);
  return t;
}

template <typename T>
Tensor<T> gaussian(Shape shape, double stddev, Rng& rng) {
  Tensor<T> t(std::move(shape));
  for (auto& v : t.storage()) v = static_cast<T>(stddev * rng.normal());
  return t;
}

// Default conv init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weight and bias.
template <typename T>
std::pair<Parameter<T>*, Parameter<T>*> conv(ndgrad::ParameterStore<T>& store, const std::string& name,
                                             std::size_t out, std::size_t in, std::size_t k, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in * k));
  auto& w = store.add(name + ".weight", uniform<T>({out, in, k}, bound, rng));
  auto& b = store.add(name + ".bias", uniform<T>({out}, bound, rng));
  return {&w, &b};
}

}  // namespace

template <typename T>
Model<T>::Model(const ModelConfig& config, const encoders::EncoderFlags& flags, std::uint64_t seed)
    : config_(config), flags_(flags), cond_channels_(encoders::condition_channels(flags)) {
  config_.validate();
  Rng rng(seed);
  if (flags_.lr_active()) {
    lr_.embed_table =
        &params_.add("enc.lr.embed", gaussian<T>({encoders::kLrCodes, encoders::kLrEmbedDim}, 0.01, rng));
  }
  if (flags_.phase_active()) {
    stft_.phase_embed_table = &params_.add(
        "enc.stft.phase_embed", gaussian<T>({encoders::kPhaseBins, encoders::kPhaseEmbedDim}, 0.01, rng));
  }

  const std::size_t c = config_.wn_channels;
  for (std::size_t f = 0; f < config_.n_flows; ++f) {
    const std::string prefix = "flow." + std::to_string(f);
    FlowLayerParams<T> layer;
    layer.mix = &params_.add(prefix + ".mix", random_orthonormal<T>(config_.group, rng.next_u64()));
    auto& wn = layer.wn;
    std::tie(wn.start_weight, wn.start_bias) = conv(params_, prefix + ".wn.start", c, config_.half(), 1, rng);
    for (std::size_t i = 0; i < config_.wn_layers; ++i) {
      const std::string lp = prefix + ".wn.layer." + std::to_string(i);
      WaveNetLayerParams<T> l;
      l.dilation = config_.dilation(i);
      std::tie(l.in_weight, l.in_bias) = conv(params_, lp + ".in", 2 * c, c, config_.kernel, rng);
      std::tie(l.cond_weight, l.cond_bias) = conv(params_, lp + ".cond", 2 * c, cond_channels_, 1, rng);
      if (i + 1 < config_.wn_layers) std::tie(l.res_weight, l.res_bias) = conv(params_, lp + ".res", c, c, 1, rng);
      std::tie(l.skip_weight, l.skip_bias) = conv(params_, lp + ".skip", c, c, 1, rng);
      wn.layers.push_back(l);
    }
    wn.end_weight = &params_.add(prefix + ".wn.end.weight", Tensor<T>({config_.group, c, 1}));
    wn.end_bias = &params_.add(prefix + ".wn.end.bias", Tensor<T>({config_.group}));
    layers_.push_back(std::move(layer));
  }
}

template class Model<float>;
template class Model<double>;
template Tensor<float> random_orthonormal<float>(std::size_t, std::uint64_t);
template Tensor<double> random_orthonormal<double>(std::size_t, std::uint64_t);

}  // namespace wsrglow::flow
