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

#include <cstdint>
#include <string>
#include <vector>

#include "wsrglow/encoders.hpp"
#include "wsrglow/ndgrad/graph.hpp"

namespace wsrglow::flow {

struct ModelConfig {
  std::size_t n_flows = 12;
  std::size_t group = 8;
  std::size_t wn_layers = 8;
  std::size_t wn_channels = 256;
  std::size_t kernel = 3;
  double base_sigma = 1.0;

  std::size_t half() const { return group / 2; }
  /// Dilation of conditioner layer i: 2^i.
  std::size_t dilation(std::size_t layer) const { return std::size_t{1} << layer; }
  /// Throws ConfigError on an unusable configuration.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

template <typename T>
struct WaveNetLayerParams {
  ndgrad::Parameter<T>* in_weight = nullptr;    // [2C, C, K]
  ndgrad::Parameter<T>* in_bias = nullptr;      // [2C]
  ndgrad::Parameter<T>* cond_weight = nullptr;  // [2C, C_cond, 1]
  ndgrad::Parameter<T>* cond_bias = nullptr;    // [2C]
  ndgrad::Parameter<T>* res_weight = nullptr;   // [C, C, 1]; null on the last layer
  ndgrad::Parameter<T>* res_bias = nullptr;
  ndgrad::Parameter<T>* skip_weight = nullptr;  // [C, C, 1]
  ndgrad::Parameter<T>* skip_bias = nullptr;
  std::size_t dilation = 1;
};

/// Conditioner of one coupling layer: non-causal gated dilated convolutions
/// with residual and skip paths.
template <typename T>
struct WaveNetParams {
  ndgrad::Parameter<T>* start_weight = nullptr;  // [C, group/2, 1]
  ndgrad::Parameter<T>* start_bias = nullptr;
  std::vector<WaveNetLayerParams<T>> layers;
  ndgrad::Parameter<T>* end_weight = nullptr;  // [group, C, 1], zero at init
  ndgrad::Parameter<T>* end_bias = nullptr;    // [group], zero at init
};

template <typename T>
struct FlowLayerParams {
  ndgrad::Parameter<T>* mix = nullptr;  // W, [group, group], orthonormal at init
  WaveNetParams<T> wn;
};

/// Complete conditional flow: encoder tables plus n_flows glow layers.
/// Parameter names are stable and used as checkpoint keys.
template <typename T>
class Model {
 public:
  Model(const ModelConfig& config, const encoders::EncoderFlags& flags, std::uint64_t seed);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return config_; }
  const encoders::EncoderFlags& flags() const { return flags_; }
  std::size_t cond_channels() const { return cond_channels_; }

  ndgrad::ParameterStore<T>& params() { return params_; }
  const ndgrad::ParameterStore<T>& params() const { return params_; }

  encoders::LREncoderParams<T> lr_encoder() const { return lr_; }
  encoders::STFTEncoderParams<T> stft_encoder() const { return stft_; }
  const std::vector<FlowLayerParams<T>>& layers() const { return layers_; }

 private:
  ModelConfig config_;
  encoders::EncoderFlags flags_;
  std::size_t cond_channels_;
  ndgrad::ParameterStore<T> params_;
  encoders::LREncoderParams<T> lr_;
  encoders::STFTEncoderParams<T> stft_;
  std::vector<FlowLayerParams<T>> layers_;
};

/// Random orthonormal n x n matrix with determinant +1.
template <typename T>
ndgrad::Tensor<T> random_orthonormal(std::size_t n, std::uint64_t seed);

extern template class Model<float>;
extern template class Model<double>;

}  // namespace wsrglow::flow
