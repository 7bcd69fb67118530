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

#include "wsrglow/ndgrad/tensor.hpp"

#include <sstream>

#include "wsrglow/common/error.hpp"

namespace wsrglow::ndgrad {

std::size_t numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
  os << ']';
  return os.str();
}

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)), data_(numel(shape_), fill) {}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values)
    : shape_(std::move(shape)), data_(values.begin(), values.end()) {
  if (data_.size() != numel(shape_)) {
    throw_shape("tensor of shape " + to_string(shape_) + " needs " +
                std::to_string(numel(shape_)) + " values, got " + std::to_string(data_.size()));
  }
}

template <typename T>
std::size_t Tensor<T>::dim(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw_shape("axis " + std::to_string(axis) + " out of range for " + to_string(shape_));
  }
  return shape_[axis];
}

template <typename T>
T Tensor<T>::item() const {
  if (data_.size() != 1) throw_shape("item() on tensor of shape " + to_string(shape_));
  return data_[0];
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const {
  if (numel(shape) != data_.size()) {
    throw_shape("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  }
  Tensor out;
  out.shape_ = std::move(shape);
  out.data_ = data_;
  return out;
}

template <typename T>
void Tensor<T>::fill(T v) {
  std::fill(data_.begin(), data_.end(), v);
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace wsrglow::ndgrad
