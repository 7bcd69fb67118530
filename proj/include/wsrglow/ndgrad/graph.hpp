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
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "wsrglow/ndgrad/tensor.hpp"

namespace wsrglow::ndgrad {

template <typename T>
struct Parameter {
  Parameter(std::string name, Tensor<T> value, bool trainable = true)
      : name(std::move(name)), value(std::move(value)), grad(this->value.shape()), trainable(trainable) {}

  void zero_grad() { grad.fill(T(0)); }

  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  bool trainable;
};

/// Owns a model's parameters. Addresses are stable for the lifetime of the
/// store and iteration follows insertion order.
template <typename T>
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;
  ParameterStore(ParameterStore&&) = default;
  ParameterStore& operator=(ParameterStore&&) = default;

  /// Throws ConfigError on a duplicate name.
  Parameter<T>& add(std::string name, Tensor<T> value, bool trainable = true);
  Parameter<T>* find(const std::string& name);
  const Parameter<T>* find(const std::string& name) const;
  Parameter<T>& at(const std::string& name);

  std::size_t size() const { return params_.size(); }
  std::size_t total_elements() const;
  void zero_grad();

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::deque<Parameter<T>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

template <typename T>
class Graph;

template <typename T>
struct Node {
  using BackwardFn = std::function<void(Node&)>;

  const Tensor<T>& value() const { return borrowed ? *borrowed : owned; }
  /// Gradient buffer, zero-allocated on first use.
  Tensor<T>& grad_buffer();

  std::uint64_t id = 0;
  const Graph<T>* graph = nullptr;
  Tensor<T> owned;
  const Tensor<T>* borrowed = nullptr;
  Parameter<T>* param = nullptr;
  bool requires_grad = false;
  bool has_grad = false;
  Tensor<T> grad;
  std::vector<std::shared_ptr<Node>> parents;
  BackwardFn backward;
};

/// Handle to a value recorded on a Graph. Copies share the node.
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  const Tensor<T>& value() const { return node_->value(); }
  const Shape& shape() const { return node_->value().shape(); }
  std::size_t size() const { return node_->value().size(); }
  std::size_t dim(std::size_t axis) const { return node_->value().dim(axis); }
  std::uint64_t id() const { return node_->id; }
  bool requires_grad() const { return node_->requires_grad; }
  bool valid() const { return static_cast<bool>(node_); }
  const Graph<T>& graph() const { return *node_->graph; }
  /// Gradient accumulated by the most recent backward (zeros if none).
  Tensor<T> grad() const;

  const std::shared_ptr<Node<T>>& node() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Tape for reverse-mode differentiation. Ops append nodes with increasing ids,
/// so sorting reachable nodes by id gives a topological order. A graph built
/// with recording disabled keeps no parent links; intermediate values are
/// freed as soon as their handles go out of scope.
template <typename T>
class Graph {
 public:
  explicit Graph(bool recording = true) : recording_(recording) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return recording_; }

  Var<T> constant(Tensor<T> value) const;
  /// Leaf bound to a parameter. The value is borrowed, not copied; the
  /// parameter must outlive every Var derived from it.
  Var<T> parameter(Parameter<T>& p) const;

  /// Records a custom op. `backward` receives the output node and must
  /// accumulate into parents' grad_buffer(); it is dropped when no parent
  /// requires a gradient.
  Var<T> record(Tensor<T> value, std::vector<Var<T>> parents, typename Node<T>::BackwardFn backward) const;

  /// Accumulates d(loss)/d(param) into every reachable trainable parameter's
  /// grad. Throws ShapeError unless loss holds exactly one element.
  void backward(const Var<T>& loss) const;

 private:
  bool recording_;
  mutable std::uint64_t next_id_ = 0;
};

extern template class ParameterStore<float>;
extern template class ParameterStore<double>;
extern template class Graph<float>;
extern template class Graph<double>;

}  // namespace wsrglow::ndgrad
