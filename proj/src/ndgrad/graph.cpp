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

#include "wsrglow/ndgrad/graph.hpp"

#include <algorithm>
#include <unordered_set>

#include "wsrglow/common/error.hpp"

namespace wsrglow::ndgrad {

template <typename T>
Parameter<T>& ParameterStore<T>::add(std::string name, Tensor<T> value, bool trainable) {
  if (index_.contains(name)) throw ConfigError("duplicate parameter name: " + name);
  index_.emplace(name, params_.size());
  return params_.emplace_back(std::move(name), std::move(value), trainable);
}

template <typename T>
Parameter<T>* ParameterStore<T>::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

template <typename T>
const Parameter<T>* ParameterStore<T>::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : &params_[it->second];
}

template <typename T>
Parameter<T>& ParameterStore<T>::at(const std::string& name) {
  auto* p = find(name);
  if (!p) throw ConfigError("unknown parameter: " + name);
  return *p;
}

template <typename T>
std::size_t ParameterStore<T>::total_elements() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

template <typename T>
void ParameterStore<T>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template <typename T>
Tensor<T>& Node<T>::grad_buffer() {
  if (!has_grad) {
    grad = Tensor<T>(value().shape());
    has_grad = true;
  }
  return grad;
}

template <typename T>
Tensor<T> Var<T>::grad() const {
  return node_->has_grad ? node_->grad : Tensor<T>(shape());
}

template <typename T>
Var<T> Graph<T>::constant(Tensor<T> value) const {
  auto node = std::make_shared<Node<T>>();
  node->id = next_id_++;
  node->graph = this;
  node->owned = std::move(value);
  return Var<T>(std::move(node));
}

template <typename T>
Var<T> Graph<T>::parameter(Parameter<T>& p) const {
  auto node = std::make_shared<Node<T>>();
  node->id = next_id_++;
  node->graph = this;
  node->borrowed = &p.value;
  node->param = &p;
  node->requires_grad = recording_ && p.trainable;
  return Var<T>(std::move(node));
}

template <typename T>
Var<T> Graph<T>::record(Tensor<T> value, std::vector<Var<T>> parents,
                        typename Node<T>::BackwardFn backward) const {
  auto node = std::make_shared<Node<T>>();
  node->id = next_id_++;
  node->graph = this;
  node->owned = std::move(value);
  if (recording_) {
    for (const auto& p : parents) {
      if (p.node()->graph != this) throw Error("op mixes vars from different graphs");
      node->requires_grad = node->requires_grad || p.requires_grad();
    }
    if (node->requires_grad) {
      node->parents.reserve(parents.size());
      for (auto& p : parents) node->parents.push_back(p.node());
      node->backward = std::move(backward);
    }
  }
  return Var<T>(std::move(node));
}

template <typename T>
void Graph<T>::backward(const Var<T>& loss) const {
  if (loss.size() != 1) throw_shape("backward needs a scalar loss, got " + to_string(loss.shape()));
  if (!loss.requires_grad()) return;

  std::vector<Node<T>*> order;
  std::unordered_set<const Node<T>*> seen;
  std::vector<Node<T>*> stack{loss.node().get()};
  while (!stack.empty()) {
    Node<T>* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    order.push_back(n);
    for (auto& p : n->parents) {
      if (p->requires_grad) stack.push_back(p.get());
    }
  }
  std::sort(order.begin(), order.end(), [](const Node<T>* a, const Node<T>* b) { return a->id > b->id; });

  loss.node()->grad_buffer()[0] = T(1);
  for (Node<T>* n : order) {
    if (!n->has_grad) continue;
    if (n->backward) n->backward(*n);
    if (n->param) {
      auto& dst = n->param->grad.storage();
      const auto& src = n->grad.storage();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
    }
  }
  for (Node<T>* n : order) {
    n->has_grad = false;
    n->grad = Tensor<T>();
  }
}

template class ParameterStore<float>;
template class ParameterStore<double>;
template struct Node<float>;
template struct Node<double>;
template class Var<float>;
template class Var<double>;
template class Graph<float>;
template class Graph<double>;

}  // namespace wsrglow::ndgrad
