// Copyright 2026 sxl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sxl/tensor.hpp"

#include <algorithm>
#include <unordered_set>

namespace sxl {

namespace {

std::int64_t shape_product(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (const int d : shape) {
    if (d <= 0) {
      throw DimensionError("tensor shape must have positive dims, got " +
                           shape_str(shape));
    }
    n *= d;
  }
  return n;
}

}  // namespace

std::string shape_str(const std::vector<int>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
TensorPtr<T> Tensor<T>::zeros(std::vector<int> shape, bool requires_grad) {
  const std::int64_t n = shape_product(shape);
  return from_data(std::move(shape),
                   std::vector<T>(static_cast<std::size_t>(n), T(0)),
                   requires_grad);
}

template <typename T>
TensorPtr<T> Tensor<T>::from_data(std::vector<int> shape, std::vector<T> data,
                                  bool requires_grad) {
  const std::int64_t n = shape_product(shape);
  if (n != static_cast<std::int64_t>(data.size())) {
    throw DimensionError("tensor data length " + std::to_string(data.size()) +
                         " does not match shape " + shape_str(shape));
  }
  auto t = std::make_shared<Tensor<T>>();
  t->shape_ = std::move(shape);
  t->cols_ = t->shape_.empty() ? 1 : t->shape_.back();
  t->data_ = std::move(data);
  t->requires_grad_ = requires_grad;
  return t;
}

template <typename T>
TensorPtr<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return from_data({1}, {value}, requires_grad);
}

template <typename T>
int Tensor<T>::rows() const {
  if (shape_.size() == 2) return shape_[0];
  if (shape_.size() == 1) return 1;
  throw DimensionError("rows() on tensor of shape " + shape_str(shape_));
}

template <typename T>
int Tensor<T>::cols() const {
  if (shape_.size() == 1 || shape_.size() == 2) return cols_;
  throw DimensionError("cols() on tensor of shape " + shape_str(shape_));
}

template <typename T>
std::vector<T>& Tensor<T>::grad() {
  if (grad_.empty()) grad_.assign(data_.size(), T(0));
  return grad_;
}

template <typename T>
const std::vector<T>& Tensor<T>::grad_or_zeros() const {
  static const std::vector<T> empty;
  if (!grad_.empty()) return grad_;
  return empty;
}

template <typename T>
void Tensor<T>::accumulate_grad(const std::vector<T>& g) {
  if (!requires_grad_) return;
  if (g.size() != data_.size()) {
    throw DimensionError("gradient size " + std::to_string(g.size()) +
                         " does not match tensor size " +
                         std::to_string(data_.size()));
  }
  auto& dst = grad();
  for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
}

template <typename T>
void Tensor<T>::set_op(const char* name, std::vector<TensorPtr<T>> parents,
                       std::function<void(Tensor<T>&)> backward_fn) {
  op_name_ = name;
  parents_ = std::move(parents);
  backward_fn_ = std::move(backward_fn);
  for (const auto& p : parents_) {
    if (p->requires_grad_) requires_grad_ = true;
  }
}

template <typename T>
GraphT<T> GraphT<T>::build(const TensorPtr<T>& loss) {
  GraphT<T> g;
  g.loss_ = loss;

  // Iterative post-order DFS; a node enters the order after all its parents.
  std::unordered_set<const Tensor<T>*> visited;
  std::vector<std::pair<Tensor<T>*, std::size_t>> stack;
  stack.emplace_back(loss.get(), 0);
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents().size()) {
      Tensor<T>* parent = node->parents()[idx].get();
      ++idx;
      if (visited.insert(parent).second) {
        stack.emplace_back(parent, 0);
      }
    } else {
      g.order_.push_back(node);
      stack.pop_back();
    }
  }
  return g;
}

template <typename T>
void GraphT<T>::backward(T seed) {
  if (!loss_) throw StateError("backward on an empty graph");
  if (!loss_->is_scalar()) {
    throw InputError("backward requires a scalar loss, got shape " +
                     shape_str(loss_->shape()));
  }
  if (loss_->backward_done()) {
    throw StateError(
        "backward already ran on this graph; call reset() before running it "
        "again");
  }
  loss_->mark_backward_done(true);
  loss_->grad()[0] += seed;
  // order_ is post-order (parents before children), so walk it in reverse.
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    Tensor<T>* node = *it;
    if (node->has_grad()) node->run_backward_fn();
  }
}

template <typename T>
void GraphT<T>::reset() {
  for (Tensor<T>* node : order_) {
    node->zero_grad();
    node->mark_backward_done(false);
  }
}

template <typename T>
void backward(const TensorPtr<T>& loss, T seed) {
  auto g = GraphT<T>::build(loss);
  g.backward(seed);
}

template class Tensor<float>;
template class Tensor<double>;
template class GraphT<float>;
template class GraphT<double>;
template void backward<float>(const TensorPtr<float>&, float);
template void backward<double>(const TensorPtr<double>&, double);

}  // namespace sxl
