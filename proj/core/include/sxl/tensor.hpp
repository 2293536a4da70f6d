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

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sxl/error.hpp"

namespace sxl {

/// Row-major boolean matrix used for attention visibility masks.
class BoolMatrix {
 public:
  BoolMatrix() = default;
  BoolMatrix(int rows, int cols, bool value = false)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
              value ? 1 : 0) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  bool at(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c] != 0;
  }
  void set(int r, int c, bool v) {
    data_[static_cast<std::size_t>(r) * cols_ + c] = v ? 1 : 0;
  }

  const std::vector<std::uint8_t>& raw() const { return data_; }

  bool operator==(const BoolMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::uint8_t> data_;
};

template <typename T>
class Tensor;

template <typename T>
using TensorPtr = std::shared_ptr<Tensor<T>>;

/// Dense row-major tensor and reverse-mode autodiff node in one. Ops link the
/// output tensor to its parents and attach a backward closure; `Graph` walks
/// those links. Instantiated for float (train mode) and double (test mode).
template <typename T>
class Tensor : public std::enable_shared_from_this<Tensor<T>> {
 public:
  static TensorPtr<T> zeros(std::vector<int> shape, bool requires_grad = false);
  static TensorPtr<T> from_data(std::vector<int> shape, std::vector<T> data,
                                bool requires_grad = false);
  static TensorPtr<T> scalar(T value, bool requires_grad = false);

  const std::vector<int>& shape() const { return shape_; }
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
  bool is_scalar() const { return data_.size() == 1; }

  /// 2-D accessors; most tensors in this library are matrices.
  int rows() const;
  int cols() const;

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }
  T& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  T at(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * cols_ + c];
  }
  T value() const { return data_[0]; }

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool v) { requires_grad_ = v; }

  bool has_grad() const { return !grad_.empty(); }
  /// Gradient buffer, allocated (zero-filled) on first access.
  std::vector<T>& grad();
  const std::vector<T>& grad_or_zeros() const;
  void zero_grad() { grad_.assign(grad_.size(), T(0)); }

  void accumulate_grad(const std::vector<T>& g);

  const std::vector<TensorPtr<T>>& parents() const { return parents_; }
  const char* op_name() const { return op_name_; }

  /// Used by ops to register the producing operation.
  void set_op(const char* name, std::vector<TensorPtr<T>> parents,
              std::function<void(Tensor<T>&)> backward_fn);

 private:
  friend class Graph;
  template <typename U>
  friend class GraphT;

  std::vector<int> shape_;
  int cols_ = 1;  // cached trailing dimension for 2-D access
  std::vector<T> data_;
  std::vector<T> grad_;
  bool requires_grad_ = false;

  std::vector<TensorPtr<T>> parents_;
  std::function<void(Tensor<T>&)> backward_fn_;
  const char* op_name_ = "leaf";
  bool backward_done_ = false;

  template <typename U>
  friend class GraphWalker;

 public:
  // Internal flag: set once a Graph built from this node as loss has run
  // backward. Guards against double backward without reset.
  bool backward_done() const { return backward_done_; }
  void mark_backward_done(bool v) { backward_done_ = v; }
  void run_backward_fn() {
    if (backward_fn_) backward_fn_(*this);
  }
};

/// Topologically ordered view of the op nodes reachable from a loss tensor.
/// Backward traversal visits each node exactly once; gradient accumulation is
/// additive over fan-out. Running backward twice without reset is an error.
template <typename T>
class GraphT {
 public:
  /// Builds the topological order by iterative depth-first search from loss.
  static GraphT build(const TensorPtr<T>& loss);

  /// Seeds d(loss)/d(loss) = seed and propagates gradients to every
  /// requires_grad tensor in the graph.
  void backward(T seed = T(1));

  /// Clears gradients and the backward-done flag for every node, allowing a
  /// fresh backward pass over the same graph.
  void reset();

  const std::vector<Tensor<T>*>& nodes() const { return order_; }
  const TensorPtr<T>& loss() const { return loss_; }

 private:
  TensorPtr<T> loss_;
  std::vector<Tensor<T>*> order_;  // topological: parents before children
};

using Graphf = GraphT<float>;
using Graphd = GraphT<double>;

/// Convenience: build the graph from `loss` and run one backward pass.
template <typename T>
void backward(const TensorPtr<T>& loss, T seed = T(1));

/// Formats a shape as e.g. "[3, 4]" for error messages.
std::string shape_str(const std::vector<int>& shape);

}  // namespace sxl
