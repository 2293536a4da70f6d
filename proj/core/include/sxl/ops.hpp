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

#include <vector>

#include "sxl/rng.hpp"
#include "sxl/tensor.hpp"

namespace sxl {
namespace ops {

/// C = A·B for A[m×k], B[k×n]. Backward: dA = dC·Bᵀ, dB = Aᵀ·dC.
template <typename T>
TensorPtr<T> matmul(const TensorPtr<T>& a, const TensorPtr<T>& b);

template <typename T>
TensorPtr<T> transpose(const TensorPtr<T>& a);

template <typename T>
TensorPtr<T> add(const TensorPtr<T>& a, const TensorPtr<T>& b);

template <typename T>
TensorPtr<T> sub(const TensorPtr<T>& a, const TensorPtr<T>& b);

/// Elementwise product.
template <typename T>
TensorPtr<T> mul(const TensorPtr<T>& a, const TensorPtr<T>& b);

template <typename T>
TensorPtr<T> scale(const TensorPtr<T>& a, T s);

/// m[r×c] + v broadcast over rows; v has c elements.
template <typename T>
TensorPtr<T> add_rowvec(const TensorPtr<T>& m, const TensorPtr<T>& v);

template <typename T>
TensorPtr<T> relu(const TensorPtr<T>& a);

/// Row-wise softmax restricted to positions where mask is true. Masked
/// entries are exactly 0 in the output. A row with no visible position
/// yields an all-zero row (the fully-masked contract); no error is raised.
///
/// In double precision masked entries are excluded from the reduction
/// exactly; in single precision an additive -1e9 penalty is applied before
/// exponentiation and masked outputs are then zeroed.
template <typename T>
TensorPtr<T> masked_softmax(const TensorPtr<T>& scores, const BoolMatrix& mask);

/// Per-row standardization followed by the affine map gain∘x̂ + bias.
/// Variance is the biased (divide by d) row variance, eps-guarded.
template <typename T>
TensorPtr<T> layer_norm(const TensorPtr<T>& x, const TensorPtr<T>& gain,
                        const TensorPtr<T>& bias, T eps);

/// Inverted dropout: at train time keeps each element with probability 1-p
/// and scales kept elements by 1/(1-p); identity when train is false or p=0.
template <typename T>
TensorPtr<T> dropout(const TensorPtr<T>& x, double p, Rng& rng, bool train);

template <typename T>
TensorPtr<T> concat_cols(const std::vector<TensorPtr<T>>& parts);

/// Columns [c0, c1) of x.
template <typename T>
TensorPtr<T> slice_cols(const TensorPtr<T>& x, int c0, int c1);

template <typename T>
TensorPtr<T> gather_rows(const TensorPtr<T>& x, std::vector<int> row_indices);

template <typename T>
TensorPtr<T> sum(const TensorPtr<T>& a);

template <typename T>
TensorPtr<T> mean(const TensorPtr<T>& a);

/// Mean-reduced Huber loss over all elements. Per element with r = pred -
/// target: r²/(2δ) when |r| < δ, |r| - δ/2 otherwise.
template <typename T>
TensorPtr<T> huber_loss(const TensorPtr<T>& pred, const TensorPtr<T>& target,
                        double delta);

/// Mean over rows of -log softmax(logits)[label]. Labels must lie in [0, C).
template <typename T>
TensorPtr<T> cross_entropy(const TensorPtr<T>& logits,
                           const std::vector<int>& labels);

}  // namespace ops
}  // namespace sxl
