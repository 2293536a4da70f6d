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
#include <string>
#include <unordered_map>
#include <vector>

#include "sxl/ops.hpp"
#include "sxl/permutation.hpp"
#include "sxl/rng.hpp"
#include "sxl/tensor.hpp"

namespace sxl {

struct ModelConfig {
  int num_layers = 4;
  int num_heads = 4;
  int d_model = 64;
  int d_inner = 256;
  double dropout_p = 0.1;
  double huber_delta = 1.0;
  int feat_dim = 40;     // input feature dimension after any stacking
  int num_classes = 0;   // classifier head width; 0 = no classifier head
  std::string pos_encoding = "sinusoidal";

  void validate() const;
};

/// Small toy geometry used by default and by the test suite.
ModelConfig toy_model_config();
/// Six-block, 8-head, 512/2048 encoder used by the hybrid recipe.
ModelConfig hybrid_model_config();
/// Twelve-block, 4-head, 256/2048 encoder used by the stacked-frame recipe.
ModelConfig e2e_model_config();

/// Named, ordered collection of trainable tensors. Iteration order is the
/// insertion order and is part of the serialization contract.
template <typename T>
struct ParamSet {
  ModelConfig config;
  std::vector<std::string> names;
  std::unordered_map<std::string, TensorPtr<T>> tensors;

  void add(const std::string& name, TensorPtr<T> t);
  const TensorPtr<T>& at(const std::string& name) const;
  bool has(const std::string& name) const {
    return tensors.find(name) != tensors.end();
  }
  std::int64_t total_size() const;
  void zero_grads();
};

/// Expected tensor shapes for a configuration, in canonical order.
std::vector<std::pair<std::string, std::vector<int>>> param_shape_table(
    const ModelConfig& cfg);

/// Scaled uniform (Glorot) init for weight matrices, zeros for biases, ones
/// for layer-norm gains. Output heads are additionally scaled by 0.1 so a
/// fresh model scores near-uniform (cross entropy ~ ln C at step 0).
template <typename T>
ParamSet<T> init_params(const ModelConfig& cfg, std::uint64_t seed);

/// Fixed sinusoidal absolute positional encodings, T x d_model.
template <typename T>
TensorPtr<T> sinusoidal_positions(int length, int d_model);

/// Post-softmax attention probabilities for one layer, one T x T matrix per
/// head. Query-stream entries are present only for the two-stream forward.
template <typename T>
struct LayerAttention {
  std::vector<std::vector<T>> content_heads;
  std::vector<std::vector<T>> query_heads;
};

template <typename T>
struct ForwardResult {
  TensorPtr<T> output;  // e x F predictions (pretrain) or T x C logits
  std::vector<TensorPtr<T>> content_states;  // H^(l) per layer
  std::vector<TensorPtr<T>> query_states;    // G^(l) per layer, pretrain only
  std::vector<LayerAttention<T>> attention;  // per layer
};

/// Two-stream forward. The content stream attends under masks.content; the
/// query stream takes queries from G^(l-1) and keys/values from the content
/// stream H^(l-1) under masks.query. Both streams share one parameter set.
/// Predictions are the regression head applied to the final query states at
/// masks.targets.
template <typename T>
ForwardResult<T> pretrain_forward(const ParamSet<T>& params,
                                  const TensorPtr<T>& frames,
                                  const AttentionMasks& masks, bool train,
                                  Rng* dropout_rng = nullptr);

/// Content-only forward with an all-true attention mask (full bidirectional
/// context) and the classifier head. The query stream is not built.
template <typename T>
ForwardResult<T> finetune_forward(const ParamSet<T>& params,
                                  const TensorPtr<T>& frames, bool train,
                                  Rng* dropout_rng = nullptr);

/// Loss functions (autodiff ops shared with the tensor library).
using ops::cross_entropy;
using ops::huber_loss;

/// Converts a feature sequence (or any row-major matrix) to a tensor.
template <typename T>
TensorPtr<T> frames_to_tensor(const std::vector<float>& frames, int t, int f,
                              bool requires_grad = false);

}  // namespace sxl
