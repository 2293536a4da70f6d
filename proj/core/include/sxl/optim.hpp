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

#include "sxl/model.hpp"

namespace sxl {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-6;
  double weight_decay = 0.01;
};

/// First/second moment buffers per parameter plus the shared step counter.
template <typename T>
struct AdamState {
  std::vector<std::string> names;  // the trainable subset, in ParamSet order
  std::unordered_map<std::string, std::vector<T>> m;
  std::unordered_map<std::string, std::vector<T>> v;
  std::int64_t step = 0;  // t; increments by exactly 1 per apply
};

template <typename T>
AdamState<T> make_adam_state(const ParamSet<T>& params,
                             const std::vector<std::string>& trainable);

/// Layer-norm gains/biases and the query seed are excluded from weight decay.
bool decay_excluded(const std::string& name);

/// Bias-corrected Adam with decoupled weight decay:
///   theta <- theta - lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta)
/// Reads gradients from the parameter tensors. A non-finite gradient raises
/// NumericError naming the parameter.
template <typename T>
void adam_step(ParamSet<T>& params, AdamState<T>& state, double lr,
               const AdamConfig& cfg);

/// Averages gradients over n_accum micro-batches before they are applied.
template <typename T>
class GradAccumulator {
 public:
  GradAccumulator(const ParamSet<T>& params,
                  const std::vector<std::string>& names, int n_accum);

  /// Adds the parameters' current gradients to the buffer.
  void add(const ParamSet<T>& params);

  bool ready() const { return count_ == n_accum_; }
  int count() const { return count_; }

  /// Writes the micro-batch mean gradient back into the parameter tensors
  /// and clears the buffer.
  void write_mean(ParamSet<T>& params);

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::vector<T>> buffer_;
  int n_accum_ = 1;
  int count_ = 0;
};

enum class ScheduleKind { linear_warmup_decay, noam };

struct Schedule {
  ScheduleKind kind = ScheduleKind::linear_warmup_decay;
  // linear_warmup_decay
  std::int64_t warmup_steps = 0;
  std::int64_t total_steps = 1;
  double peak_lr = 1e-3;
  // noam
  double k = 2.0;
  int d_model = 256;
  double exponent = -0.5;  // +0.5 reproduces the printed formula exactly
};

/// Linear ramp to peak over warmup_steps, then linear decay to 0 at
/// total_steps. Steps past total clamp to 0.
double lr_linear(std::int64_t step, const Schedule& s);

/// lr = k * d_model^exponent * min(n^-0.5, n * warmup^-1.5), n >= 1.
double lr_noam(std::int64_t step, const Schedule& s);

double lr_at(std::int64_t step, const Schedule& s);

}  // namespace sxl
