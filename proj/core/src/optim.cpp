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

#include "sxl/optim.hpp"

#include <cmath>

namespace sxl {

bool decay_excluded(const std::string& name) {
  return name == "query_seed.w" || name.find("ln1.") != std::string::npos ||
         name.find("ln2.") != std::string::npos;
}

template <typename T>
AdamState<T> make_adam_state(const ParamSet<T>& params,
                             const std::vector<std::string>& trainable) {
  AdamState<T> state;
  for (const auto& name : trainable) {
    const auto& tensor = params.at(name);
    state.names.push_back(name);
    state.m.emplace(name, std::vector<T>(tensor->data().size(), T(0)));
    state.v.emplace(name, std::vector<T>(tensor->data().size(), T(0)));
  }
  return state;
}

template <typename T>
void adam_step(ParamSet<T>& params, AdamState<T>& state, double lr,
               const AdamConfig& cfg) {
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (const auto& name : state.names) {
    auto& tensor = *params.at(name);
    const auto& g = tensor.grad_or_zeros();
    auto& m = state.m.at(name);
    auto& v = state.v.at(name);
    auto& w = tensor.data();
    const bool decay = cfg.weight_decay != 0.0 && !decay_excluded(name);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double gi = g.empty() ? 0.0 : static_cast<double>(g[i]);
      if (!std::isfinite(gi)) {
        throw NumericError("non-finite gradient in parameter \"" + name +
                           "\"");
      }
      const double mi = cfg.beta1 * static_cast<double>(m[i]) +
                        (1.0 - cfg.beta1) * gi;
      const double vi = cfg.beta2 * static_cast<double>(v[i]) +
                        (1.0 - cfg.beta2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double m_hat = mi / bc1;
      const double v_hat = vi / bc2;
      double update = m_hat / (std::sqrt(v_hat) + cfg.eps);
      if (decay) update += cfg.weight_decay * static_cast<double>(w[i]);
      w[i] = static_cast<T>(static_cast<double>(w[i]) - lr * update);
    }
  }
}

template <typename T>
GradAccumulator<T>::GradAccumulator(const ParamSet<T>& params,
                                    const std::vector<std::string>& names,
                                    int n_accum)
    : names_(names), n_accum_(n_accum) {
  if (n_accum < 1) throw InputError("gradient accumulation needs n >= 1");
  for (const auto& name : names_) {
    buffer_.emplace(name,
                    std::vector<T>(params.at(name)->data().size(), T(0)));
  }
}

template <typename T>
void GradAccumulator<T>::add(const ParamSet<T>& params) {
  if (count_ >= n_accum_) {
    throw StateError("gradient accumulator already full; write_mean first");
  }
  for (const auto& name : names_) {
    const auto& g = params.at(name)->grad_or_zeros();
    auto& buf = buffer_.at(name);
    if (!g.empty()) {
      for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += g[i];
    }
  }
  ++count_;
}

template <typename T>
void GradAccumulator<T>::write_mean(ParamSet<T>& params) {
  if (count_ == 0) throw StateError("gradient accumulator is empty");
  const T inv = T(1) / static_cast<T>(count_);
  for (const auto& name : names_) {
    auto& buf = buffer_.at(name);
    auto& g = params.at(name)->grad();
    for (std::size_t i = 0; i < buf.size(); ++i) {
      g[i] = buf[i] * inv;
      buf[i] = T(0);
    }
  }
  count_ = 0;
}

double lr_linear(std::int64_t step, const Schedule& s) {
  if (step < 0) throw InputError("lr_linear: negative step");
  if (s.warmup_steps > s.total_steps) {
    throw InputError("lr_linear: warmup exceeds total steps");
  }
  if (step > s.total_steps) return 0.0;
  if (step <= s.warmup_steps) {
    if (s.warmup_steps == 0) return s.peak_lr;
    return s.peak_lr * static_cast<double>(step) /
           static_cast<double>(s.warmup_steps);
  }
  return s.peak_lr * static_cast<double>(s.total_steps - step) /
         static_cast<double>(s.total_steps - s.warmup_steps);
}

double lr_noam(std::int64_t step, const Schedule& s) {
  if (step < 1) {
    throw InputError("lr_noam: step must be >= 1 (n^-0.5 undefined at 0)");
  }
  const double n = static_cast<double>(step);
  const double warmup = static_cast<double>(s.warmup_steps);
  // The two min() branches cross exactly at n == warmup; select by
  // comparison so the crossover value is 1/sqrt(warmup) to the last bit.
  const double branch =
      step >= s.warmup_steps ? 1.0 / std::sqrt(n) : n * std::pow(warmup, -1.5);
  return s.k * std::pow(static_cast<double>(s.d_model), s.exponent) * branch;
}

double lr_at(std::int64_t step, const Schedule& s) {
  return s.kind == ScheduleKind::linear_warmup_decay ? lr_linear(step, s)
                                                     : lr_noam(step, s);
}

#define SXL_INSTANTIATE_OPTIM(T)                                          \
  template AdamState<T> make_adam_state<T>(const ParamSet<T>&,            \
                                           const std::vector<std::string>&); \
  template void adam_step<T>(ParamSet<T>&, AdamState<T>&, double,         \
                             const AdamConfig&);                          \
  template class GradAccumulator<T>;

SXL_INSTANTIATE_OPTIM(float)
SXL_INSTANTIATE_OPTIM(double)

#undef SXL_INSTANTIATE_OPTIM

}  // namespace sxl
