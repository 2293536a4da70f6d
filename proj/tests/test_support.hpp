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

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "sxl/tensor.hpp"

namespace sxl_test {

/// Relative error with a small floor so exact-zero pairs compare equal and
/// finite-difference noise on true-zero gradients does not false-alarm.
inline double rel_err(double a, double b) {
  return std::abs(a - b) /
         std::max({std::abs(a), std::abs(b), 1e-6});
}

/// Central finite differences of loss_fn with respect to one tensor's data,
/// compared against the analytic gradient already stored in the tensor.
/// Returns the worst relative error over all elements. loss_fn must rebuild
/// the forward pass from current tensor data.
inline double fd_worst_rel_err(const sxl::TensorPtr<double>& t,
                               const std::function<double()>& loss_fn,
                               double h = 1e-5) {
  double worst = 0.0;
  auto& data = t->data();
  const auto& grad = t->grad_or_zeros();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double keep = data[i];
    data[i] = keep + h;
    const double up = loss_fn();
    data[i] = keep - h;
    const double down = loss_fn();
    data[i] = keep;
    const double fd = (up - down) / (2.0 * h);
    const double an = grad.empty() ? 0.0 : grad[i];
    worst = std::max(worst, rel_err(an, fd));
  }
  return worst;
}

/// Reference matrix product, deliberately the naive triple loop.
inline std::vector<double> matmul_oracle(const std::vector<double>& a,
                                         const std::vector<double>& b, int m,
                                         int k, int n) {
  std::vector<double> c(static_cast<std::size_t>(m) * n, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int p = 0; p < k; ++p) {
        acc += a[static_cast<std::size_t>(i) * k + p] *
               b[static_cast<std::size_t>(p) * n + j];
      }
      c[static_cast<std::size_t>(i) * n + j] = acc;
    }
  }
  return c;
}

}  // namespace sxl_test
