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

#include "sxl/ops.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstring>
#include <limits>

namespace sxl {
namespace ops {

namespace {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<Mat<T>>;
template <typename T>
using MapConst = Eigen::Map<const Mat<T>>;

template <typename T>
void require_2d(const TensorPtr<T>& t, const char* op) {
  if (t->shape().size() != 2) {
    throw DimensionError(std::string(op) + " expects a 2-D tensor, got " +
                         shape_str(t->shape()));
  }
}

template <typename T>
void require_same_shape(const TensorPtr<T>& a, const TensorPtr<T>& b,
                        const char* op) {
  if (a->shape() != b->shape()) {
    throw DimensionError(std::string(op) + " shape mismatch: " +
                         shape_str(a->shape()) + " vs " +
                         shape_str(b->shape()));
  }
}

}  // namespace

template <typename T>
TensorPtr<T> matmul(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  require_2d(a, "matmul");
  require_2d(b, "matmul");
  const int m = a->shape()[0], k = a->shape()[1];
  const int k2 = b->shape()[0], n = b->shape()[1];
  if (k != k2) {
    throw DimensionError("matmul inner dimensions disagree: " +
                         shape_str(a->shape()) + " vs " +
                         shape_str(b->shape()));
  }
  auto out = Tensor<T>::zeros({m, n});
  MapMat<T>(out->data().data(), m, n).noalias() =
      MapConst<T>(a->data().data(), m, k) * MapConst<T>(b->data().data(), k, n);
  out->set_op("matmul", {a, b}, [a, b, m, k, n](Tensor<T>& o) {
    MapConst<T> dC(o.grad().data(), m, n);
    if (a->requires_grad()) {
      MapMat<T> dA(a->grad().data(), m, k);
      dA.noalias() += dC * MapConst<T>(b->data().data(), k, n).transpose();
    }
    if (b->requires_grad()) {
      MapMat<T> dB(b->grad().data(), k, n);
      dB.noalias() += MapConst<T>(a->data().data(), m, k).transpose() * dC;
    }
  });
  return out;
}

template <typename T>
TensorPtr<T> transpose(const TensorPtr<T>& a) {
  require_2d(a, "transpose");
  const int r = a->shape()[0], c = a->shape()[1];
  auto out = Tensor<T>::zeros({c, r});
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) out->at(j, i) = a->at(i, j);
  out->set_op("transpose", {a}, [a, r, c](Tensor<T>& o) {
    if (!a->requires_grad()) return;
    auto& da = a->grad();
    const auto& g = o.grad();
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j)
        da[static_cast<std::size_t>(i) * c + j] +=
            g[static_cast<std::size_t>(j) * r + i];
  });
  return out;
}

template <typename T>
TensorPtr<T> add(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  require_same_shape(a, b, "add");
  auto out = Tensor<T>::zeros(a->shape());
  const auto& ad = a->data();
  const auto& bd = b->data();
  auto& od = out->data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] = ad[i] + bd[i];
  out->set_op("add", {a, b}, [a, b](Tensor<T>& o) {
    if (a->requires_grad()) a->accumulate_grad(o.grad());
    if (b->requires_grad()) b->accumulate_grad(o.grad());
  });
  return out;
}

template <typename T>
TensorPtr<T> sub(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  require_same_shape(a, b, "sub");
  auto out = Tensor<T>::zeros(a->shape());
  const auto& ad = a->data();
  const auto& bd = b->data();
  auto& od = out->data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] = ad[i] - bd[i];
  out->set_op("sub", {a, b}, [a, b](Tensor<T>& o) {
    const auto& g = o.grad();
    if (a->requires_grad()) a->accumulate_grad(g);
    if (b->requires_grad()) {
      auto& db = b->grad();
      for (std::size_t i = 0; i < g.size(); ++i) db[i] -= g[i];
    }
  });
  return out;
}

template <typename T>
TensorPtr<T> mul(const TensorPtr<T>& a, const TensorPtr<T>& b) {
  require_same_shape(a, b, "mul");
  auto out = Tensor<T>::zeros(a->shape());
  const auto& ad = a->data();
  const auto& bd = b->data();
  auto& od = out->data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] = ad[i] * bd[i];
  out->set_op("mul", {a, b}, [a, b](Tensor<T>& o) {
    const auto& g = o.grad();
    if (a->requires_grad()) {
      auto& da = a->grad();
      const auto& bd2 = b->data();
      for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * bd2[i];
    }
    if (b->requires_grad()) {
      auto& db = b->grad();
      const auto& ad2 = a->data();
      for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * ad2[i];
    }
  });
  return out;
}

template <typename T>
TensorPtr<T> scale(const TensorPtr<T>& a, T s) {
  auto out = Tensor<T>::zeros(a->shape());
  const auto& ad = a->data();
  auto& od = out->data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] = ad[i] * s;
  out->set_op("scale", {a}, [a, s](Tensor<T>& o) {
    if (!a->requires_grad()) return;
    auto& da = a->grad();
    const auto& g = o.grad();
    for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * s;
  });
  return out;
}

template <typename T>
TensorPtr<T> add_rowvec(const TensorPtr<T>& m, const TensorPtr<T>& v) {
  require_2d(m, "add_rowvec");
  const int r = m->shape()[0], c = m->shape()[1];
  if (v->size() != c) {
    throw DimensionError("add_rowvec: vector length " +
                         std::to_string(v->size()) + " vs row width " +
                         std::to_string(c));
  }
  auto out = Tensor<T>::zeros(m->shape());
  const auto& md = m->data();
  const auto& vd = v->data();
  auto& od = out->data();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j)
      od[static_cast<std::size_t>(i) * c + j] =
          md[static_cast<std::size_t>(i) * c + j] + vd[j];
  out->set_op("add_rowvec", {m, v}, [m, v, r, c](Tensor<T>& o) {
    const auto& g = o.grad();
    if (m->requires_grad()) m->accumulate_grad(g);
    if (v->requires_grad()) {
      auto& dv = v->grad();
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j)
          dv[j] += g[static_cast<std::size_t>(i) * c + j];
    }
  });
  return out;
}

template <typename T>
TensorPtr<T> relu(const TensorPtr<T>& a) {
  auto out = Tensor<T>::zeros(a->shape());
  const auto& ad = a->data();
  auto& od = out->data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] = ad[i] > T(0) ? ad[i] : T(0);
  out->set_op("relu", {a}, [a](Tensor<T>& o) {
    if (!a->requires_grad()) return;
    auto& da = a->grad();
    const auto& ad2 = a->data();
    const auto& g = o.grad();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (ad2[i] > T(0)) da[i] += g[i];
    }
  });
  return out;
}

template <typename T>
TensorPtr<T> masked_softmax(const TensorPtr<T>& scores, const BoolMatrix& mask) {
  require_2d(scores, "masked_softmax");
  const int r = scores->shape()[0], c = scores->shape()[1];
  if (mask.rows() != r || mask.cols() != c) {
    throw DimensionError("masked_softmax: mask " +
                         shape_str({mask.rows(), mask.cols()}) +
                         " vs scores " + shape_str(scores->shape()));
  }
  auto out = Tensor<T>::zeros(scores->shape());
  const auto& sd = scores->data();
  auto& od = out->data();
  for (int i = 0; i < r; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * c;
    T mx = -std::numeric_limits<T>::infinity();
    int visible = 0;
    for (int j = 0; j < c; ++j) {
      if (mask.at(i, j)) {
        ++visible;
        if (sd[base + j] > mx) mx = sd[base + j];
      }
    }
    if (visible == 0) continue;  // fully-masked row stays all-zero
    if constexpr (std::is_same_v<T, double>) {
      // Exact exclusion of masked entries.
      T denom = T(0);
      for (int j = 0; j < c; ++j) {
        if (mask.at(i, j)) {
          od[base + j] = std::exp(sd[base + j] - mx);
          denom += od[base + j];
        }
      }
      for (int j = 0; j < c; ++j) {
        if (mask.at(i, j)) od[base + j] /= denom;
      }
    } else {
      // Additive -1e9 penalty; masked outputs forced to exact 0 afterwards.
      T denom = T(0);
      for (int j = 0; j < c; ++j) {
        const T s = mask.at(i, j) ? sd[base + j] : sd[base + j] - T(1e9);
        od[base + j] = std::exp(s - mx);
        denom += od[base + j];
      }
      for (int j = 0; j < c; ++j) {
        od[base + j] = mask.at(i, j) ? od[base + j] / denom : T(0);
      }
    }
  }
  // Backward needs no mask: y is exactly 0 at masked entries, and
  // dscore_j = y_j * (dy_j - sum_k dy_k y_k) vanishes exactly there.
  out->set_op("masked_softmax", {scores}, [scores, r, c](Tensor<T>& o) {
    if (!scores->requires_grad()) return;
    auto& ds = scores->grad();
    const auto& y = o.data();
    const auto& dy = o.grad();
    for (int i = 0; i < r; ++i) {
      const std::size_t base = static_cast<std::size_t>(i) * c;
      T dot = T(0);
      for (int j = 0; j < c; ++j) dot += dy[base + j] * y[base + j];
      for (int j = 0; j < c; ++j)
        ds[base + j] += y[base + j] * (dy[base + j] - dot);
    }
  });
  return out;
}

template <typename T>
TensorPtr<T> layer_norm(const TensorPtr<T>& x, const TensorPtr<T>& gain,
                        const TensorPtr<T>& bias, T eps) {
  require_2d(x, "layer_norm");
  const int r = x->shape()[0], d = x->shape()[1];
  if (gain->size() != d || bias->size() != d) {
    throw DimensionError("layer_norm: gain/bias length vs feature dim " +
                         std::to_string(d));
  }
  auto out = Tensor<T>::zeros(x->shape());
  std::vector<T> inv_std(r), mean(r);
  const auto& xd = x->data();
  const auto& gd = gain->data();
  const auto& bd = bias->data();
  auto& od = out->data();
  for (int i = 0; i < r; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * d;
    T mu = T(0);
    for (int j = 0; j < d; ++j) mu += xd[base + j];
    mu /= T(d);
    T var = T(0);
    for (int j = 0; j < d; ++j) {
      const T c = xd[base + j] - mu;
      var += c * c;
    }
    var /= T(d);
    const T is = T(1) / std::sqrt(var + eps);
    mean[i] = mu;
    inv_std[i] = is;
    for (int j = 0; j < d; ++j)
      od[base + j] = gd[j] * (xd[base + j] - mu) * is + bd[j];
  }
  out->set_op(
      "layer_norm", {x, gain, bias},
      [x, gain, bias, r, d, mean = std::move(mean),
       inv_std = std::move(inv_std)](Tensor<T>& o) {
        const auto& g = o.grad();
        const auto& xd2 = x->data();
        const auto& gd2 = gain->data();
        for (int i = 0; i < r; ++i) {
          const std::size_t base = static_cast<std::size_t>(i) * d;
          const T is = inv_std[i];
          const T mu = mean[i];
          // dxhat, plus reductions needed for dmean/dvar.
          T sum_dxhat = T(0), sum_dxhat_xhat = T(0);
          for (int j = 0; j < d; ++j) {
            const T xhat = (xd2[base + j] - mu) * is;
            const T dxhat = g[base + j] * gd2[j];
            sum_dxhat += dxhat;
            sum_dxhat_xhat += dxhat * xhat;
          }
          if (x->requires_grad()) {
            auto& dx = x->grad();
            for (int j = 0; j < d; ++j) {
              const T xhat = (xd2[base + j] - mu) * is;
              const T dxhat = g[base + j] * gd2[j];
              dx[base + j] += is * (dxhat - (sum_dxhat + xhat * sum_dxhat_xhat) / T(d));
            }
          }
          if (gain->requires_grad()) {
            auto& dg = gain->grad();
            for (int j = 0; j < d; ++j)
              dg[j] += g[base + j] * (xd2[base + j] - mu) * is;
          }
          if (bias->requires_grad()) {
            auto& db = bias->grad();
            for (int j = 0; j < d; ++j) db[j] += g[base + j];
          }
        }
      });
  return out;
}

template <typename T>
TensorPtr<T> dropout(const TensorPtr<T>& x, double p, Rng& rng, bool train) {
  if (!train || p <= 0.0) return x;
  if (p >= 1.0) throw InputError("dropout probability must be < 1");
  auto out = Tensor<T>::zeros(x->shape());
  const T inv_keep = T(1.0 / (1.0 - p));
  std::vector<std::uint8_t> kept(x->data().size());
  const auto& xd = x->data();
  auto& od = out->data();
  for (std::size_t i = 0; i < od.size(); ++i) {
    kept[i] = rng.uniform() >= p ? 1 : 0;
    od[i] = kept[i] ? xd[i] * inv_keep : T(0);
  }
  out->set_op("dropout", {x},
              [x, kept = std::move(kept), inv_keep](Tensor<T>& o) {
                if (!x->requires_grad()) return;
                auto& dx = x->grad();
                const auto& g = o.grad();
                for (std::size_t i = 0; i < g.size(); ++i) {
                  if (kept[i]) dx[i] += g[i] * inv_keep;
                }
              });
  return out;
}

template <typename T>
TensorPtr<T> concat_cols(const std::vector<TensorPtr<T>>& parts) {
  if (parts.empty()) throw InputError("concat_cols: no inputs");
  const int r = parts[0]->shape()[0];
  int total = 0;
  for (const auto& p : parts) {
    require_2d(p, "concat_cols");
    if (p->shape()[0] != r) {
      throw DimensionError("concat_cols: row counts differ");
    }
    total += p->shape()[1];
  }
  auto out = Tensor<T>::zeros({r, total});
  auto& od = out->data();
  int col0 = 0;
  for (const auto& p : parts) {
    const int c = p->shape()[1];
    const auto& pd = p->data();
    for (int i = 0; i < r; ++i)
      std::memcpy(&od[static_cast<std::size_t>(i) * total + col0],
                  &pd[static_cast<std::size_t>(i) * c],
                  sizeof(T) * static_cast<std::size_t>(c));
    col0 += c;
  }
  std::vector<TensorPtr<T>> parents(parts.begin(), parts.end());
  out->set_op("concat_cols", parents, [parents, r, total](Tensor<T>& o) {
    const auto& g = o.grad();
    int c0 = 0;
    for (const auto& p : parents) {
      const int c = p->shape()[1];
      if (p->requires_grad()) {
        auto& dp = p->grad();
        for (int i = 0; i < r; ++i)
          for (int j = 0; j < c; ++j)
            dp[static_cast<std::size_t>(i) * c + j] +=
                g[static_cast<std::size_t>(i) * total + c0 + j];
      }
      c0 += c;
    }
  });
  return out;
}

template <typename T>
TensorPtr<T> slice_cols(const TensorPtr<T>& x, int c0, int c1) {
  require_2d(x, "slice_cols");
  const int r = x->shape()[0], c = x->shape()[1];
  if (c0 < 0 || c1 > c || c0 >= c1) {
    throw InputError("slice_cols: bad range [" + std::to_string(c0) + ", " +
                     std::to_string(c1) + ") for width " + std::to_string(c));
  }
  const int w = c1 - c0;
  auto out = Tensor<T>::zeros({r, w});
  const auto& xd = x->data();
  auto& od = out->data();
  for (int i = 0; i < r; ++i)
    std::memcpy(&od[static_cast<std::size_t>(i) * w],
                &xd[static_cast<std::size_t>(i) * c + c0],
                sizeof(T) * static_cast<std::size_t>(w));
  out->set_op("slice_cols", {x}, [x, r, c, c0, w](Tensor<T>& o) {
    if (!x->requires_grad()) return;
    auto& dx = x->grad();
    const auto& g = o.grad();
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < w; ++j)
        dx[static_cast<std::size_t>(i) * c + c0 + j] +=
            g[static_cast<std::size_t>(i) * w + j];
  });
  return out;
}

template <typename T>
TensorPtr<T> gather_rows(const TensorPtr<T>& x, std::vector<int> row_indices) {
  require_2d(x, "gather_rows");
  const int r = x->shape()[0], c = x->shape()[1];
  for (const int i : row_indices) {
    if (i < 0 || i >= r) {
      throw InputError("gather_rows: index " + std::to_string(i) +
                       " out of range for " + std::to_string(r) + " rows");
    }
  }
  const int n = static_cast<int>(row_indices.size());
  auto out = Tensor<T>::zeros({n, c});
  const auto& xd = x->data();
  auto& od = out->data();
  for (int i = 0; i < n; ++i)
    std::memcpy(&od[static_cast<std::size_t>(i) * c],
                &xd[static_cast<std::size_t>(row_indices[i]) * c],
                sizeof(T) * static_cast<std::size_t>(c));
  out->set_op("gather_rows", {x},
              [x, idx = std::move(row_indices), c](Tensor<T>& o) {
                if (!x->requires_grad()) return;
                auto& dx = x->grad();
                const auto& g = o.grad();
                for (std::size_t i = 0; i < idx.size(); ++i)
                  for (int j = 0; j < c; ++j)
                    dx[static_cast<std::size_t>(idx[i]) * c + j] +=
                        g[i * static_cast<std::size_t>(c) + j];
              });
  return out;
}

template <typename T>
TensorPtr<T> sum(const TensorPtr<T>& a) {
  T acc = T(0);
  for (const T v : a->data()) acc += v;
  auto out = Tensor<T>::scalar(acc);
  out->set_op("sum", {a}, [a](Tensor<T>& o) {
    if (!a->requires_grad()) return;
    auto& da = a->grad();
    const T g = o.grad()[0];
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += g;
  });
  return out;
}

template <typename T>
TensorPtr<T> mean(const TensorPtr<T>& a) {
  const T inv_n = T(1) / static_cast<T>(a->size());
  T acc = T(0);
  for (const T v : a->data()) acc += v;
  auto out = Tensor<T>::scalar(acc * inv_n);
  out->set_op("mean", {a}, [a, inv_n](Tensor<T>& o) {
    if (!a->requires_grad()) return;
    auto& da = a->grad();
    const T g = o.grad()[0] * inv_n;
    for (std::size_t i = 0; i < da.size(); ++i) da[i] += g;
  });
  return out;
}

template <typename T>
TensorPtr<T> huber_loss(const TensorPtr<T>& pred, const TensorPtr<T>& target,
                        double delta) {
  if (pred->shape() != target->shape()) {
    throw InputError("huber_loss shape mismatch: " + shape_str(pred->shape()) +
                     " vs " + shape_str(target->shape()));
  }
  if (!(delta > 0.0)) throw InputError("huber_loss: delta must be positive");
  const T d = static_cast<T>(delta);
  const std::size_t n = pred->data().size();
  const T inv_n = T(1) / static_cast<T>(n);
  T acc = T(0);
  const auto& pd = pred->data();
  const auto& td = target->data();
  for (std::size_t i = 0; i < n; ++i) {
    const T r = pd[i] - td[i];
    const T ar = std::abs(r);
    acc += ar < d ? r * r / (T(2) * d) : ar - d / T(2);
  }
  auto out = Tensor<T>::scalar(acc * inv_n);
  out->set_op("huber_loss", {pred, target},
              [pred, target, d, inv_n, n](Tensor<T>& o) {
                const T g = o.grad()[0] * inv_n;
                const auto& pd2 = pred->data();
                const auto& td2 = target->data();
                std::vector<T>* dp =
                    pred->requires_grad() ? &pred->grad() : nullptr;
                std::vector<T>* dt =
                    target->requires_grad() ? &target->grad() : nullptr;
                for (std::size_t i = 0; i < n; ++i) {
                  const T r = pd2[i] - td2[i];
                  const T dr =
                      std::abs(r) < d ? r / d : (r > T(0) ? T(1) : T(-1));
                  if (dp) (*dp)[i] += g * dr;
                  if (dt) (*dt)[i] -= g * dr;
                }
              });
  return out;
}

template <typename T>
TensorPtr<T> cross_entropy(const TensorPtr<T>& logits,
                           const std::vector<int>& labels) {
  require_2d(logits, "cross_entropy");
  const int r = logits->shape()[0], c = logits->shape()[1];
  if (static_cast<int>(labels.size()) != r) {
    throw InputError("cross_entropy: " + std::to_string(labels.size()) +
                     " labels for " + std::to_string(r) + " rows");
  }
  for (const int l : labels) {
    if (l < 0 || l >= c) {
      throw InputError("cross_entropy: label " + std::to_string(l) +
                       " outside [0, " + std::to_string(c) + ")");
    }
  }
  const auto& ld = logits->data();
  std::vector<T> probs(ld.size());
  T acc = T(0);
  for (int i = 0; i < r; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * c;
    T mx = ld[base];
    for (int j = 1; j < c; ++j) mx = std::max(mx, ld[base + j]);
    T denom = T(0);
    for (int j = 0; j < c; ++j) {
      probs[base + j] = std::exp(ld[base + j] - mx);
      denom += probs[base + j];
    }
    for (int j = 0; j < c; ++j) probs[base + j] /= denom;
    acc += std::log(denom) + mx - ld[base + labels[i]];
  }
  const T inv_r = T(1) / static_cast<T>(r);
  auto out = Tensor<T>::scalar(acc * inv_r);
  out->set_op("cross_entropy", {logits},
              [logits, labels, probs = std::move(probs), r, c,
               inv_r](Tensor<T>& o) {
                if (!logits->requires_grad()) return;
                const T g = o.grad()[0] * inv_r;
                auto& dl = logits->grad();
                for (int i = 0; i < r; ++i) {
                  const std::size_t base = static_cast<std::size_t>(i) * c;
                  for (int j = 0; j < c; ++j)
                    dl[base + j] += g * probs[base + j];
                  dl[base + labels[i]] -= g;
                }
              });
  return out;
}

#define SXL_INSTANTIATE_OPS(T)                                              \
  template TensorPtr<T> matmul<T>(const TensorPtr<T>&, const TensorPtr<T>&); \
  template TensorPtr<T> transpose<T>(const TensorPtr<T>&);                   \
  template TensorPtr<T> add<T>(const TensorPtr<T>&, const TensorPtr<T>&);    \
  template TensorPtr<T> sub<T>(const TensorPtr<T>&, const TensorPtr<T>&);    \
  template TensorPtr<T> mul<T>(const TensorPtr<T>&, const TensorPtr<T>&);    \
  template TensorPtr<T> scale<T>(const TensorPtr<T>&, T);                    \
  template TensorPtr<T> add_rowvec<T>(const TensorPtr<T>&,                   \
                                      const TensorPtr<T>&);                  \
  template TensorPtr<T> relu<T>(const TensorPtr<T>&);                        \
  template TensorPtr<T> masked_softmax<T>(const TensorPtr<T>&,               \
                                          const BoolMatrix&);                \
  template TensorPtr<T> layer_norm<T>(const TensorPtr<T>&,                   \
                                      const TensorPtr<T>&,                   \
                                      const TensorPtr<T>&, T);               \
  template TensorPtr<T> dropout<T>(const TensorPtr<T>&, double, Rng&, bool); \
  template TensorPtr<T> concat_cols<T>(const std::vector<TensorPtr<T>>&);    \
  template TensorPtr<T> slice_cols<T>(const TensorPtr<T>&, int, int);        \
  template TensorPtr<T> gather_rows<T>(const TensorPtr<T>&,                  \
                                       std::vector<int>);                    \
  template TensorPtr<T> sum<T>(const TensorPtr<T>&);                         \
  template TensorPtr<T> mean<T>(const TensorPtr<T>&);                        \
  template TensorPtr<T> huber_loss<T>(const TensorPtr<T>&,                   \
                                      const TensorPtr<T>&, double);          \
  template TensorPtr<T> cross_entropy<T>(const TensorPtr<T>&,                \
                                         const std::vector<int>&);

SXL_INSTANTIATE_OPS(float)
SXL_INSTANTIATE_OPS(double)

#undef SXL_INSTANTIATE_OPS

}  // namespace ops
}  // namespace sxl
