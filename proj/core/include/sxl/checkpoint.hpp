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
#include <optional>
#include <string>
#include <vector>

#include "sxl/optim.hpp"

namespace sxl {

/// Raw tensor payload with its name, geometry and element type.
struct TensorBlob {
  std::string name;
  std::vector<int> shape;
  std::string dtype;  // "f32" or "f64"
  std::vector<std::uint8_t> bytes;

  std::int64_t element_count() const;
};

struct MetricRow {
  std::int64_t step = 0;
  std::string split;
  std::string metric;
  double value = 0.0;
};

/// On disk: magic "SXCK", version u32, header length u32, UTF-8 JSON header
/// (model config, step, metric history, rng state, tensor name/shape/offset
/// table), then the raw little-endian tensor payloads. save -> load -> save
/// is byte-identical.
struct Checkpoint {
  std::uint32_t version = 1;
  ModelConfig model;
  std::vector<TensorBlob> params;
  std::vector<TensorBlob> opt_m;  // Adam first moments, optional
  std::vector<TensorBlob> opt_v;  // Adam second moments, optional
  bool has_optimizer = false;
  std::int64_t opt_step = 0;
  std::string rng_state;
  std::int64_t step = 0;
  std::vector<MetricRow> metrics;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

/// Packs a parameter set (and optionally Adam moments) into blob form.
template <typename T>
Checkpoint make_checkpoint(const ParamSet<T>& params,
                           const AdamState<T>* opt_state = nullptr);

/// Materializes a parameter set in precision T. The blob table must match
/// param_shape_table(ckpt.model) exactly; a mismatch raises LoadError naming
/// the first offending tensor.
template <typename T>
ParamSet<T> params_from_checkpoint(const Checkpoint& ckpt);

/// Copies encoder weights from `ckpt` into `params` (every parameter the two
/// models share by name except the classifier head, which stays fresh).
/// Shape mismatches raise LoadError listing all offending names.
template <typename T>
void load_encoder_weights(ParamSet<T>& params, const Checkpoint& ckpt);

/// Blob <-> typed vector helpers.
template <typename T>
TensorBlob blob_from_tensor(const std::string& name, const Tensor<T>& t);
template <typename T>
std::vector<T> blob_values(const TensorBlob& blob);

void write_metrics_csv(const std::vector<MetricRow>& metrics,
                       const std::string& path);

}  // namespace sxl
