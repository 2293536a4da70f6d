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

#include <optional>
#include <string>
#include <vector>

#include "sxl/checkpoint.hpp"
#include "sxl/features.hpp"
#include "sxl/trainer.hpp"

namespace sxl {

/// One-dimensional loss slice f(alpha) = J(theta0 + alpha * (theta1 -
/// theta0)) along the optimization direction between two checkpoints.
struct LandscapeCurve {
  std::vector<double> alphas;
  std::vector<double> losses;
  std::string ckpt0_id;
  std::string ckpt1_id;
  std::string dataset_id;
  std::vector<std::string> frozen_names;  // held at their theta1 values
};

/// Dataset the landscape loss is evaluated on. With labels and a classifier
/// head the loss is frame-level cross entropy; otherwise it is the Huber
/// tail objective under the identity order with fraction 1 (deterministic).
struct LandscapeDataset {
  std::vector<FeatureSequence> sequences;
  std::optional<std::vector<std::vector<int>>> labels;
  std::string id;
  double huber_delta = 1.0;
};

/// Evaluates the interpolated loss on a grid of n_points alphas spanning
/// [alpha_min, alpha_max], endpoints included. Parameters matching
/// frozen_patterns (and tensors absent from ckpt0) stay at their theta1
/// values. Dropout is off; checkpoints are not mutated. `threads` > 1
/// evaluates grid points in parallel; the output order is by alpha
/// regardless.
LandscapeCurve loss_landscape(const Checkpoint& ckpt0, const Checkpoint& ckpt1,
                              const LandscapeDataset& dataset,
                              double alpha_min, double alpha_max, int n_points,
                              const std::vector<std::string>& frozen_patterns,
                              int threads = 1);

void write_landscape_csv(const LandscapeCurve& curve, const std::string& path);
void write_landscape_metadata(const LandscapeCurve& curve,
                              const std::string& path);

enum class AttentionDumpMode { pretrain, finetune };

/// Post-softmax attention probabilities for one sequence, all layers and
/// heads. In pretrain mode both streams are captured under the given
/// permutation's masks; finetune mode captures the full-context content
/// stream.
struct AttentionDump {
  AttentionDumpMode mode = AttentionDumpMode::finetune;
  int seq_length = 0;
  std::string utterance_id;
  // [layer][head], each a T*T row-major matrix.
  std::vector<std::vector<std::vector<double>>> content;
  std::vector<std::vector<std::vector<double>>> query;  // pretrain mode only
};

AttentionDump dump_attention(const Checkpoint& ckpt,
                             const FeatureSequence& seq,
                             AttentionDumpMode mode,
                             PermMode perm_mode = PermMode::identity,
                             std::uint64_t perm_seed = 0,
                             double fraction = 0.2);

/// Writes one text file per (layer, head[, stream]): first line T, then T
/// lines of T floats. A JSON sidecar lists the files plus per-head summary
/// statistics (row entropy, mean diagonal offset of the row argmax).
void write_attention_dump(const AttentionDump& dump,
                          const std::string& out_dir);

}  // namespace sxl
