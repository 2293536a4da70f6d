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
#include <vector>

#include "sxl/checkpoint.hpp"
#include "sxl/features.hpp"
#include "sxl/model.hpp"
#include "sxl/optim.hpp"
#include "sxl/permutation.hpp"

namespace sxl {

enum class TrainMode { pretrain, finetune };

struct TrainConfig {
  TrainMode mode = TrainMode::pretrain;
  PermMode perm_mode = PermMode::random;
  double tail_fraction = 0.2;
  std::int64_t batch_frames = 1500;
  int accum_steps = 1;
  std::int64_t total_steps = 200;
  Schedule schedule;
  AdamConfig adam;
  std::uint64_t seed = 1;
  std::string init_from;               // checkpoint path; empty = scratch
  std::vector<std::string> freeze;     // name patterns, '*' wildcard
  std::string precision = "f32";       // "f32" train mode, "f64" test mode
  std::int64_t eval_interval = 50;     // finetune dev evaluation cadence
  double eval_fraction = 0.1;          // held-out utterance fraction
  std::int64_t log_interval = 1;

  void validate() const;
};

/// Greedy frame-budget packing of a shuffled utterance order. Every
/// utterance appears exactly once; the shuffle is deterministic per
/// (seed, epoch). An utterance longer than the budget is an error.
std::vector<std::vector<int>> batch_by_frames(
    const std::vector<FeatureSequence>& corpus, std::int64_t budget,
    std::uint64_t seed, std::int64_t epoch);

/// Simple '*' wildcard matcher used for freeze patterns.
bool name_matches(const std::string& pattern, const std::string& name);

struct TrainOutput {
  Checkpoint init;   // parameters before the first update
  Checkpoint final;  // parameters at the last step, with optimizer state
  std::vector<MetricRow> metrics;
};

/// Permutation-order pretraining: per sequence per encounter a fresh
/// factorization order is sampled (identity when perm_mode = identity),
/// tail targets are regressed against the input frames under the Huber
/// objective, gradients are accumulated over accum_steps micro-batches and
/// applied with Adam under the configured schedule. Deterministic for a
/// fixed seed. Expects CMVN-normalized sequences.
TrainOutput pretrain(const std::vector<FeatureSequence>& corpus,
                     const ModelConfig& model_cfg, const TrainConfig& cfg);

/// Cross-entropy finetuning of the content stream. When init_from is set
/// the encoder is loaded from that checkpoint; the classifier head is always
/// freshly initialized. A seeded eval_fraction split of utterances is held
/// out and scored (cross entropy, frame accuracy) every eval_interval steps.
TrainOutput finetune(const LabeledCorpus& corpus, const ModelConfig& model_cfg,
                     const TrainConfig& cfg);

}  // namespace sxl
