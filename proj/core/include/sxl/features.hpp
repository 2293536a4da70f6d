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

#include "sxl/error.hpp"
#include "sxl/rng.hpp"

namespace sxl {

/// One utterance worth of acoustic frames, row-major T x F.
struct FeatureSequence {
  std::string utterance_id;
  int num_frames = 0;   // T
  int feat_dim = 0;     // F
  std::vector<float> frames;

  float at(int t, int f) const {
    return frames[static_cast<std::size_t>(t) * feat_dim + f];
  }
  float& at(int t, int f) {
    return frames[static_cast<std::size_t>(t) * feat_dim + f];
  }
};

/// Global per-dimension mean/variance accumulated over a corpus.
struct CmvnStats {
  std::vector<double> mean;
  std::vector<double> variance;  // biased (divide by N)
  std::int64_t frame_count = 0;
};

/// Feature sequences with aligned per-frame class labels.
struct LabeledCorpus {
  std::vector<FeatureSequence> sequences;
  std::vector<std::vector<int>> labels;  // labels[i].size() == sequences[i].T
  int num_classes = 0;
};

/// SXLF container: magic "SXLF", version u32 = 1, utterance count u32; per
/// utterance: id length u32, UTF-8 id, T u32, F u32, then T*F little-endian
/// f32 row-major.
void save_features(const std::vector<FeatureSequence>& corpus,
                   const std::string& path);
std::vector<FeatureSequence> load_features(const std::string& path);

/// SXLL labels: magic "SXLL", version u32 = 1, utterance count u32; per
/// utterance u32 count then that many u32 class ids.
void save_labels(const std::vector<std::vector<int>>& labels,
                 const std::string& path);
std::vector<std::vector<int>> load_labels(const std::string& path);

/// Pairs features with labels positionally and infers num_classes as
/// max label + 1. Label lengths must match frame counts.
LabeledCorpus load_labeled_corpus(const std::string& features_path,
                                  const std::string& labels_path);

/// Corpus-wide per-dimension mean and biased variance.
CmvnStats compute_global_cmvn(const std::vector<FeatureSequence>& corpus);

/// y = (x - mean) / sqrt(max(variance, floor)).
FeatureSequence apply_cmvn(const FeatureSequence& seq, const CmvnStats& stats,
                           double variance_floor = 1e-10);

/// Output frame i = concat(frames[i*skip ... i*skip+stack-1]); positions past
/// the end repeat the last frame. T' = ceil(T / skip), F' = stack * F.
FeatureSequence stack_frames(const FeatureSequence& seq, int stack, int skip);

/// Labels for a stacked/skipped sequence: label of the anchor frame
/// min(i*skip, T-1) for each output frame i.
std::vector<int> subsample_labels(const std::vector<int>& labels, int orig_T,
                                  int skip);

/// Feature preprocessing applied before training: optional global CMVN then
/// optional frame stacking/skipping. The hybrid-style recipe stacks nothing
/// (stack = skip = 1); the stacked-frame recipe uses stack = skip = 3.
struct PipelineConfig {
  int stack = 1;
  int skip = 1;
  bool cmvn = true;
  double variance_floor = 1e-10;
};

std::vector<FeatureSequence> prepare_features(
    const std::vector<FeatureSequence>& corpus, const PipelineConfig& cfg);
LabeledCorpus prepare_labeled(const LabeledCorpus& corpus,
                              const PipelineConfig& cfg);

struct SyntheticConfig {
  int num_utts = 100;
  int min_frames = 30;
  int max_frames = 60;
  int feat_dim = 40;
  int num_classes = 6;
  std::uint64_t seed = 1;
};

/// Seeded hidden-state corpus: each class owns a distinct mean vector, state
/// transitions are sticky, and the within-state noise is a smooth AR(1)
/// process so neighboring frames are correlated. Labels are the hidden
/// states. Identical config -> identical corpus.
LabeledCorpus gen_synthetic(const SyntheticConfig& cfg);

}  // namespace sxl
