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

enum class PermMode { random, identity };

/// A factorization order over frame positions. order[k] is the position
/// predicted k-th; rank is the inverse map, rank[order[k]] == k.
struct PermutationOrder {
  std::vector<int> order;
  std::vector<int> rank;

  int length() const { return static_cast<int>(order.size()); }
};

/// Content and query visibility for one permutation, applied to the sequence
/// in its original frame order:
///   content[i][j] = (rank[j] <= rank[i])   -- position i may read itself
///   query[i][j]   = (rank[j] <  rank[i])   -- position i may not read itself
/// targets holds the predicted positions, sorted ascending.
struct AttentionMasks {
  BoolMatrix content;
  BoolMatrix query;
  std::vector<int> targets;
};

/// Draws a factorization order. random mode is a uniform Fisher-Yates
/// permutation; identity mode is the in-order arrangement (the left-to-right
/// autoregressive configuration).
PermutationOrder sample_permutation(int length, PermMode mode, Rng& rng);

/// Builds a PermutationOrder from an explicit order array (testing hook).
PermutationOrder permutation_from_order(std::vector<int> order);

/// The last max(1, floor(fraction * T)) positions of the permuted sequence,
/// returned sorted by position index.
std::vector<int> select_targets(const PermutationOrder& perm, double fraction);

/// Visibility masks plus the tail-target set for one permutation.
AttentionMasks build_masks(const PermutationOrder& perm, double fraction);

}  // namespace sxl
