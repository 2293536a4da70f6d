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

#include "sxl/permutation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sxl {

namespace {

std::vector<int> rank_of(const std::vector<int>& order) {
  std::vector<int> rank(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    rank[static_cast<std::size_t>(order[k])] = static_cast<int>(k);
  }
  return rank;
}

}  // namespace

PermutationOrder sample_permutation(int length, PermMode mode, Rng& rng) {
  if (length < 1) throw InputError("sample_permutation: length must be >= 1");
  PermutationOrder p;
  p.order.resize(static_cast<std::size_t>(length));
  std::iota(p.order.begin(), p.order.end(), 0);
  if (mode == PermMode::random) rng.shuffle(p.order);
  p.rank = rank_of(p.order);
  return p;
}

PermutationOrder permutation_from_order(std::vector<int> order) {
  const int t = static_cast<int>(order.size());
  std::vector<bool> seen(order.size(), false);
  for (const int v : order) {
    if (v < 0 || v >= t || seen[static_cast<std::size_t>(v)]) {
      throw InputError("permutation_from_order: not a bijection on [0, " +
                       std::to_string(t) + ")");
    }
    seen[static_cast<std::size_t>(v)] = true;
  }
  PermutationOrder p;
  p.order = std::move(order);
  p.rank = rank_of(p.order);
  return p;
}

std::vector<int> select_targets(const PermutationOrder& perm, double fraction) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw InputError("select_targets: fraction must be in (0, 1]");
  }
  const int t = perm.length();
  const int e = std::max(
      1, static_cast<int>(std::floor(fraction * static_cast<double>(t))));
  std::vector<int> targets(perm.order.end() - e, perm.order.end());
  std::sort(targets.begin(), targets.end());
  return targets;
}

AttentionMasks build_masks(const PermutationOrder& perm, double fraction) {
  const int t = perm.length();
  AttentionMasks m;
  m.content = BoolMatrix(t, t);
  m.query = BoolMatrix(t, t);
  for (int i = 0; i < t; ++i) {
    const int ri = perm.rank[static_cast<std::size_t>(i)];
    for (int j = 0; j < t; ++j) {
      const int rj = perm.rank[static_cast<std::size_t>(j)];
      m.content.set(i, j, rj <= ri);
      m.query.set(i, j, rj < ri);
    }
  }
  m.targets = select_targets(perm, fraction);
  return m;
}

}  // namespace sxl
