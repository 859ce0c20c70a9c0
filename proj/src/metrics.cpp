// Copyright 2026 The kgcd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kgcd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "kgcd/error.hpp"

namespace kgcd {

double dcg_at_k(std::span<const double> ranked_gains, std::size_t k) {
  double dcg = 0.0;
  const std::size_t n = std::min(k, ranked_gains.size());
  for (std::size_t i = 0; i < n; ++i) {
    dcg += ranked_gains[i] / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg;
}

double ndcg_at_k(std::span<const double> ranked_gains, std::size_t k) {
  if (k == 0) throw InvalidArgument("k must be >= 1");
  std::vector<double> ideal(ranked_gains.begin(), ranked_gains.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = dcg_at_k(ideal, k);
  if (idcg <= 0.0) return 1.0;
  return std::clamp(dcg_at_k(ranked_gains, k) / idcg, 0.0, 1.0);
}

double recall_at_k(const std::vector<bool>& ranked_relevant, std::size_t k,
                   std::size_t total_relevant) {
  if (k == 0) throw InvalidArgument("k must be >= 1");
  if (total_relevant == 0) return 1.0;
  std::size_t hits = 0;
  const std::size_t n = std::min(k, ranked_relevant.size());
  for (std::size_t i = 0; i < n; ++i) hits += ranked_relevant[i] ? 1 : 0;
  return std::min(1.0, static_cast<double>(hits) /
                           static_cast<double>(total_relevant));
}

}  // namespace kgcd
