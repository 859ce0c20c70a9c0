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

#ifndef KGCD_METRICS_HPP_
#define KGCD_METRICS_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace kgcd {

// Sum of gains[i] / log2(i + 2) over the first k positions.
double dcg_at_k(std::span<const double> ranked_gains, std::size_t k);

// DCG@k divided by the DCG@k of the gains sorted descending. Lists whose
// ideal DCG is zero score 1.
double ndcg_at_k(std::span<const double> ranked_gains, std::size_t k);

// Relevant items in the first k positions over total_relevant; 1 when
// total_relevant is zero.
double recall_at_k(const std::vector<bool>& ranked_relevant, std::size_t k,
                   std::size_t total_relevant);

}  // namespace kgcd

#endif  // KGCD_METRICS_HPP_
