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

// Pointwise, pairwise and listwise ranking losses over one query's list of
// scores, with their gradients with respect to the scores.

#ifndef KGCD_LOSSES_HPP_
#define KGCD_LOSSES_HPP_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace kgcd {

enum class LossKind { kRmse, kRankNet, kListNet };

LossKind parse_loss_kind(std::string_view name);
std::string_view to_string(LossKind kind);

struct LossValue {
  double value = 0.0;
  std::vector<double> grad;  // d value / d scores
  std::size_t pairs = 0;     // RankNet only: number of summed pair terms
};

// sqrt(mean((s - y)^2)). The gradient is taken as zero at the optimum.
LossValue loss_rmse(std::span<const double> scores,
                    std::span<const double> targets);

// Sum over pairs with rank_i < rank_j of log(1 + exp(-(s_i - s_j))).
// `ranks` must be a permutation of 1..k, 1 being the most relevant.
LossValue loss_ranknet(std::span<const double> scores,
                       std::span<const int> ranks);

// -sum softmax(y)_i * log softmax(s)_i.
LossValue loss_listnet(std::span<const double> scores,
                       std::span<const double> targets);

// log(1 + exp(x)) without overflow.
double softplus(double x);

std::vector<double> softmax(std::span<const double> x);

}  // namespace kgcd

#endif  // KGCD_LOSSES_HPP_
