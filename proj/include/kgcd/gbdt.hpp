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

// Squared-error gradient boosting over dense feature rows.

#ifndef KGCD_GBDT_HPP_
#define KGCD_GBDT_HPP_

#include <span>
#include <vector>

#include "json.hpp"

namespace kgcd {

struct GbdtConfig {
  int rounds = 100;
  int max_depth = 3;  // 0 gives single-leaf trees
  double learning_rate = 0.1;
  std::size_t min_samples_leaf = 1;
};

struct RegressionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // rows with x[feature] <= threshold go left
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool operator==(const Node&) const = default;
  };
  std::vector<Node> nodes;  // nodes[0] is the root

  double predict(std::span<const double> row) const;
  bool operator==(const RegressionTree&) const = default;
};

struct GbdtModel {
  std::size_t num_features = 0;
  double base_score = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;
  // Training RMSE after the base score (index 0) and after each round.
  std::vector<double> training_rmse;

  double predict(std::span<const double> row) const;

  nlohmann::ordered_json to_json() const;
  static GbdtModel FromJson(const nlohmann::json& j);
  bool operator==(const GbdtModel&) const = default;
};

// `rows` is n x num_features, row-major.
GbdtModel train_gbdt(std::span<const double> rows, std::size_t num_features,
                     std::span<const double> targets, const GbdtConfig& config);

}  // namespace kgcd

#endif  // KGCD_GBDT_HPP_
